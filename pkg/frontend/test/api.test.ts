import { afterEach, describe, expect, it } from 'vitest';

import { Api, ApiError } from '../src/api';

interface Captured {
  url: string;
  init?: RequestInit;
}

const realFetch = globalThis.fetch;

function capture(status = 200, body: unknown = {}, jsonFails = false): Captured[] {
  const calls: Captured[] = [];
  globalThis.fetch = async (input: RequestInfo | URL, init?: RequestInit) => {
    calls.push({ url: String(input), init });
    return {
      ok: status >= 200 && status < 300,
      status,
      statusText: status === 200 ? 'OK' : 'Service Unavailable',
      json: () =>
        jsonFails ? Promise.reject(new SyntaxError('not json')) : Promise.resolve(body),
    } as unknown as Response;
  };
  return calls;
}

afterEach(() => {
  globalThis.fetch = realFetch;
});

describe('request shapes', () => {
  it('builds the papers listing URL with paging and query', async () => {
    const calls = capture(200, { total: 0, offset: 20, limit: 10, papers: [] });
    await new Api('').papers('graph retrieval', 10, 20);
    expect(calls[0].url).toBe('/papers?limit=10&offset=20&query=graph+retrieval');
    expect(calls[0].init?.method ?? 'GET').toBe('GET');
  });

  it('escapes paper ids in paths', async () => {
    const calls = capture(200, { id: 'a b', title: 't' });
    await new Api('').paper('a b');
    expect(calls[0].url).toBe('/papers/a%20b');
  });

  it('posts similar queries as JSON', async () => {
    const calls = capture(200, { space: 'mock', hits: [] });
    await new Api('').similar({ seeds: ['p1'], k: 5, threshold: 0.2 });
    expect(calls[0].url).toBe('/similar');
    expect(calls[0].init?.method).toBe('POST');
    expect(calls[0].init?.headers).toEqual({ 'content-type': 'application/json' });
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      seeds: ['p1'],
      k: 5,
      threshold: 0.2,
    });
  });

  it('sends chat messages to the session path', async () => {
    const calls = capture(200, {
      session_id: 's 1',
      reply: { role: 'assistant', text: '', timestamp: 0 },
      citations: [],
      grounded_count: 0,
      ungrounded_count: 0,
      context_paper_ids: [],
      dropped_paper_ids: [],
      token_estimate: 0,
    });
    await new Api('').chatSend('s 1', 'hello');
    expect(calls[0].url).toBe('/chat/s%201');
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({ message: 'hello' });
  });

  it('removes saved papers with DELETE', async () => {
    const calls = capture(200, { set_id: 's', paper_ids: [], created: 0, modified: 0 });
    await new Api('').removePaper('s', 'p1');
    expect(calls[0].url).toBe('/saved/s/papers/p1');
    expect(calls[0].init?.method).toBe('DELETE');
  });

  it('updates templates with PUT', async () => {
    const calls = capture(200, { name: 'condense', text: 'x {history}', is_default: false });
    await new Api('').putTemplate('condense', 'x {history}');
    expect(calls[0].url).toBe('/templates/condense');
    expect(calls[0].init?.method).toBe('PUT');
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({ text: 'x {history}' });
  });

  it('prefixes every path with the configured base', async () => {
    const calls = capture(200, { papers: 0, spaces: [] });
    await new Api('http://example.test').health();
    expect(calls[0].url).toBe('http://example.test/health');
  });

  it('builds export links without fetching', () => {
    const api = new Api('');
    expect(api.exportUrl('my set', 'bibtex')).toBe('/saved/my%20set/export?format=bibtex');
    expect(api.exportUrl('s1', 'json')).toBe('/saved/s1/export?format=json');
  });
});

describe('error handling', () => {
  it('surfaces the error envelope as an ApiError', async () => {
    capture(404, { error: { code: 'not_found', message: 'no paper p9', detail: null } });
    const err = await new Api('').paper('p9').catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    const apiErr = err as ApiError;
    expect(apiErr.status).toBe(404);
    expect(apiErr.code).toBe('not_found');
    expect(apiErr.message).toBe('no paper p9');
  });

  it('falls back to the status line for non-JSON error bodies', async () => {
    capture(503, {}, true);
    const err = (await new Api('').health().catch((e: unknown) => e)) as ApiError;
    expect(err.code).toBe('internal');
    expect(err.message).toBe('503 Service Unavailable');
  });

  it('passes detail through when present', async () => {
    capture(400, {
      error: { code: 'bad_request', message: 'malformed request', detail: 'k must be int' },
    });
    const err = (await new Api('').health().catch((e: unknown) => e)) as ApiError;
    expect(err.detail).toBe('k must be int');
  });
});
