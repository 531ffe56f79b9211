// One scripted exploration loop across real mounted views: ask in chat,
// pivot from a citation into selection, run a similarity search from it,
// save a hit, and summarize the saved set. The whole session must then be
// reproducible by replaying the logged actions.

import { afterEach, beforeEach, describe, expect, it } from 'vitest';

import { Ctx } from '../src/context';
import { Store } from '../src/state';
import { mountChat } from '../src/views/chat';
import { mountSaved } from '../src/views/saved';
import { mountScatter } from '../src/views/scatter';
import { mountSimilar } from '../src/views/similar';
import { mountTable } from '../src/views/table';
import { CORPUS, FakeServer, installFakeServer } from './fake-server';
import { flush, makeCtx, panel, resetDom } from './helpers';

let server: FakeServer;
let ctx: Ctx;

beforeEach(() => {
  server = installFakeServer();
  ctx = makeCtx();
});

afterEach(() => {
  server.restore();
  resetDom();
});

describe('exploration loop', () => {
  it('chains chat, citation pivot, similarity, saving and summaries', async () => {
    const tableRoot = panel();
    const similarRoot = panel();
    const scatterRoot = panel();
    const savedRoot = panel();
    const chatRoot = panel();

    const table = mountTable(tableRoot, ctx);
    const similar = mountSimilar(similarRoot, ctx);
    const scatter = mountScatter(scatterRoot, ctx);
    const saved = mountSaved(savedRoot, ctx);
    const chat = mountChat(chatRoot, ctx);
    await Promise.all([table.ready, similar.ready, scatter.ready, saved.ready, chat.ready]);

    // Ask a question; the reply cites p1 and p3 plus one fabricated title.
    await chat.send('where should I start on retrieval?');
    expect(ctx.store.state.chatSessionId).toBe('s1');
    expect(chatRoot.querySelectorAll('span.cite').length).toBe(2);
    expect(chatRoot.querySelectorAll('span.unverified').length).toBe(1);

    // Map the first citation: its point is highlighted and centered.
    chatRoot.querySelector<HTMLElement>('span.cite[data-paper-id="p1"]')!.click();
    chatRoot.querySelector<HTMLButtonElement>('.cite-map')!.click();
    expect(ctx.store.state.highlightedIds).toEqual(['p1']);
    expect(ctx.store.state.focusId).toBe('p1');
    expect(scatter.hitAt(260, 210)?.id).toBe('p1');

    // Pivot: make the second citation a similarity seed.
    chatRoot.querySelector<HTMLElement>('span.cite[data-paper-id="p3"]')!.click();
    chatRoot.querySelector<HTMLButtonElement>('.cite-select')!.click();
    expect(ctx.store.state.selectedIds).toEqual(['p3']);
    expect(
      tableRoot.querySelector('tr[data-paper-id="p3"]')?.classList.contains('selected'),
    ).toBe(true);
    expect(similarRoot.querySelector('.chip[data-paper-id="p3"]')).not.toBeNull();

    // Similarity search runs on the selected seed.
    await similar.run();
    const posted = server.requests.find((r) => r.method === 'POST' && r.path === '/similar');
    expect(posted?.body).toEqual({ space: 'mock', k: 25, seeds: ['p3'] });
    const hits = [...similarRoot.querySelectorAll('ol.hits li')];
    expect(hits.length).toBe(CORPUS.length - 1);
    expect(hits.map((h) => h.getAttribute('data-paper-id'))).not.toContain('p3');

    // Save the top hit; the drawer picks it up.
    hits[0].querySelector<HTMLButtonElement>('.save-paper')!.click();
    await flush();
    const setId = ctx.store.state.savedSetId!;
    expect(setId).toBe('set-1');
    expect(server.savedSets.get(setId)?.paper_ids).toEqual(['p1']);
    expect(savedRoot.querySelector('.saved-list li[data-paper-id="p1"]')).not.toBeNull();
    expect(ctx.store.state.highlightedIds).toContain('p1');

    // Summaries and the review render for the saved set.
    await saved.runSummarize();
    expect(savedRoot.querySelector('.summaries li')?.textContent).toBe('p1: summary of p1');
    await saved.runLitReview();
    expect(savedRoot.querySelector('.synthesis')?.textContent).toBe(
      'synthesis across 1 papers',
    );
    expect(savedRoot.querySelector('.bibliography')?.textContent).toContain('@article{p1');

    // Selection and highlighting never leave the known id universe.
    const known = new Set(ctx.store.state.knownIds);
    for (const id of ctx.store.state.selectedIds) expect(known.has(id)).toBe(true);
    for (const id of ctx.store.state.highlightedIds) expect(known.has(id)).toBe(true);

    // The logged actions replay to the exact same state.
    expect(ctx.store.log.length).toBeGreaterThan(5);
    expect(Store.replay(ctx.store.log)).toEqual(ctx.store.state);
  });

  it('keeps a second scripted session deterministic', async () => {
    server.chatScript.push(
      'Only [[cite:p5|**Condensed Dialogue History**]] is relevant here.',
      'Nothing further beyond [[unverified|**A Book That Never Was**]].',
    );
    const chatRoot = panel();
    const chat = mountChat(chatRoot, ctx);
    await chat.send('first question');
    await chat.send('second question');

    expect(server.sessions.get('s1')?.turns.length).toBe(4);
    const assistants = [...chatRoot.querySelectorAll('.message.assistant')];
    expect(assistants.length).toBe(2);
    expect(assistants[0].querySelector('.cite')?.getAttribute('data-paper-id')).toBe('p5');
    expect(assistants[1].querySelector('.unverified')).not.toBeNull();

    expect(Store.replay(ctx.store.log)).toEqual(ctx.store.state);
  });
});
