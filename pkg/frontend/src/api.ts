import type {
  ChatHistory,
  ChatReply,
  ChatSessionInfo,
  HealthResponse,
  LitReviewResponse,
  MetaResponse,
  Paper,
  PaperPage,
  ProjectionResponse,
  SavedSet,
  SimilarRequest,
  SimilarResponse,
  SummarizeResponse,
  TemplateDetail,
  TemplateInfo,
} from './types';

/** Error envelope raised for any non-2xx response. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail?: unknown,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let code = 'internal';
  let message = `${response.status} ${response.statusText}`;
  let detail: unknown;
  try {
    const body = await response.json();
    if (body && typeof body === 'object' && body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
      detail = body.error.detail;
    }
  } catch {
    // Non-JSON error body; keep the status line as the message.
  }
  return new ApiError(response.status, code, message, detail);
}

export class Api {
  constructor(readonly base: string = '') {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, init);
    if (!response.ok) throw await toApiError(response);
    return (await response.json()) as T;
  }

  private json<T>(method: string, path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method,
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<HealthResponse> {
    return this.request('/health');
  }

  papers(query: string, limit: number, offset: number): Promise<PaperPage> {
    const params = new URLSearchParams({ limit: String(limit), offset: String(offset) });
    if (query) params.set('query', query);
    return this.request(`/papers?${params.toString()}`);
  }

  paper(id: string): Promise<Paper> {
    return this.request(`/papers/${encodeURIComponent(id)}`);
  }

  similar(body: SimilarRequest): Promise<SimilarResponse> {
    return this.json('POST', '/similar', body);
  }

  projection(space?: string): Promise<ProjectionResponse> {
    const suffix = space ? `?space=${encodeURIComponent(space)}` : '';
    return this.request(`/projection${suffix}`);
  }

  meta(query?: string): Promise<MetaResponse> {
    const suffix = query ? `?query=${encodeURIComponent(query)}` : '';
    return this.request(`/meta${suffix}`);
  }

  chatCreate(space?: string): Promise<ChatSessionInfo> {
    return this.json('POST', '/chat', space ? { space } : {});
  }

  chatHistory(sessionId: string): Promise<ChatHistory> {
    return this.request(`/chat/${encodeURIComponent(sessionId)}`);
  }

  chatSend(sessionId: string, message: string): Promise<ChatReply> {
    return this.json('POST', `/chat/${encodeURIComponent(sessionId)}`, { message });
  }

  savedList(): Promise<{ sets: SavedSet[] }> {
    return this.request('/saved');
  }

  savedCreate(setId?: string): Promise<SavedSet> {
    return this.json('POST', '/saved', setId ? { set_id: setId } : {});
  }

  savedGet(setId: string): Promise<SavedSet> {
    return this.request(`/saved/${encodeURIComponent(setId)}`);
  }

  savePaper(setId: string, paperId: string): Promise<SavedSet> {
    return this.json('POST', `/saved/${encodeURIComponent(setId)}/papers`, { paper_id: paperId });
  }

  removePaper(setId: string, paperId: string): Promise<SavedSet> {
    return this.request(
      `/saved/${encodeURIComponent(setId)}/papers/${encodeURIComponent(paperId)}`,
      { method: 'DELETE' },
    );
  }

  summarize(setId: string): Promise<SummarizeResponse> {
    return this.request(`/saved/${encodeURIComponent(setId)}/summarize`, { method: 'POST' });
  }

  litreview(setId: string): Promise<LitReviewResponse> {
    return this.request(`/saved/${encodeURIComponent(setId)}/litreview`, { method: 'POST' });
  }

  /** Exported JSON rows carry full paper records; used to render the drawer. */
  exportJson(setId: string): Promise<Paper[]> {
    return this.request(`/saved/${encodeURIComponent(setId)}/export?format=json`);
  }

  exportUrl(setId: string, format: 'json' | 'bibtex'): string {
    return `${this.base}/saved/${encodeURIComponent(setId)}/export?format=${format}`;
  }

  templates(): Promise<{ templates: TemplateInfo[] }> {
    return this.request('/templates');
  }

  template(name: string): Promise<TemplateDetail> {
    return this.request(`/templates/${encodeURIComponent(name)}`);
  }

  putTemplate(name: string, text: string): Promise<TemplateInfo> {
    return this.json('PUT', `/templates/${encodeURIComponent(name)}`, { text });
  }

  resetTemplate(name: string): Promise<TemplateInfo> {
    return this.request(`/templates/${encodeURIComponent(name)}`, { method: 'DELETE' });
  }
}
