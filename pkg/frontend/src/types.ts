// Shapes of the service's HTTP JSON contract. The UI never recomputes any of
// these values; it only displays what the service returns.

export interface Paper {
  id: string;
  title: string;
  authors?: string[];
  year?: number;
  venue?: string;
  abstract?: string;
  keywords?: string[];
  source_url?: string;
}

export interface PaperPage {
  total: number;
  offset: number;
  limit: number;
  papers: Paper[];
}

export interface Hit {
  paper_id: string;
  score: number;
  title?: string;
  year?: number | null;
  venue?: string | null;
}

export interface SimilarRequest {
  seeds?: string[];
  title?: string;
  abstract?: string;
  space?: string;
  k?: number;
  threshold?: number;
}

export interface SimilarResponse {
  space: string;
  hits: Hit[];
}

export interface ProjectionPoint {
  id: string;
  x: number;
  y: number;
}

export interface ProjectionResponse {
  space: string;
  points: ProjectionPoint[];
}

export interface MetaResponse {
  paper_count: number;
  by_year: Record<string, number>;
  by_venue: Record<string, number>;
  top_keywords: { keyword: string; count: number }[];
}

export interface ChatSessionInfo {
  session_id: string;
  space: string;
  k: number;
}

export interface ChatTurn {
  role: string;
  text: string;
  timestamp: number;
}

export interface ChatHistory extends ChatSessionInfo {
  turns: ChatTurn[];
  condensed_history: string;
}

export interface Citation {
  surface: string;
  start: number;
  end: number;
  paper_id: string | null;
  score: number;
}

export interface ChatReply {
  session_id: string;
  reply: ChatTurn;
  citations: Citation[];
  grounded_count: number;
  ungrounded_count: number;
  context_paper_ids: string[];
  dropped_paper_ids: string[];
  token_estimate: number;
}

export interface SavedSet {
  set_id: string;
  paper_ids: string[];
  created: number;
  modified: number;
}

export interface SummaryEntry {
  paper_id: string;
  text: string;
  ok: boolean;
  error: string | null;
}

export interface SummarizeResponse {
  set_id: string;
  summaries: SummaryEntry[];
}

export interface LitReviewResponse extends SummarizeResponse {
  synthesis: string;
  synthesis_failed: boolean;
  bibliography: string[];
}

export interface TemplateInfo {
  name: string;
  text: string;
  is_default: boolean;
}

export interface TemplateDetail extends TemplateInfo {
  required_placeholders: string[];
}

export interface HealthResponse {
  papers: number;
  spaces: string[];
}
