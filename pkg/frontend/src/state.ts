// Single page-wide state container. Views dispatch actions and re-render on
// change; every transition is logged so a session can be replayed exactly.

export interface UiState {
  space: string;
  spaces: string[];
  query: string;
  offset: number;
  limit: number;
  /** Ids seen in any loaded slice (table page, hits, projection, citations).
   *  Selection and highlighting are only ever allowed within this set. */
  knownIds: string[];
  selectedIds: string[];
  highlightedIds: string[];
  focusId: string | null;
  savedSetId: string | null;
  savedVersion: number;
  chatSessionId: string | null;
  chatPending: boolean;
}

export type Action =
  | { kind: 'spaces-loaded'; spaces: string[] }
  | { kind: 'set-space'; space: string }
  | { kind: 'set-query'; query: string }
  | { kind: 'set-page'; offset: number }
  | { kind: 'know'; ids: string[] }
  | { kind: 'toggle-selected'; id: string }
  | { kind: 'set-selected'; ids: string[] }
  | { kind: 'set-highlighted'; ids: string[] }
  | { kind: 'add-highlighted'; ids: string[] }
  | { kind: 'focus'; id: string | null }
  | { kind: 'set-saved-set'; setId: string | null }
  | { kind: 'saved-changed' }
  | { kind: 'set-chat-session'; sessionId: string | null }
  | { kind: 'chat-pending'; pending: boolean };

export const initialState: UiState = {
  space: 'mock',
  spaces: [],
  query: '',
  offset: 0,
  limit: 25,
  knownIds: [],
  selectedIds: [],
  highlightedIds: [],
  focusId: null,
  savedSetId: null,
  savedVersion: 0,
  chatSessionId: null,
  chatPending: false,
};

function union(existing: string[], extra: string[]): string[] {
  const seen = new Set(existing);
  const merged = existing.slice();
  for (const id of extra) {
    if (!seen.has(id)) {
      seen.add(id);
      merged.push(id);
    }
  }
  return merged;
}

export function reduce(state: UiState, action: Action): UiState {
  switch (action.kind) {
    case 'spaces-loaded': {
      const spaces = action.spaces;
      const space = spaces.includes(state.space) ? state.space : spaces[0] ?? state.space;
      return { ...state, spaces, space };
    }
    case 'set-space':
      // Exactly one active space, and it must be a loaded one.
      if (!state.spaces.includes(action.space)) return state;
      return { ...state, space: action.space };
    case 'set-query':
      return { ...state, query: action.query, offset: 0 };
    case 'set-page':
      return { ...state, offset: Math.max(0, action.offset) };
    case 'know':
      return { ...state, knownIds: union(state.knownIds, action.ids) };
    case 'toggle-selected': {
      if (!state.knownIds.includes(action.id)) return state;
      const selected = state.selectedIds.includes(action.id)
        ? state.selectedIds.filter((id) => id !== action.id)
        : [...state.selectedIds, action.id];
      return { ...state, selectedIds: selected };
    }
    case 'set-selected':
      return { ...state, selectedIds: action.ids.filter((id) => state.knownIds.includes(id)) };
    case 'set-highlighted':
      return { ...state, highlightedIds: action.ids.filter((id) => state.knownIds.includes(id)) };
    case 'add-highlighted':
      return {
        ...state,
        highlightedIds: union(
          state.highlightedIds,
          action.ids.filter((id) => state.knownIds.includes(id)),
        ),
      };
    case 'focus':
      if (action.id !== null && !state.knownIds.includes(action.id)) return state;
      return { ...state, focusId: action.id };
    case 'set-saved-set':
      return { ...state, savedSetId: action.setId };
    case 'saved-changed':
      return { ...state, savedVersion: state.savedVersion + 1 };
    case 'set-chat-session':
      return { ...state, chatSessionId: action.sessionId };
    case 'chat-pending':
      return { ...state, chatPending: action.pending };
  }
}

export type Listener = (state: UiState) => void;

export class Store {
  state: UiState = initialState;
  readonly log: Action[] = [];
  private listeners = new Set<Listener>();

  dispatch(action: Action): UiState {
    this.log.push(action);
    const next = reduce(this.state, action);
    if (next !== this.state) {
      this.state = next;
      for (const listener of this.listeners) listener(this.state);
    }
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  /** Pure fold over an action log; must reproduce any live session's state. */
  static replay(actions: Action[]): UiState {
    return actions.reduce(reduce, initialState);
  }
}
