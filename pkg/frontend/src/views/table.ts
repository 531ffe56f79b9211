import { Ctx, savePaperToSet } from '../context';
import { button, clear, el } from '../dom';
import { reportError } from '../toast';
import type { Paper, PaperPage } from '../types';

type SortKey = 'title' | 'year' | 'venue';

export interface TableView {
  ready: Promise<void>;
  reload: () => Promise<void>;
}

/** Paper collection view: server-side filtering and paging via /papers. */
export function mountTable(root: HTMLElement, ctx: Ctx): TableView {
  const { api, store } = ctx;

  const search = el('input', {
    type: 'search',
    class: 'table-filter',
    placeholder: 'filter by keyword…',
  });
  search.addEventListener('change', () => {
    store.dispatch({ kind: 'set-query', query: search.value.trim() });
  });

  const info = el('span', { class: 'page-info' });
  const prev = button('‹ prev', () => {
    const { offset, limit } = store.state;
    store.dispatch({ kind: 'set-page', offset: Math.max(0, offset - limit) });
  });
  const next = button('next ›', () => {
    const { offset, limit } = store.state;
    store.dispatch({ kind: 'set-page', offset: offset + limit });
  });

  // Display-order only: the page contents come from /papers as-is.
  let sortKey: SortKey | null = null;
  let sortDir = 1;
  let lastPage: PaperPage | null = null;

  function header(label: SortKey): HTMLElement {
    const th = el('th', { 'data-sort': label, class: 'sortable' }, [label]);
    th.addEventListener('click', () => {
      sortDir = sortKey === label ? -sortDir : 1;
      sortKey = label;
      if (lastPage) renderRows(lastPage);
    });
    return th;
  }

  function ordered(papers: Paper[]): Paper[] {
    const key = sortKey;
    if (key === null) return papers;
    return [...papers].sort((a, b) => {
      if (key === 'year') {
        const ay = a.year ?? null;
        const by = b.year ?? null;
        if (ay === null || by === null) return ay === by ? 0 : ay === null ? 1 : -1;
        return (ay - by) * sortDir;
      }
      const av = key === 'title' ? a.title : a.venue ?? '';
      const bv = key === 'title' ? b.title : b.venue ?? '';
      return av.localeCompare(bv) * sortDir;
    });
  }

  const tbody = el('tbody');
  const table = el('table', { class: 'papers' }, [
    el('thead', {}, [
      el('tr', {}, [header('title'), header('year'), header('venue'), el('th', {}, [''])]),
    ]),
    tbody,
  ]);

  root.append(el('div', { class: 'table-controls' }, [search, prev, next, info]), table);

  const rowsById = new Map<string, HTMLTableRowElement>();

  function renderRows(page: PaperPage): void {
    lastPage = page;
    clear(tbody);
    rowsById.clear();
    info.textContent =
      page.papers.length === 0
        ? `0 of ${page.total}`
        : `${page.offset + 1}–${page.offset + page.papers.length} of ${page.total}`;
    for (const paper of ordered(page.papers)) {
      const seed = button(
        'seed',
        () => store.dispatch({ kind: 'toggle-selected', id: paper.id }),
        'seed-toggle',
      );
      const save = button(
        'save',
        () => void savePaperToSet(ctx, paper.id).catch(reportError),
        'save-paper',
      );
      const row = el('tr', { 'data-paper-id': paper.id }, [
        el('td', { class: 'title', title: paper.abstract ?? '' }, [paper.title]),
        el('td', {}, [paper.year != null ? String(paper.year) : '']),
        el('td', {}, [paper.venue ?? '']),
        el('td', { class: 'row-actions' }, [seed, save]),
      ]);
      rowsById.set(paper.id, row);
      tbody.append(row);
    }
    markSelection();
  }

  function markSelection(): void {
    for (const [id, row] of rowsById) {
      row.classList.toggle('selected', store.state.selectedIds.includes(id));
    }
  }

  async function load(): Promise<void> {
    const { query, limit, offset } = store.state;
    try {
      const page = await api.papers(query, limit, offset);
      store.dispatch({ kind: 'know', ids: page.papers.map((p) => p.id) });
      renderRows(page);
    } catch (error) {
      reportError(error);
    }
  }

  let lastKey = `${store.state.query}|${store.state.offset}|${store.state.limit}`;
  store.subscribe((state) => {
    const key = `${state.query}|${state.offset}|${state.limit}`;
    if (key !== lastKey) {
      lastKey = key;
      void load();
    } else {
      markSelection();
    }
  });

  return { ready: load(), reload: load };
}
