import { BarRow, barWidthPct, topRows, yearRows } from '../charts';
import { Ctx } from '../context';
import { clear, el } from '../dom';
import { reportError } from '../toast';
import type { MetaResponse } from '../types';

export interface MetaView {
  ready: Promise<void>;
}

/** Meta view: bar charts of year / venue / keyword counts from /meta,
 *  recomputed server-side for the active table filter. */
export function mountMeta(root: HTMLElement, ctx: Ctx): MetaView {
  const { api, store } = ctx;
  const body = el('div', { class: 'meta-charts' });
  root.append(body);

  function chart(name: string, rows: BarRow[]): HTMLElement {
    const max = rows.reduce((m, r) => Math.max(m, r.count), 0);
    const box = el('div', { class: 'chart', 'data-chart': name }, [el('h3', {}, [name])]);
    if (rows.length === 0) {
      box.append(el('p', { class: 'hint' }, ['no data']));
      return box;
    }
    for (const row of rows) {
      const bar = el('div', { class: 'bar' });
      bar.style.width = `${barWidthPct(row.count, max)}%`;
      box.append(
        el('div', { class: 'bar-row' }, [
          el('span', { class: 'bar-label' }, [row.label]),
          bar,
          el('span', { class: 'bar-count' }, [String(row.count)]),
        ]),
      );
    }
    return box;
  }

  function render(meta: MetaResponse): void {
    clear(body);
    body.append(
      el('p', { class: 'count' }, [`${meta.paper_count} papers`]),
      chart('by year', yearRows(meta.by_year)),
      chart('top venues', topRows(meta.by_venue, 12)),
      chart(
        'top keywords',
        meta.top_keywords.map((k) => ({ label: k.keyword, count: k.count })),
      ),
    );
  }

  async function load(): Promise<void> {
    try {
      render(await api.meta(store.state.query || undefined));
    } catch (error) {
      reportError(error);
    }
  }

  let lastQuery = store.state.query;
  store.subscribe((state) => {
    if (state.query !== lastQuery) {
      lastQuery = state.query;
      void load();
    }
  });

  return { ready: load() };
}
