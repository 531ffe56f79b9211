import { Ctx, savePaperToSet } from '../context';
import { button, clear, el } from '../dom';
import { reportError } from '../toast';
import type { SimilarRequest } from '../types';

export interface SimilarView {
  ready: Promise<void>;
  run: () => Promise<void>;
}

/**
 * Similarity panel: queries /similar with the current seed list, or with a
 * draft title/abstract when no seeds are selected. Scores come back from the
 * service and are displayed as-is.
 */
export function mountSimilar(root: HTMLElement, ctx: Ctx): SimilarView {
  const { api, store } = ctx;

  const seedsBox = el('div', { class: 'seed-chips' });
  const title = el('input', { type: 'text', placeholder: 'title (used when no seeds)' });
  const abstract = el('textarea', { placeholder: 'abstract', rows: '3' });
  const k = el('input', { type: 'number', value: '25', min: '1', class: 'k-input' });
  const threshold = el('input', {
    type: 'number',
    step: '0.05',
    placeholder: '0.0',
    class: 'threshold-input',
  });
  const advanced = el('details', { class: 'advanced' }, [
    el('summary', {}, ['advanced']),
    el('label', {}, ['min score ', threshold]),
  ]);
  const results = el('ol', { class: 'hits' });
  const searchBtn = button('search', () => void run().catch(reportError), 'similar-run');

  root.append(
    seedsBox,
    el('div', { class: 'similar-form' }, [title, abstract]),
    el('div', { class: 'similar-controls' }, [el('label', {}, ['k ', k]), advanced, searchBtn]),
    results,
  );

  function renderSeeds(): void {
    clear(seedsBox);
    if (store.state.selectedIds.length === 0) {
      seedsBox.append(el('span', { class: 'hint' }, ['no seeds selected']));
      return;
    }
    for (const id of store.state.selectedIds) {
      const chip = el('span', { class: 'chip', 'data-paper-id': id }, [id, ' ']);
      chip.append(button('×', () => store.dispatch({ kind: 'toggle-selected', id }), 'chip-remove'));
      seedsBox.append(chip);
    }
  }

  async function run(): Promise<void> {
    const state = store.state;
    const body: SimilarRequest = { space: state.space, k: Number(k.value) || 25 };
    const minScore = threshold.value.trim();
    if (minScore !== '') body.threshold = Number(minScore);
    if (state.selectedIds.length > 0) {
      body.seeds = state.selectedIds.slice();
    } else {
      body.title = title.value;
      body.abstract = abstract.value;
    }
    try {
      const response = await api.similar(body);
      store.dispatch({ kind: 'know', ids: response.hits.map((h) => h.paper_id) });
      clear(results);
      if (response.hits.length === 0) {
        results.append(el('li', { class: 'hint' }, ['no results']));
        return;
      }
      for (const hit of response.hits) {
        const seed = button(
          'seed',
          () => store.dispatch({ kind: 'toggle-selected', id: hit.paper_id }),
          'seed-toggle',
        );
        const save = button(
          'save',
          () => void savePaperToSet(ctx, hit.paper_id).catch(reportError),
          'save-paper',
        );
        results.append(
          el('li', { 'data-paper-id': hit.paper_id }, [
            el('span', { class: 'score' }, [hit.score.toFixed(3)]),
            ' ',
            el('span', { class: 'title' }, [hit.title ?? hit.paper_id]),
            hit.year != null ? ` (${hit.year})` : '',
            el('span', { class: 'row-actions' }, [seed, save]),
          ]),
        );
      }
    } catch (error) {
      reportError(error);
    }
  }

  store.subscribe(renderSeeds);
  renderSeeds();
  return { ready: Promise.resolve(), run };
}
