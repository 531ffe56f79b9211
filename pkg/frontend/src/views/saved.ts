import { Ctx, ensureSavedSet } from '../context';
import { button, clear, el } from '../dom';
import { reportError } from '../toast';
import type { LitReviewResponse, SummaryEntry } from '../types';

export interface SavedView {
  ready: Promise<void>;
  reload: () => Promise<void>;
  runSummarize: () => Promise<void>;
  runLitReview: () => Promise<void>;
}

/** Saved-papers drawer with Summarize / Literature Review / Export. */
export function mountSaved(root: HTMLElement, ctx: Ctx): SavedView {
  const { api, store } = ctx;

  const setLabel = el('span', { class: 'set-label' }, ['no saved set yet']);
  const newSet = button(
    'new set',
    () =>
      void api
        .savedCreate()
        .then((s) => store.dispatch({ kind: 'set-saved-set', setId: s.set_id }))
        .catch(reportError),
  );
  const list = el('ul', { class: 'saved-list' });
  const output = el('div', { class: 'saved-output' });

  const summarizeBtn = button('summarize', () => void runSummarize().catch(reportError), 'summarize');
  const reviewBtn = button('literature review', () => void runLitReview().catch(reportError), 'litreview');
  const exportJsonLink = el('a', { class: 'export-json', download: 'papers.json' }, ['export json']);
  const exportBibLink = el('a', { class: 'export-bibtex', download: 'papers.bib' }, ['export bibtex']);

  root.append(
    el('div', { class: 'saved-controls' }, [setLabel, newSet]),
    list,
    el('div', { class: 'saved-actions' }, [summarizeBtn, reviewBtn, exportJsonLink, exportBibLink]),
    output,
  );

  function renderSummaries(entries: SummaryEntry[]): void {
    clear(output);
    const box = el('ul', { class: 'summaries' });
    for (const entry of entries) {
      const item = el('li', { 'data-paper-id': entry.paper_id }, [
        el('strong', {}, [entry.paper_id]),
        ': ',
        entry.ok ? entry.text : el('em', { class: 'error' }, [entry.error ?? 'failed']),
      ]);
      box.append(item);
    }
    output.append(box);
  }

  function renderReview(review: LitReviewResponse): void {
    renderSummaries(review.summaries);
    if (review.synthesis_failed) {
      output.append(el('p', { class: 'error' }, ['synthesis failed; per-paper summaries kept']));
    } else {
      output.append(el('p', { class: 'synthesis' }, [review.synthesis]));
    }
    output.append(el('pre', { class: 'bibliography' }, [review.bibliography.join('\n\n')]));
  }

  async function load(): Promise<void> {
    const setId = store.state.savedSetId;
    clear(list);
    if (setId === null) {
      setLabel.textContent = 'no saved set yet';
      exportJsonLink.removeAttribute('href');
      exportBibLink.removeAttribute('href');
      return;
    }
    setLabel.textContent = `set ${setId}`;
    exportJsonLink.setAttribute('href', api.exportUrl(setId, 'json'));
    exportBibLink.setAttribute('href', api.exportUrl(setId, 'bibtex'));
    try {
      const rows = await api.exportJson(setId);
      if (rows.length === 0) {
        list.append(el('li', { class: 'hint' }, ['empty set']));
      }
      for (const paper of rows) {
        const remove = button(
          'remove',
          () =>
            void api
              .removePaper(setId, paper.id)
              .then(() => store.dispatch({ kind: 'saved-changed' }))
              .catch(reportError),
          'remove-paper',
        );
        list.append(
          el('li', { 'data-paper-id': paper.id }, [
            el('span', { class: 'title' }, [paper.title]),
            paper.year != null ? ` (${paper.year})` : '',
            ' ',
            remove,
          ]),
        );
      }
    } catch (error) {
      reportError(error);
    }
  }

  async function runSummarize(): Promise<void> {
    const setId = await ensureSavedSet(ctx);
    renderSummaries((await api.summarize(setId)).summaries);
  }

  async function runLitReview(): Promise<void> {
    const setId = await ensureSavedSet(ctx);
    renderReview(await api.litreview(setId));
  }

  let lastVersion = store.state.savedVersion;
  let lastSetId = store.state.savedSetId;
  store.subscribe((state) => {
    if (state.savedVersion !== lastVersion || state.savedSetId !== lastSetId) {
      lastVersion = state.savedVersion;
      lastSetId = state.savedSetId;
      void load();
    }
  });

  return { ready: load(), reload: load, runSummarize, runLitReview };
}
