import './style.css';

import { Api } from './api';
import { Ctx } from './context';
import { el } from './dom';
import { Store } from './state';
import { reportError } from './toast';
import { mountChat } from './views/chat';
import { mountMeta } from './views/meta';
import { mountSaved } from './views/saved';
import { mountScatter } from './views/scatter';
import { mountSimilar } from './views/similar';
import { mountTable } from './views/table';
import { mountTemplates } from './views/templates';

function body(id: string): HTMLElement {
  const node = document.querySelector<HTMLElement>(`#${id} .body`);
  if (!node) throw new Error(`missing panel ${id}`);
  return node;
}

export async function boot(ctx: Ctx): Promise<void> {
  const { api, store } = ctx;

  const health = await api.health();
  store.dispatch({ kind: 'spaces-loaded', spaces: health.spaces });
  const info = document.querySelector('#corpus-info');
  if (info) info.textContent = `${health.papers} papers`;

  const picker = document.querySelector<HTMLSelectElement>('#space-select');
  if (picker) {
    for (const space of health.spaces) {
      picker.append(el('option', { value: space }, [space]));
    }
    picker.value = store.state.space;
    picker.addEventListener('change', () => {
      store.dispatch({ kind: 'set-space', space: picker.value });
    });
    store.subscribe((state) => {
      if (picker.value !== state.space) picker.value = state.space;
    });
  }

  // Pick up an existing saved set so a reload keeps working on it.
  const { sets } = await api.savedList();
  if (sets.length > 0) {
    store.dispatch({ kind: 'set-saved-set', setId: sets[0].set_id });
  }

  const views = {
    table: mountTable(body('table-view'), ctx),
    similar: mountSimilar(body('similar-view'), ctx),
    scatter: mountScatter(body('scatter-view'), ctx),
    meta: mountMeta(body('meta-view'), ctx),
    saved: mountSaved(body('saved-view'), ctx),
    chat: mountChat(body('chat-view'), ctx),
    templates: mountTemplates(body('templates-view'), api),
  };
  await Promise.all(Object.values(views).map((view) => view.ready));
}

// Only boot when the real page is present; importing this module from tests
// must stay side-effect free.
if (document.querySelector('#layout')) {
  boot({ api: new Api(''), store: new Store() }).catch(reportError);
}
