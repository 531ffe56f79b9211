import { Api } from './api';
import { Store } from './state';

export interface Ctx {
  api: Api;
  store: Store;
}

/** Active saved set, creating one on first use. */
export async function ensureSavedSet(ctx: Ctx): Promise<string> {
  const current = ctx.store.state.savedSetId;
  if (current !== null) return current;
  const created = await ctx.api.savedCreate();
  ctx.store.dispatch({ kind: 'set-saved-set', setId: created.set_id });
  return created.set_id;
}

/**
 * Save into the active set and reflect it everywhere: the drawer refreshes
 * and the paper's point lights up on the map.
 */
export async function savePaperToSet(ctx: Ctx, paperId: string): Promise<void> {
  const setId = await ensureSavedSet(ctx);
  await ctx.api.savePaper(setId, paperId);
  ctx.store.dispatch({ kind: 'know', ids: [paperId] });
  ctx.store.dispatch({ kind: 'add-highlighted', ids: [paperId] });
  ctx.store.dispatch({ kind: 'saved-changed' });
}
