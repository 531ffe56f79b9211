import { Api } from '../src/api';
import { Ctx } from '../src/context';
import { Store } from '../src/state';

/** Let queued promise chains and zero-delay timers settle. */
export async function flush(rounds = 8): Promise<void> {
  for (let i = 0; i < rounds; i += 1) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

export function makeCtx(): Ctx {
  return { api: new Api(''), store: new Store() };
}

/** Fresh mount root attached to the document. */
export function panel(): HTMLElement {
  const root = document.createElement('div');
  document.body.appendChild(root);
  return root;
}

export function resetDom(): void {
  document.body.innerHTML = '';
}
