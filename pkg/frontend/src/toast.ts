import { ApiError } from './api';
import { el } from './dom';

const TOAST_MS = 4000;

/** Non-blocking error surface; failures never wipe view state. */
export function toast(message: string): void {
  let host = document.getElementById('toasts');
  if (!host) {
    host = el('div', { id: 'toasts' });
    document.body.appendChild(host);
  }
  const node = el('div', { class: 'toast', role: 'alert' }, [message]);
  host.appendChild(node);
  setTimeout(() => node.remove(), TOAST_MS);
}

export function reportError(error: unknown): void {
  if (error instanceof ApiError) {
    toast(`${error.code}: ${error.message}`);
  } else if (error instanceof Error) {
    toast(error.message);
  } else {
    toast(String(error));
  }
}
