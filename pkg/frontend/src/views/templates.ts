import { ApiError, Api } from '../api';
import { button, clear, el } from '../dom';
import { reportError } from '../toast';

export interface TemplatesView {
  ready: Promise<void>;
  select: (name: string) => Promise<void>;
  save: () => Promise<void>;
  reset: () => Promise<void>;
}

/** Prompt template editor with per-template placeholder hints. */
export function mountTemplates(root: HTMLElement, api: Api): TemplatesView {
  const list = el('ul', { class: 'template-list' });
  const title = el('h3', {}, ['select a template']);
  const hint = el('p', { class: 'hint' });
  const editor = el('textarea', { rows: '8', disabled: '' });
  const errorBox = el('p', { class: 'error', hidden: '' });
  const saveBtn = button('save', () => void save().catch(reportError), 'template-save');
  const resetBtn = button(
    'reset to default',
    () => void reset().catch(reportError),
    'template-reset',
  );
  saveBtn.disabled = true;
  resetBtn.disabled = true;
  root.append(
    list,
    el('div', { class: 'template-editor' }, [title, hint, editor, errorBox, saveBtn, resetBtn]),
  );

  let current: string | null = null;

  function showError(message: string | null): void {
    if (message === null) {
      errorBox.hidden = true;
      errorBox.textContent = '';
    } else {
      errorBox.hidden = false;
      errorBox.textContent = message;
    }
  }

  async function loadList(): Promise<void> {
    const { templates } = await api.templates();
    clear(list);
    for (const info of templates) {
      const item = el('li', { 'data-template': info.name }, [
        button(info.name, () => void select(info.name).catch(reportError)),
      ]);
      if (!info.is_default) item.append(el('span', { class: 'badge' }, ['edited']));
      list.append(item);
    }
  }

  async function select(name: string): Promise<void> {
    const detail = await api.template(name);
    current = name;
    title.textContent = name;
    hint.textContent = detail.required_placeholders.length
      ? `required placeholders: ${detail.required_placeholders.join(', ')}`
      : 'no required placeholders';
    editor.value = detail.text;
    editor.disabled = false;
    saveBtn.disabled = false;
    resetBtn.disabled = false;
    showError(null);
  }

  async function save(): Promise<void> {
    if (current === null) return;
    try {
      await api.putTemplate(current, editor.value);
      showError(null);
      await loadList();
    } catch (error) {
      // Rejected edits (missing placeholders) stay in the editor with the
      // service's explanation; other failures go through the toast path.
      if (error instanceof ApiError && error.status === 400) {
        showError(error.message);
        return;
      }
      throw error;
    }
  }

  async function reset(): Promise<void> {
    if (current === null) return;
    await api.resetTemplate(current);
    await select(current);
    await loadList();
  }

  return { ready: loadList(), select, save, reset };
}
