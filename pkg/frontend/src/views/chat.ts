import { Ctx, savePaperToSet } from '../context';
import { button, el } from '../dom';
import { displayTitle, parseMarkup } from '../markup';
import { reportError } from '../toast';

export interface ChatView {
  ready: Promise<void>;
  send: (text?: string) => Promise<void>;
}

/**
 * Chat panel. Assistant text arrives with grounding markup; grounded titles
 * become clickable with a map / select / save menu, unverified ones get a
 * warning badge and no menu. Input stays disabled while a request is in
 * flight because the service serializes turns per session.
 */
export function mountChat(root: HTMLElement, ctx: Ctx): ChatView {
  const { api, store } = ctx;

  const messages = el('div', { class: 'messages' });
  const input = el('input', { type: 'text', placeholder: 'ask about the corpus…' });
  const sendBtn = button('send', () => void send().catch(reportError), 'chat-send');
  input.addEventListener('keydown', (event) => {
    if (event.key === 'Enter') void send().catch(reportError);
  });
  root.append(messages, el('div', { class: 'chat-input' }, [input, sendBtn]));

  let popover: HTMLElement | null = null;

  function closePopover(): void {
    popover?.remove();
    popover = null;
  }

  function openPopover(anchor: HTMLElement, paperId: string): void {
    closePopover();
    const mapBtn = button(
      'map',
      () => {
        store.dispatch({ kind: 'know', ids: [paperId] });
        store.dispatch({ kind: 'add-highlighted', ids: [paperId] });
        store.dispatch({ kind: 'focus', id: paperId });
        closePopover();
      },
      'cite-map',
    );
    const selectBtn = button(
      'select',
      () => {
        store.dispatch({ kind: 'know', ids: [paperId] });
        if (!store.state.selectedIds.includes(paperId)) {
          store.dispatch({ kind: 'toggle-selected', id: paperId });
        }
        closePopover();
      },
      'cite-select',
    );
    const saveBtn = button(
      'save',
      () => {
        void savePaperToSet(ctx, paperId).catch(reportError);
        closePopover();
      },
      'cite-save',
    );
    popover = el('span', { class: 'popover' }, [mapBtn, selectBtn, saveBtn]);
    // Clicks inside the menu must not bubble into the cite span and reopen it.
    popover.addEventListener('click', (event) => event.stopPropagation());
    anchor.append(popover);
    // A reload may have dropped the cited paper since the reply was
    // generated; in that case the menu stays visible but inert.
    void api.paper(paperId).catch(() => {
      for (const btn of [mapBtn, selectBtn, saveBtn]) btn.disabled = true;
      if (popover) popover.title = 'paper no longer in the corpus';
    });
  }

  function assistantMessage(text: string): HTMLElement {
    const box = el('div', { class: 'message assistant' });
    for (const segment of parseMarkup(text)) {
      if (segment.kind === 'text') {
        box.append(segment.text);
      } else if (segment.kind === 'cite') {
        const cite = el('span', { class: 'cite', 'data-paper-id': segment.paperId }, [
          displayTitle(segment.surface),
        ]);
        cite.addEventListener('click', () => openPopover(cite, segment.paperId));
        box.append(cite);
      } else {
        box.append(
          el('span', { class: 'unverified', title: 'title not found in the corpus' }, [
            displayTitle(segment.surface),
            el('sup', { class: 'badge' }, ['unverified']),
          ]),
        );
      }
    }
    return box;
  }

  async function send(text?: string): Promise<void> {
    const message = (text ?? input.value).trim();
    if (!message || store.state.chatPending) return;
    store.dispatch({ kind: 'chat-pending', pending: true });
    input.disabled = true;
    sendBtn.disabled = true;
    try {
      let sessionId = store.state.chatSessionId;
      if (sessionId === null) {
        const session = await api.chatCreate(store.state.space);
        sessionId = session.session_id;
        store.dispatch({ kind: 'set-chat-session', sessionId });
      }
      messages.append(el('div', { class: 'message user' }, [message]));
      const reply = await api.chatSend(sessionId, message);
      const cited = reply.citations
        .map((c) => c.paper_id)
        .filter((id): id is string => id !== null);
      store.dispatch({ kind: 'know', ids: [...reply.context_paper_ids, ...cited] });
      messages.append(assistantMessage(reply.reply.text));
      input.value = '';
    } catch (error) {
      reportError(error);
    } finally {
      store.dispatch({ kind: 'chat-pending', pending: false });
      input.disabled = false;
      sendBtn.disabled = false;
    }
  }

  return { ready: Promise.resolve(), send };
}
