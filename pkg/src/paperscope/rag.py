"""Retrieval-augmented chat: history condensation, context packing, grounding.

Each answered message costs exactly two LLM calls once a session has history
(condense, then answer) and exactly one on the first message.
"""
from __future__ import annotations

import json
import re
import threading
import time
import uuid
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .corpus import CorpusStore, PaperRecord
from .errors import LlmError, NotFoundError, OversizeQueryError, ValidationError
from .grounding import GroundingReport, TitleMatcher, annotate
from .index import SearchHit, VectorSearch
from .llm import LlmClient, Message
from .templates import TemplateStore

DEFAULT_SESSION_K = 8

# One token is approximated as four characters of prompt text.
CHARS_PER_TOKEN = 4


def estimate_tokens(text: str) -> int:
    return (len(text) + CHARS_PER_TOKEN - 1) // CHARS_PER_TOKEN


@dataclass(frozen=True)
class TokenBudget:
    model_limit: int = 16000
    reserve_for_answer: int = 1024
    history_budget: int = 1500

    def __post_init__(self) -> None:
        if self.model_limit <= 0 or self.reserve_for_answer <= 0 or self.history_budget <= 0:
            raise ValidationError("token budget components must be positive")
        if self.reserve_for_answer + self.history_budget >= self.model_limit:
            raise ValidationError("model_limit must exceed reserved budgets")

    @property
    def prompt_limit(self) -> int:
        return self.model_limit - self.reserve_for_answer


_SENTENCE_END_RE = re.compile(r"[.!?][\"')\]]*(?=\s|$)")


def truncate_to_token_budget(text: str, budget_tokens: int) -> str:
    """Longest sentence-bounded prefix within budget; hard character cut if
    even the first sentence does not fit."""
    if budget_tokens <= 0:
        return ""
    if estimate_tokens(text) <= budget_tokens:
        return text
    max_chars = budget_tokens * CHARS_PER_TOKEN
    best = ""
    for match in _SENTENCE_END_RE.finditer(text):
        end = match.end()
        if end > max_chars:
            break
        best = text[:end]
    if best:
        return best.rstrip()
    return text[:max_chars].rstrip()


@dataclass(frozen=True)
class ChatTurn:
    role: str
    text: str
    timestamp: float

    def to_dict(self) -> dict:
        return {"role": self.role, "text": self.text, "timestamp": self.timestamp}


@dataclass
class ChatSession:
    session_id: str
    space: str
    k: int = DEFAULT_SESSION_K
    turns: list[ChatTurn] = field(default_factory=list)
    condensed_history: str = ""
    condensed_upto: int = 0

    @property
    def prior_exchanges(self) -> int:
        return sum(1 for turn in self.turns if turn.role == "assistant")


def render_context_block(record: PaperRecord, score: float) -> str:
    """One retrieved paper as labeled metadata lines; empty fields omitted."""
    lines = [f"Title: {record.title}"]
    if record.authors:
        lines.append("Authors: " + ", ".join(record.authors))
    if record.year is not None:
        lines.append(f"Year: {record.year}")
    if record.venue:
        lines.append(f"Venue: {record.venue}")
    if record.abstract:
        lines.append(f"Abstract: {record.abstract}")
    lines.append(f"Score: {score:.4f}")
    return "\n".join(lines)


@dataclass(frozen=True)
class PromptBundle:
    system_preamble: str
    condensed_history: str
    context_blocks: tuple[tuple[str, str], ...]
    user_query: str
    dropped_paper_ids: tuple[str, ...]
    token_estimate: int

    @property
    def context_paper_ids(self) -> tuple[str, ...]:
        return tuple(pid for pid, _ in self.context_blocks)

    def user_content(self) -> str:
        parts = []
        if self.condensed_history:
            parts.append("Conversation summary:\n" + self.condensed_history)
        if self.context_blocks:
            blocks = "\n\n".join(text for _, text in self.context_blocks)
            parts.append("Retrieved papers:\n\n" + blocks)
        parts.append("User question: " + self.user_query)
        return "\n\n".join(parts)

    def full_text(self) -> str:
        if self.system_preamble:
            return self.system_preamble + "\n\n" + self.user_content()
        return self.user_content()

    def to_messages(self) -> list[Message]:
        messages: list[Message] = []
        if self.system_preamble:
            messages.append({"role": "system", "content": self.system_preamble})
        messages.append({"role": "user", "content": self.user_content()})
        return messages


def _render_history(session: ChatSession) -> str:
    parts = []
    if session.condensed_history:
        parts.append("Earlier summary: " + session.condensed_history)
    for turn in session.turns[session.condensed_upto:]:
        parts.append(f"{turn.role}: {turn.text}")
    return "\n".join(parts)


def condense_history(
    session: ChatSession,
    llm: LlmClient,
    templates: TemplateStore,
    budget: TokenBudget,
) -> str:
    """Fold turns since the last condensation into the running summary.

    On LLM failure the previous summary is kept and the error propagates.
    """
    if session.prior_exchanges < 1:
        raise ValidationError("nothing to condense: session has no completed exchange")
    template = templates.get("condense")
    history_text = _render_history(session)
    # Keep the condense call itself inside the prompt limit.
    overhead = estimate_tokens(template.render(history=""))
    history_text = truncate_to_token_budget(history_text, budget.prompt_limit - overhead)
    prompt = template.render(history=history_text)
    summary = llm.complete([{"role": "user", "content": prompt}])
    summary = truncate_to_token_budget(summary.strip(), budget.history_budget)
    session.condensed_history = summary
    session.condensed_upto = len(session.turns)
    return summary


def retrieve_context(
    query: str,
    session: ChatSession,
    search: VectorSearch,
    embedder: Callable[[str, str], np.ndarray],
) -> list[SearchHit]:
    seed = embedder(query, session.space)
    return search.search(session.space, seed, k=session.k)


def assemble_prompt(
    query: str,
    session: ChatSession,
    hits: Sequence[SearchHit],
    corpus: CorpusStore,
    budget: TokenBudget,
    system_preamble: str,
) -> PromptBundle:
    """Pack retrieved blocks in rank order until the next one would overflow.

    Raises OversizeQueryError when the prompt exceeds the limit before any
    context is added at all.
    """

    def bundle_with(blocks: list[tuple[str, str]], dropped: tuple[str, ...]) -> PromptBundle:
        candidate = PromptBundle(
            system_preamble=system_preamble,
            condensed_history=session.condensed_history,
            context_blocks=tuple(blocks),
            user_query=query,
            dropped_paper_ids=dropped,
            token_estimate=0,
        )
        estimate = estimate_tokens(candidate.full_text())
        return PromptBundle(
            system_preamble=candidate.system_preamble,
            condensed_history=candidate.condensed_history,
            context_blocks=candidate.context_blocks,
            user_query=candidate.user_query,
            dropped_paper_ids=candidate.dropped_paper_ids,
            token_estimate=estimate,
        )

    base = bundle_with([], ())
    if base.token_estimate > budget.prompt_limit:
        raise OversizeQueryError(
            f"query and history need {base.token_estimate} tokens; "
            f"limit is {budget.prompt_limit}"
        )

    included: list[tuple[str, str]] = []
    dropped: list[str] = []
    current = base
    for pos, hit in enumerate(hits):
        record = corpus.get_paper(hit.paper_id)
        block = render_context_block(record, hit.score)
        candidate = bundle_with(included + [(hit.paper_id, block)], ())
        if candidate.token_estimate > budget.prompt_limit:
            dropped = [h.paper_id for h in hits[pos:]]
            break
        included.append((hit.paper_id, block))
        current = candidate
    return bundle_with(included, tuple(dropped)) if dropped else current


@dataclass(frozen=True)
class ChatResult:
    session_id: str
    reply: ChatTurn
    report: GroundingReport
    bundle: PromptBundle
    hits: tuple[SearchHit, ...]


class TurnLog:
    """Append-only JSONL record of every committed turn."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, session_id: str, turn: ChatTurn) -> None:
        row = {"session_id": session_id, **turn.to_dict()}
        line = json.dumps(row, ensure_ascii=False, sort_keys=True)
        with self._lock:
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")


class SessionStore:
    """In-memory sessions with a per-session lock for serialized chat calls."""

    def __init__(self):
        self._sessions: dict[str, ChatSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def create(self, space: str, k: int = DEFAULT_SESSION_K) -> ChatSession:
        if k < 1:
            raise ValidationError("session k must be at least 1")
        session = ChatSession(session_id=uuid.uuid4().hex, space=space, k=k)
        with self._registry_lock:
            self._sessions[session.session_id] = session
            self._locks[session.session_id] = threading.Lock()
        return session

    def get(self, session_id: str) -> ChatSession:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"unknown session: {session_id!r}")
        return session

    def ids(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._sessions)

    @contextmanager
    def locked(self, session_id: str) -> Iterator[ChatSession]:
        session = self.get(session_id)
        with self._registry_lock:
            lock = self._locks[session_id]
        with lock:
            yield session


class ChatOrchestrator:
    """Runs the condense / retrieve / assemble / answer / annotate pipeline."""

    def __init__(
        self,
        corpus: CorpusStore,
        search: VectorSearch,
        embedder: Callable[[str, str], np.ndarray],
        llm: LlmClient,
        templates: TemplateStore,
        budget: TokenBudget | None = None,
        clock: Callable[[], float] = time.time,
        turn_log: TurnLog | None = None,
    ):
        self.corpus = corpus
        self.search = search
        self.embedder = embedder
        self.llm = llm
        self.templates = templates
        self.budget = budget or TokenBudget()
        self.clock = clock
        self.turn_log = turn_log
        self.matcher = TitleMatcher(corpus)

    def chat(self, session: ChatSession, message: str) -> ChatResult:
        message = message.strip()
        if not message:
            raise ValidationError("chat message must not be empty")
        if session.prior_exchanges >= 1:
            condense_history(session, self.llm, self.templates, self.budget)
        hits = retrieve_context(message, session, self.search, self.embedder)
        preamble = self.templates.get("chat_system").text
        bundle = assemble_prompt(message, session, hits, self.corpus, self.budget, preamble)
        # The turn is only committed on success; an LlmError here leaves the
        # session unchanged apart from the already-updated condensation.
        raw_answer = self.llm.complete(bundle.to_messages())
        marked, report = annotate(raw_answer, self.matcher)
        now = self.clock()
        user_turn = ChatTurn("user", message, now)
        reply = ChatTurn("assistant", marked, now)
        session.turns.extend([user_turn, reply])
        if self.turn_log is not None:
            self.turn_log.append(session.session_id, user_turn)
            self.turn_log.append(session.session_id, reply)
        return ChatResult(
            session_id=session.session_id,
            reply=reply,
            report=report,
            bundle=bundle,
            hits=tuple(hits),
        )
