"""LLM-backed summarize and literature-review generation over saved papers.

A review of n papers is a prompt chain of exactly n + 1 calls: one summary
per paper from metadata, then one synthesis over the summaries. The
bibliography is rendered locally from metadata, never by the LLM.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

from .corpus import PaperRecord
from .embeddings import compose_document_text
from .errors import LlmError, ValidationError
from .llm import LlmClient
from .rag import TokenBudget, estimate_tokens, truncate_to_token_budget
from .saved import bibtex_entries
from .templates import PromptTemplate, TemplateStore

logger = logging.getLogger(__name__)

DEFAULT_PARALLELISM = 4


@dataclass(frozen=True)
class SummaryEntry:
    paper_id: str
    text: str
    ok: bool = True
    error: str | None = None

    def to_dict(self) -> dict:
        return {"paper_id": self.paper_id, "text": self.text, "ok": self.ok, "error": self.error}


@dataclass(frozen=True)
class LiteratureReviewResult:
    per_paper_summaries: tuple[SummaryEntry, ...]
    synthesis: str
    synthesis_failed: bool
    bibliography: tuple[str, ...]


def _fitted_prompt(template: PromptTemplate, papers_text: str, budget: TokenBudget) -> str:
    overhead = estimate_tokens(template.render(papers=""))
    papers_text = truncate_to_token_budget(papers_text, budget.prompt_limit - overhead)
    return template.render(papers=papers_text)


def summarize(
    records: Sequence[PaperRecord],
    template: PromptTemplate,
    llm: LlmClient,
    budget: TokenBudget | None = None,
    parallelism: int = DEFAULT_PARALLELISM,
) -> list[SummaryEntry]:
    """One metadata-only LLM call per record, results in record order.

    A failed call yields a failure-marked entry; the others still complete.
    """
    if not records:
        raise ValidationError("cannot summarize an empty paper set")
    if parallelism < 1:
        raise ValidationError("parallelism must be >= 1")
    budget = budget or TokenBudget()
    prompts = [
        _fitted_prompt(template, compose_document_text(record), budget) for record in records
    ]

    def call(prompt: str) -> str:
        return llm.complete([{"role": "user", "content": prompt}])

    entries: list[SummaryEntry] = []
    workers = min(parallelism, len(records))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(call, prompt) for prompt in prompts]
        for record, future in zip(records, futures):
            try:
                entries.append(SummaryEntry(paper_id=record.id, text=future.result()))
            except LlmError as exc:
                logger.warning("summary call failed for %r: %s", record.id, exc)
                entries.append(
                    SummaryEntry(paper_id=record.id, text="", ok=False, error=str(exc))
                )
    return entries


def _synthesis_context(records: Sequence[PaperRecord], entries: Sequence[SummaryEntry]) -> str:
    blocks = []
    for position, (record, entry) in enumerate(zip(records, entries), start=1):
        summary = entry.text if entry.ok else "(summary unavailable)"
        blocks.append(f"{position}. {record.title}\n{summary}")
    return "\n\n".join(blocks)


def literature_review(
    records: Sequence[PaperRecord],
    templates: TemplateStore,
    llm: LlmClient,
    budget: TokenBudget | None = None,
    parallelism: int = DEFAULT_PARALLELISM,
) -> LiteratureReviewResult:
    """Summaries first, then one synthesis call whose context is the
    summaries rather than raw abstracts; bibliography from metadata."""
    if not records:
        raise ValidationError("cannot review an empty paper set")
    budget = budget or TokenBudget()
    entries = summarize(
        records, templates.get("summarize"), llm, budget=budget, parallelism=parallelism
    )
    prompt = _fitted_prompt(
        templates.get("literature_review"), _synthesis_context(records, entries), budget
    )
    synthesis = ""
    synthesis_failed = False
    try:
        synthesis = llm.complete([{"role": "user", "content": prompt}])
    except LlmError as exc:
        logger.warning("synthesis call failed: %s", exc)
        synthesis_failed = True
    bibliography = tuple(text for _, text in bibtex_entries(records))
    return LiteratureReviewResult(
        per_paper_summaries=tuple(entries),
        synthesis=synthesis,
        synthesis_failed=synthesis_failed,
        bibliography=bibliography,
    )
