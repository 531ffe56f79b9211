"""Detect paper titles in LLM output, match them against the corpus, and mark
grounded mentions actionable / ungrounded ones as potential hallucinations.

The chat system prompt instructs the LLM to wrap every paper title in double
asterisks; extraction is driven purely by that delimiter convention. Grounded
mentions become ``[[cite:<paper_id>|<title>]]``, ungrounded ones
``[[unverified|<title>]]`` — the markup grammar the web UI consumes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .corpus import CorpusStore, tokenize

ACCEPT_THRESHOLD = 0.8

_MENTION_RE = re.compile(r"\*\*([^*]+?)\*\*")
_CITE_RE = re.compile(r"\[\[cite:[^|\]]+\|([^\]]*)\]\]")
_UNVERIFIED_RE = re.compile(r"\[\[unverified\|([^\]]*)\]\]")


@dataclass
class CitationMention:
    surface_text: str
    start: int  # span includes the ** delimiters
    end: int
    matched_id: str | None = None
    match_score: float = 0.0


@dataclass
class GroundingReport:
    mentions: list[CitationMention] = field(default_factory=list)

    @property
    def ungrounded_count(self) -> int:
        return sum(1 for m in self.mentions if m.matched_id is None)

    @property
    def grounded_count(self) -> int:
        return sum(1 for m in self.mentions if m.matched_id is not None)


def extract_mentions(response_text: str) -> list[CitationMention]:
    """Candidate titles: non-overlapping **...** spans, in order."""
    return [
        CitationMention(surface_text=m.group(1), start=m.start(), end=m.end())
        for m in _MENTION_RE.finditer(response_text)
    ]


class TitleMatcher:
    """Normalized-title lookup over a corpus, built once and reused.

    Exact normalized match scores 1.0; otherwise the best token-set Jaccard
    against all titles, accepted only at >= 0.8 — a near-miss stays
    unverified rather than risking a false grounding.
    """

    def __init__(self, corpus: CorpusStore, accept_threshold: float = ACCEPT_THRESHOLD):
        self.accept_threshold = accept_threshold
        self._exact: dict[str, str] = {}
        self._token_sets: list[tuple[str, frozenset[str]]] = []
        for record in corpus.records():
            tokens = tokenize(record.title)
            normalized = " ".join(tokens)
            # Same normalized title may recur across years; keep the smallest id.
            if normalized not in self._exact or record.id < self._exact[normalized]:
                self._exact[normalized] = record.id
            self._token_sets.append((record.id, frozenset(tokens)))
        self._token_sets.sort()

    def match(self, surface: str) -> tuple[str | None, float]:
        tokens = tokenize(surface)
        normalized = " ".join(tokens)
        exact = self._exact.get(normalized)
        if exact is not None:
            return exact, 1.0
        surface_set = frozenset(tokens)
        if not surface_set:
            return None, 0.0
        best_id, best_score = None, 0.0
        for paper_id, title_set in self._token_sets:
            union = len(surface_set | title_set)
            if union == 0:
                continue
            score = len(surface_set & title_set) / union
            if score > best_score:
                best_id, best_score = paper_id, score
        if best_score >= self.accept_threshold:
            return best_id, best_score
        return None, best_score


def match_title(surface: str, corpus: CorpusStore) -> tuple[str | None, float]:
    return TitleMatcher(corpus).match(surface)


def annotate(
    response_text: str, matcher: TitleMatcher | CorpusStore
) -> tuple[str, GroundingReport]:
    """Rewrite delimited titles as cite/unverified markup; all other text is
    byte-identical. Idempotent: markup spans contain no ** and are skipped."""
    if isinstance(matcher, CorpusStore):
        matcher = TitleMatcher(matcher)
    report = GroundingReport()
    pieces: list[str] = []
    cursor = 0
    for mention in extract_mentions(response_text):
        matched_id, score = matcher.match(mention.surface_text)
        if matched_id is not None and score >= matcher.accept_threshold:
            mention.matched_id = matched_id
            mention.match_score = score
            markup = f"[[cite:{matched_id}|{mention.surface_text}]]"
        else:
            mention.match_score = score
            markup = f"[[unverified|{mention.surface_text}]]"
        pieces.append(response_text[cursor : mention.start])
        pieces.append(markup)
        cursor = mention.end
        report.mentions.append(mention)
    pieces.append(response_text[cursor:])
    return "".join(pieces), report


def strip_markup(marked_text: str) -> str:
    """Invert annotate: restore the raw delimited response byte-for-byte."""
    restored = _CITE_RE.sub(lambda m: f"**{m.group(1)}**", marked_text)
    return _UNVERIFIED_RE.sub(lambda m: f"**{m.group(1)}**", restored)
