"""Exception hierarchy shared across the service."""

from __future__ import annotations


class PaperscopeError(Exception):
    """Base class for all service errors."""


class NotFoundError(PaperscopeError):
    """A referenced paper, session, set, or template does not exist."""


class ValidationError(PaperscopeError):
    """Caller-supplied arguments violate an operation's preconditions."""


class SpaceMismatchError(ValidationError):
    """Vectors from different embedding spaces were combined."""


class ConfigurationError(PaperscopeError):
    """The provider or service is misconfigured (bad auth, missing keys)."""


class ProtocolError(PaperscopeError):
    """A remote provider returned a malformed or mismatched response."""


class TransientProviderError(PaperscopeError):
    """A provider call kept failing after all retries.

    Carries the indices of the inputs in the batch that never completed.
    """

    def __init__(self, message: str, failed_indices: list[int] | None = None):
        super().__init__(message)
        self.failed_indices = failed_indices or []


class LlmError(PaperscopeError):
    """An LLM completion call failed."""


class MissingEmbeddingError(NotFoundError):
    """A paper has no vector in the requested embedding space."""

    def __init__(self, paper_id: str, space: str):
        super().__init__(f"paper {paper_id!r} has no embedding in space {space!r}")
        self.paper_id = paper_id
        self.space = space


class DegenerateSeedError(ValidationError):
    """Seed vectors cancel out; the centroid has no direction."""


class OversizeQueryError(PaperscopeError):
    """Even a context-free prompt exceeds the model's token budget."""


class InsufficientDataError(ValidationError):
    """Not enough vectors to run the requested computation."""
