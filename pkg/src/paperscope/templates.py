"""Editable prompt templates with placeholder validation."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import NotFoundError, ValidationError

# Placeholders each template must keep so the runtime can substitute into it.
REQUIRED_PLACEHOLDERS: dict[str, tuple[str, ...]] = {
    "chat_system": (),
    "condense": ("{history}",),
    "summarize": ("{papers}",),
    "literature_review": ("{papers}",),
}


def load_default_templates() -> dict[str, str]:
    raw = resources.files("paperscope").joinpath("default_templates.json").read_text("utf-8")
    return json.loads(raw)


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    text: str
    is_default: bool

    def render(self, **fields: str) -> str:
        out = self.text
        for key, value in fields.items():
            out = out.replace("{" + key + "}", value)
        return out


class TemplateStore:
    """Named templates with defaults, user overrides, and optional persistence.

    Overrides are stored as a plain ``{name: text}`` JSON object so edits
    survive restarts without touching the packaged defaults.
    """

    def __init__(self, persist_path: Path | None = None):
        self._defaults = load_default_templates()
        self._overrides: dict[str, str] = {}
        self._persist_path = Path(persist_path) if persist_path else None
        if self._persist_path and self._persist_path.exists():
            data = json.loads(self._persist_path.read_text("utf-8"))
            for name, text in data.items():
                if name in self._defaults:
                    self._check(name, text)
                    self._overrides[name] = text

    def names(self) -> list[str]:
        return sorted(self._defaults)

    def get(self, name: str) -> PromptTemplate:
        if name not in self._defaults:
            raise NotFoundError(f"unknown template: {name!r}")
        if name in self._overrides:
            return PromptTemplate(name, self._overrides[name], is_default=False)
        return PromptTemplate(name, self._defaults[name], is_default=True)

    def set(self, name: str, text: str) -> PromptTemplate:
        if name not in self._defaults:
            raise NotFoundError(f"unknown template: {name!r}")
        self._check(name, text)
        self._overrides[name] = text
        self._persist()
        return self.get(name)

    def reset(self, name: str) -> PromptTemplate:
        if name not in self._defaults:
            raise NotFoundError(f"unknown template: {name!r}")
        self._overrides.pop(name, None)
        self._persist()
        return self.get(name)

    def _check(self, name: str, text: str) -> None:
        if not text.strip():
            raise ValidationError(f"template {name!r} must not be empty")
        missing = [p for p in REQUIRED_PLACEHOLDERS[name] if p not in text]
        if missing:
            raise ValidationError(
                f"template {name!r} must contain placeholder(s): {', '.join(missing)}"
            )

    def _persist(self) -> None:
        if self._persist_path is None:
            return
        self._persist_path.parent.mkdir(parents=True, exist_ok=True)
        payload = json.dumps(self._overrides, indent=2, sort_keys=True)
        self._persist_path.write_text(payload + "\n", "utf-8")
