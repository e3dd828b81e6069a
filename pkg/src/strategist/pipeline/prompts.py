"""Versioned prompt templates shipped under ``strategist/prompts/<version>/``.

Each stage has a ``<stage>.system.txt`` and a ``<stage>.user.txt``. Templates
use ``{name}`` placeholders; any other braces (JSON examples) pass through.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from strategist.errors import InvalidInput

PROMPT_VERSION = "v1"
STAGES = ("objective", "pico", "concepts", "keywords", "query_review")
_PLACEHOLDER = re.compile(r"\{([a-z_]+)\}")


@dataclass(frozen=True)
class PromptTemplate:
    stage: str
    system: str
    user: str

    def render(self, **values: str) -> tuple[str, str]:
        return _fill(self.system, values, self.stage), _fill(self.user, values, self.stage)


def _fill(template: str, values: dict[str, str], stage: str) -> str:
    def sub(m: re.Match[str]) -> str:
        try:
            return values[m.group(1)]
        except KeyError:
            raise InvalidInput(f"prompt {stage!r} needs a value for {{{m.group(1)}}}") from None

    return _PLACEHOLDER.sub(sub, template)


@lru_cache(maxsize=None)
def load_templates(version: str = PROMPT_VERSION, directory: str | None = None) -> dict[str, PromptTemplate]:
    """Read every stage template; ``directory`` overrides the packaged set."""
    root = Path(directory) if directory else resources.files("strategist") / "prompts" / version
    out = {}
    for stage in STAGES:
        try:
            system = (root / f"{stage}.system.txt").read_text(encoding="utf-8")
            user = (root / f"{stage}.user.txt").read_text(encoding="utf-8")
        except FileNotFoundError as exc:
            raise InvalidInput(f"missing prompt template for stage {stage!r}: {exc.filename}") from None
        out[stage] = PromptTemplate(stage, system.strip(), user.strip())
    return out
