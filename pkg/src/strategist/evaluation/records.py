"""Benchmark manifest records and their JSON-lines reader."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from strategist.errors import InvalidInput
from strategist.pipeline.models import PicoElements


class ManifestError(InvalidInput):
    def __init__(self, path: str | Path, line: int, message: str) -> None:
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class ReviewRecord(BaseModel):
    model_config = ConfigDict(frozen=True, extra="ignore")

    review_id: str = Field(min_length=1)
    title: str = Field(min_length=1)
    abstract: str = ""
    included_pmids: tuple[str, ...] = Field(min_length=1)
    pub_year: int = Field(ge=1900, le=2100)
    external_pico: PicoElements | None = None

    @field_validator("review_id", mode="before")
    @classmethod
    def _id_text(cls, v: Any) -> Any:
        return str(v) if isinstance(v, int) else v

    @field_validator("abstract", mode="before")
    @classmethod
    def _abstract(cls, v: Any) -> Any:
        return "" if v is None else v

    @field_validator("included_pmids", mode="before")
    @classmethod
    def _pmids(cls, v: Any) -> Any:
        if isinstance(v, (list, tuple, set, frozenset)):
            return tuple(dict.fromkeys(str(x).strip() for x in v if str(x).strip()))
        return v

    @property
    def included(self) -> frozenset[str]:
        return frozenset(self.included_pmids)


def parse_manifest_lines(lines: Iterable[str], source: str | Path = "<manifest>") -> list[ReviewRecord]:
    records: list[ReviewRecord] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            record = ReviewRecord.model_validate(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ManifestError(source, lineno, f"invalid JSON: {exc.msg}") from exc
        except ValidationError as exc:
            first = exc.errors(include_url=False)[0]
            where = ".".join(str(p) for p in first["loc"])
            raise ManifestError(source, lineno, f"{where}: {first['msg']}") from exc
        if record.review_id in seen:
            raise ManifestError(source, lineno, f"duplicate review_id {record.review_id!r}")
        seen.add(record.review_id)
        records.append(record)
    return records


def load_manifest(path: str | Path) -> list[ReviewRecord]:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_manifest_lines(fh, path)
    except OSError as exc:
        raise ManifestError(path, 0, f"cannot read manifest: {exc.strerror}") from exc


def write_manifest(records: Iterable[ReviewRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.model_dump(mode="json", exclude_none=True), ensure_ascii=False) + "\n")
