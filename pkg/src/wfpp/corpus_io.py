"""Streaming manifest I/O for image-text pairs (JSONL and TSV)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from wfpp.errors import ConfigError, FormatError

FORMATS = ("jsonl", "tsv")


@dataclass(frozen=True)
class PairRecord:
    """One image-text pair; index is the 0-based source line position."""

    index: int
    image_ref: str
    caption: str


@dataclass
class SkipReport:
    """Malformed lines encountered while reading a manifest."""

    skipped: list[dict] = field(default_factory=list)
    total_lines: int = 0

    def add(self, err: FormatError):
        self.skipped.append({"line": err.line, "reason": err.reason})

    def to_dict(self) -> dict:
        return {"skipped": self.skipped, "total_lines": self.total_lines}

    def write(self, path: str):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, indent=2)
            fh.write("\n")


def escape_tsv(value: str) -> str:
    """Escape backslash, tab, newline so a field stays on one line."""
    return (
        value.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def unescape_tsv(value: str) -> str:
    if "\\" not in value:
        return value
    out = []
    i = 0
    n = len(value)
    while i < n:
        ch = value[i]
        if ch == "\\" and i + 1 < n:
            nxt = value[i + 1]
            if nxt == "\\":
                out.append("\\")
            elif nxt == "t":
                out.append("\t")
            elif nxt == "n":
                out.append("\n")
            elif nxt == "r":
                out.append("\r")
            else:
                out.append(ch)
                out.append(nxt)
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _parse_jsonl(line: str, lineno: int) -> tuple[str, str]:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise FormatError(lineno, f"invalid JSON: {e.msg}") from e
    if not isinstance(obj, dict):
        raise FormatError(lineno, "JSON value is not an object")
    image = obj.get("image")
    text = obj.get("text")
    if not isinstance(image, str):
        raise FormatError(lineno, 'missing or non-string "image" field')
    if not isinstance(text, str):
        raise FormatError(lineno, 'missing or non-string "text" field')
    return image, text


def _parse_tsv(line: str, lineno: int) -> tuple[str, str]:
    parts = line.split("\t")
    if len(parts) != 2:
        raise FormatError(lineno, f"expected 2 tab-separated fields, got {len(parts)}")
    return unescape_tsv(parts[0]), unescape_tsv(parts[1])


class ManifestReader:
    """Iterates PairRecords from a manifest file, collecting skipped lines.

    Skipped lines still consume an index so that downstream sidecars align
    with source line numbers. Iterate fully before consulting skip_report.
    """

    def __init__(self, path: str, format: str):
        if format not in FORMATS:
            raise ConfigError(f"unknown manifest format {format!r}")
        self.path = path
        self.format = format
        self.skip_report = SkipReport()

    def __iter__(self) -> Iterator[PairRecord]:
        parse = _parse_jsonl if self.format == "jsonl" else _parse_tsv
        lineno = 0
        with open(self.path, "r", encoding="utf-8", newline="\n") as fh:
            for line in fh:
                lineno += 1
                self.skip_report.total_lines = lineno
                line = line.rstrip("\n")
                try:
                    image_ref, caption = parse(line, lineno)
                except FormatError as err:
                    self.skip_report.add(err)
                    continue
                yield PairRecord(index=lineno - 1, image_ref=image_ref, caption=caption)


def read_manifest(path: str, format: str) -> Iterator[PairRecord]:
    """Stream records from a manifest, silently skipping malformed lines."""
    return iter(ManifestReader(path, format))


def format_record(record: PairRecord, format: str) -> str:
    if format == "jsonl":
        return json.dumps(
            {"image": record.image_ref, "text": record.caption}, ensure_ascii=False
        )
    return f"{escape_tsv(record.image_ref)}\t{escape_tsv(record.caption)}"


def write_manifest(records: Iterable[PairRecord], path: str, format: str) -> int:
    """Write records one per line; returns the number written."""
    if format not in FORMATS:
        raise ConfigError(f"unknown manifest format {format!r}")
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(format_record(record, format))
            fh.write("\n")
            count += 1
    return count
