"""CSV dataset parsing, validation and splitting.

Offsets everywhere in this package are **code-point indices** into the
Python ``str``: the dataset annotates Unicode scalar values, not UTF-8
bytes, so ``text[i]`` is the character an offset refers to.
"""

from __future__ import annotations

import csv
import io
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, TextIO

__all__ = [
    "AnnotatedText",
    "Corpus",
    "CorpusFormatError",
    "SchemaError",
    "SpanParseError",
    "OffsetRangeError",
    "DuplicateOffsetWarning",
    "parse_span_list",
    "format_span_list",
    "parse_dataset",
    "read_dataset",
    "split_corpus",
    "write_corpus",
    "write_predictions",
    "parse_predictions",
    "read_predictions",
    "predictions_by_row",
]


class CorpusFormatError(ValueError):
    """Base class for problems with an input CSV."""


class SchemaError(CorpusFormatError):
    pass


class SpanParseError(CorpusFormatError):
    pass


class OffsetRangeError(CorpusFormatError):
    pass


class DuplicateOffsetWarning(UserWarning):
    pass


@dataclass(frozen=True)
class AnnotatedText:
    """One dataset row: the raw text and its gold toxic character offsets."""

    text: str
    gold_offsets: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        offsets = tuple(self.gold_offsets)
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise ValueError("gold_offsets must be strictly increasing")
        if offsets and (offsets[0] < 0 or offsets[-1] >= len(self.text)):
            raise ValueError("gold offset outside text")
        object.__setattr__(self, "gold_offsets", offsets)


@dataclass(frozen=True)
class Corpus:
    rows: tuple[AnnotatedText, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(self.rows))

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[AnnotatedText]:
        return iter(self.rows)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Corpus(self.rows[i])
        return self.rows[i]

    @property
    def texts(self) -> list[str]:
        return [r.text for r in self.rows]

    @property
    def golds(self) -> list[tuple[int, ...]]:
        return [r.gold_offsets for r in self.rows]


_SPAN_LIST = re.compile(r"\s*\[\s*((?:\d+\s*(?:,\s*\d+\s*)*)?)\]\s*\Z")


def parse_span_list(field_value: str, row: int | None = None) -> tuple[int, ...]:
    """Parse ``"[1, 2, 3]"`` into a sorted, duplicate-free tuple.

    Whitespace between items is ignored. Duplicates are dropped with a
    :class:`DuplicateOffsetWarning`.
    """
    where = f" in data row {row}" if row is not None else ""
    m = _SPAN_LIST.match(field_value)
    if m is None:
        raise SpanParseError(f"malformed span list{where}: {field_value!r}")
    body = m.group(1).strip()
    values = [int(v) for v in body.split(",")] if body else []
    unique = sorted(set(values))
    if len(unique) != len(values):
        warnings.warn(f"duplicate offsets dropped{where}", DuplicateOffsetWarning, stacklevel=2)
    return tuple(unique)


def format_span_list(offsets: Iterable[int]) -> str:
    return "[" + ", ".join(str(int(o)) for o in offsets) + "]"


def parse_dataset(file_content: str, require_spans: bool = True) -> Corpus:
    """Parse the task CSV (header ``spans,text``) into a :class:`Corpus`.

    With ``require_spans=False`` a file holding only a ``text`` column is
    accepted and every row gets an empty gold set.
    """
    reader = csv.reader(io.StringIO(file_content, newline=""))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty file: missing header row") from None
    header = [h.strip().lstrip("﻿") for h in header]
    if "text" not in header:
        raise SchemaError(f"missing column 'text' (header: {header})")
    if "spans" not in header and require_spans:
        raise SchemaError(f"missing column 'spans' (header: {header})")
    text_col = header.index("text")
    span_col = header.index("spans") if "spans" in header else None

    rows = []
    for i, record in enumerate(reader):
        if not record:
            continue
        if len(record) != len(header):
            raise SchemaError(f"data row {i}: expected {len(header)} fields, got {len(record)}")
        text = record[text_col]
        offsets = parse_span_list(record[span_col], row=i) if span_col is not None else ()
        if offsets and offsets[-1] >= len(text):
            raise OffsetRangeError(
                f"data row {i}: offset {offsets[-1]} >= text length {len(text)}"
            )
        rows.append(AnnotatedText(text, offsets))
    return Corpus(tuple(rows))


def read_dataset(path, require_spans: bool = True) -> Corpus:
    with open(path, encoding="utf-8", newline="") as f:
        return parse_dataset(f.read(), require_spans=require_spans)


def split_corpus(corpus: Corpus, train_size: int) -> tuple[Corpus, Corpus]:
    """First ``train_size`` rows, then the rest, in file order."""
    if not 0 <= train_size <= len(corpus):
        raise IndexError(f"train_size {train_size} outside [0, {len(corpus)}]")
    return Corpus(corpus.rows[:train_size]), Corpus(corpus.rows[train_size:])


def write_corpus(corpus: Corpus, sink: TextIO) -> None:
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(["spans", "text"])
    for row in corpus:
        writer.writerow([format_span_list(row.gold_offsets), row.text])


def write_predictions(rows: Iterable[tuple[int, Iterable[int]]], sink: TextIO) -> None:
    """Write ``id,"[o1, o2, ...]"`` lines, one per row, no header."""
    writer = csv.writer(sink, quoting=csv.QUOTE_NONNUMERIC, lineterminator="\n")
    for row_id, offsets in rows:
        offsets = list(offsets)
        if any(b <= a for a, b in zip(offsets, offsets[1:])):
            raise ValueError(f"row {row_id}: offsets must be sorted ascending")
        writer.writerow([int(row_id), format_span_list(offsets)])


def parse_predictions(content: str) -> list[tuple[int, tuple[int, ...]]]:
    out = []
    for i, record in enumerate(csv.reader(io.StringIO(content, newline=""))):
        if not record:
            continue
        if len(record) != 2:
            raise SchemaError(f"prediction line {i}: expected 2 fields, got {len(record)}")
        try:
            row_id = int(float(record[0]))
        except ValueError:
            raise SchemaError(f"prediction line {i}: bad row id {record[0]!r}") from None
        out.append((row_id, parse_span_list(record[1], row=i)))
    return out


def read_predictions(path) -> list[tuple[int, tuple[int, ...]]]:
    with open(path, encoding="utf-8", newline="") as f:
        return parse_predictions(f.read())


def predictions_by_row(
    rows: Sequence[tuple[int, tuple[int, ...]]], n_rows: int
) -> list[tuple[int, ...]]:
    """Align id-keyed predictions to corpus order; every id in [0, n_rows) exactly once."""
    aligned: list[tuple[int, ...] | None] = [None] * n_rows
    for row_id, offsets in rows:
        if not 0 <= row_id < n_rows:
            raise ValueError(f"prediction id {row_id} outside [0, {n_rows})")
        if aligned[row_id] is not None:
            raise ValueError(f"duplicate prediction id {row_id}")
        aligned[row_id] = offsets
    missing = [i for i, a in enumerate(aligned) if a is None]
    if missing:
        raise ValueError(f"{len(missing)} rows have no prediction (first: {missing[0]})")
    return aligned  # type: ignore[return-value]
