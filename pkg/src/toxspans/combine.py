"""Merging span predictions of several models."""

from __future__ import annotations

from typing import Iterable, Sequence

__all__ = ["union_spans", "union_rows"]


def union_spans(a: Iterable[int], b: Iterable[int]) -> list[int]:
    """Sorted offset-level union."""
    return sorted(set(a).union(b))


def union_rows(a: Sequence[Iterable[int]], b: Sequence[Iterable[int]]) -> list[list[int]]:
    if len(a) != len(b):
        raise ValueError(f"cannot combine {len(a)} rows with {len(b)} rows")
    return [union_spans(x, y) for x, y in zip(a, b)]
