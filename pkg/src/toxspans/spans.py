"""Conversion between character offsets, space-split tokens and B/I/O labels."""

from __future__ import annotations

from dataclasses import dataclass
from typing import AbstractSet, Iterable, Sequence

__all__ = [
    "B",
    "I",
    "O",
    "LABELS",
    "PUNCTUATION",
    "TokenSpan",
    "BioError",
    "tokenize",
    "label_tokens",
    "is_valid_bio",
    "repair_bio",
    "spans_from_labels",
]

B, I, O = "B", "I", "O"
LABELS = (B, I, O)

# Stripped from the edges of words (normalization) and from the end of emitted runs.
_PUNCT_CHARS = ".,!?;:'\"()"
PUNCTUATION = frozenset(_PUNCT_CHARS)


class BioError(ValueError):
    """Raised for a label sequence with I at the start or directly after O."""


@dataclass(frozen=True)
class TokenSpan:
    surface: str
    start: int
    end: int


def tokenize(text: str) -> list[TokenSpan]:
    """Split at space characters; runs of spaces produce no empty tokens."""
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos] == " ":
            pos += 1
            continue
        end = text.find(" ", pos)
        if end < 0:
            end = n
        tokens.append(TokenSpan(text[pos:end], pos, end))
        pos = end
    return tokens


def label_tokens(tokens: Sequence[TokenSpan], gold_offsets: Iterable[int]) -> list[str]:
    """A token is toxic if any of its characters is annotated.

    Consecutive toxic tokens form one run: ``B I I ...``.
    """
    gold = gold_offsets if isinstance(gold_offsets, AbstractSet) else set(gold_offsets)
    labels = []
    prev_toxic = False
    for tok in tokens:
        toxic = any(i in gold for i in range(tok.start, tok.end))
        labels.append((I if prev_toxic else B) if toxic else O)
        prev_toxic = toxic
    return labels


def is_valid_bio(labels: Sequence[str]) -> bool:
    prev = O
    for lab in labels:
        if lab not in LABELS or (lab == I and prev == O):
            return False
        prev = lab
    return True


def repair_bio(labels: Sequence[str]) -> list[str]:
    """Turn every I that starts a run (position 0 or after O) into B."""
    out = []
    prev = O
    for lab in labels:
        if lab == I and prev == O:
            lab = B
        out.append(lab)
        prev = lab
    return out


def spans_from_labels(tokens: Sequence[TokenSpan], labels: Sequence[str]) -> list[int]:
    """Character offsets covered by the toxic runs of a labelled token sequence.

    Each B/I run covers the text from the first token's start to the last
    token's end, spaces between its tokens included. Punctuation and spaces
    at the end of the run are dropped; leading punctuation is kept.
    """
    if len(tokens) != len(labels):
        raise ValueError(f"{len(tokens)} tokens but {len(labels)} labels")
    if not is_valid_bio(labels):
        raise BioError(f"invalid BIO sequence: {list(labels)}")

    offsets: list[int] = []
    run: list[TokenSpan] = []

    def emit() -> None:
        for tok in reversed(run):
            kept = tok.surface.rstrip(_PUNCT_CHARS)
            if kept:
                offsets.extend(range(run[0].start, tok.start + len(kept)))
                return

    for tok, lab in zip(tokens, labels):
        if lab == I:
            run.append(tok)
            continue
        emit()
        run = [tok] if lab == B else []
    emit()
    return offsets
