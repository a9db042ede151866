"""Bag-of-words toxic-word dictionary and threshold tagger."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, TextIO

from .corpus_io import Corpus
from .spans import PUNCTUATION, TokenSpan, label_tokens, spans_from_labels, tokenize

__all__ = [
    "DictionaryEntry",
    "ToxicDictionary",
    "TaggerParams",
    "MASK_CHARS",
    "normalize_word",
    "build_dictionary",
    "merge_dictionaries",
    "top_k_by_frequency",
    "select_toxic_words",
    "is_bleeped",
    "bow_tag",
    "tag_tokens",
    "write_dictionary",
    "parse_dictionary",
    "read_dictionary",
]

MASK_CHARS = frozenset("*#$%@")
_EDGE = "".join(sorted(PUNCTUATION))


@dataclass(frozen=True)
class DictionaryEntry:
    word: str
    total_freq: int
    toxic_freq: int

    def __post_init__(self) -> None:
        if self.total_freq < 1 or not 0 <= self.toxic_freq <= self.total_freq:
            raise ValueError(
                f"bad counts for {self.word!r}: total={self.total_freq} toxic={self.toxic_freq}"
            )

    @property
    def toxicity_ratio(self) -> float:
        return self.toxic_freq / self.total_freq

    def frequency(self, basis: str = "toxic") -> int:
        """Count used for thresholds and ranking: toxic occurrences (default) or all."""
        if basis == "toxic":
            return self.toxic_freq
        if basis == "total":
            return self.total_freq
        raise ValueError(f"unknown frequency basis {basis!r}")


@dataclass(frozen=True)
class ToxicDictionary:
    entries: Mapping[str, DictionaryEntry] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for key, entry in self.entries.items():
            if key != entry.word:
                raise ValueError(f"key {key!r} does not match entry word {entry.word!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def __getitem__(self, word: str) -> DictionaryEntry:
        return self.entries[word]

    @classmethod
    def from_counts(cls, total: Mapping[str, int], toxic: Mapping[str, int]) -> "ToxicDictionary":
        return cls({w: DictionaryEntry(w, n, toxic.get(w, 0)) for w, n in sorted(total.items())})


@dataclass(frozen=True)
class TaggerParams:
    min_freq: int
    min_ratio: float

    def __post_init__(self) -> None:
        if self.min_freq < 0:
            raise ValueError("min_freq must be non-negative")
        if self.min_ratio < 0:
            raise ValueError("min_ratio must be non-negative")


def normalize_word(surface: str) -> str:
    """Lowercase and strip edge punctuation; interior characters are kept."""
    return surface.lower().strip(_EDGE)


def _count_row(text: str, gold: Iterable[int], total: Counter, toxic: Counter) -> None:
    tokens = tokenize(text)
    for tok, lab in zip(tokens, label_tokens(tokens, gold)):
        word = normalize_word(tok.surface)
        if not word:
            continue
        total[word] += 1
        if lab != "O":
            toxic[word] += 1


def build_dictionary(train: Corpus) -> ToxicDictionary:
    """Count every normalized word, and how often it sat in a toxic token.

    Counting is per occurrence, not per row.
    """
    total: Counter = Counter()
    toxic: Counter = Counter()
    for row in train:
        _count_row(row.text, row.gold_offsets, total, toxic)
    return ToxicDictionary.from_counts(total, toxic)


def merge_dictionaries(parts: Iterable[ToxicDictionary]) -> ToxicDictionary:
    """Sum the counts of dictionaries built from disjoint row sets."""
    total: Counter = Counter()
    toxic: Counter = Counter()
    for part in parts:
        for w, e in part.entries.items():
            total[w] += e.total_freq
            toxic[w] += e.toxic_freq
    return ToxicDictionary.from_counts(total, toxic)


def _as_fraction(ratio: float) -> Fraction:
    # shortest decimal repr, so 0.7 compares as exactly 7/10
    return Fraction(repr(float(ratio)))


def _ratio_at_least(entry: DictionaryEntry, min_ratio: Fraction) -> bool:
    return entry.toxic_freq * min_ratio.denominator >= min_ratio.numerator * entry.total_freq


def top_k_by_frequency(
    d: ToxicDictionary, k: int, min_ratio: float = 0.0, basis: str = "toxic"
) -> list[DictionaryEntry]:
    """Most frequent entries whose ratio reaches ``min_ratio``; ties alphabetical.

    Words never annotated toxic are not toxic words and are always left out.
    """
    threshold = _as_fraction(min_ratio)
    eligible = [e for e in d.entries.values() if e.toxic_freq > 0 and _ratio_at_least(e, threshold)]
    eligible.sort(key=lambda e: (-e.frequency(basis), e.word))
    return eligible[: max(k, 0)]


def select_toxic_words(d: ToxicDictionary, params: TaggerParams, basis: str = "toxic") -> frozenset[str]:
    """Words whose frequency reaches ``min_freq`` and ratio reaches ``min_ratio``.

    Both thresholds are inclusive. The frequency is the number of toxic
    occurrences unless ``basis="total"``.
    """
    threshold = _as_fraction(params.min_ratio)
    return frozenset(
        w
        for w, e in d.entries.items()
        if e.frequency(basis) >= params.min_freq and _ratio_at_least(e, threshold)
    )


def is_bleeped(surface: str, mask_chars: frozenset[str] = MASK_CHARS) -> bool:
    """Masked profanity: a mask character plus a letter, or two or more mask characters."""
    n_mask = sum(ch in mask_chars for ch in surface)
    if n_mask == 0:
        return False
    return n_mask >= 2 or any(ch.isalpha() for ch in surface)


def tag_tokens(
    tokens: list[TokenSpan],
    words: frozenset[str],
    mask_chars: frozenset[str] | None = MASK_CHARS,
) -> list[int]:
    """Offsets of tokens whose normalized form is in ``words`` or that are bleeped.

    Pass ``mask_chars=None`` to disable the bleep rule.
    """
    labels = []
    prev_toxic = False
    for tok in tokens:
        toxic = normalize_word(tok.surface) in words or (
            mask_chars is not None and is_bleeped(tok.surface, mask_chars)
        )
        labels.append(("I" if prev_toxic else "B") if toxic else "O")
        prev_toxic = toxic
    return spans_from_labels(tokens, labels)


def bow_tag(
    text: str,
    d: ToxicDictionary,
    params: TaggerParams,
    mask_chars: frozenset[str] | None = MASK_CHARS,
    basis: str = "toxic",
) -> list[int]:
    """Offsets the tagger marks toxic in ``text``: selected dictionary words plus bleeped words."""
    return tag_tokens(tokenize(text), select_toxic_words(d, params, basis), mask_chars)


def write_dictionary(d: ToxicDictionary, sink: TextIO) -> None:
    """``word,total_freq,toxic_freq`` rows under a header, most frequent first."""
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(["word", "total_freq", "toxic_freq"])
    for e in sorted(d.entries.values(), key=lambda e: (-e.total_freq, e.word)):
        writer.writerow([e.word, e.total_freq, e.toxic_freq])


def parse_dictionary(content: str) -> ToxicDictionary:
    reader = csv.reader(io.StringIO(content, newline=""))
    header = next(reader, None)
    if header != ["word", "total_freq", "toxic_freq"]:
        raise ValueError(f"unexpected dictionary header: {header}")
    entries = {}
    for i, rec in enumerate(reader):
        if not rec:
            continue
        if len(rec) != 3:
            raise ValueError(f"dictionary line {i}: expected 3 fields")
        word = rec[0]
        if word in entries:
            raise ValueError(f"dictionary line {i}: duplicate word {word!r}")
        entries[word] = DictionaryEntry(word, int(rec[1]), int(rec[2]))
    return ToxicDictionary(entries)


def read_dictionary(path) -> ToxicDictionary:
    with open(path, encoding="utf-8", newline="") as f:
        return parse_dictionary(f.read())
