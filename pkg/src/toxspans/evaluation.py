"""Per-post character-offset F1 and threshold grid searches."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

import numpy as np

from .bow import MASK_CHARS, TaggerParams, ToxicDictionary, build_dictionary, select_toxic_words, tag_tokens
from .combine import union_spans
from .corpus_io import Corpus
from .spans import tokenize

__all__ = [
    "EvalResult",
    "GridResult",
    "DEFAULT_FREQ_AXIS",
    "DEFAULT_RATIO_AXIS",
    "instance_f1",
    "evaluate",
    "grid_search",
    "grid_search_combined",
    "parse_grid_csv",
]

DEFAULT_FREQ_AXIS = (1, 10, 20, 40, 80, 160)
DEFAULT_RATIO_AXIS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


def instance_f1(pred: Iterable[int], gold: Iterable[int]) -> float:
    """F1 between two offset sets; two empty sets score 1, one empty set scores 0."""
    pred = set(pred)
    gold = set(gold)
    if not pred and not gold:
        return 1.0
    if not pred or not gold:
        return 0.0
    return 2 * len(pred & gold) / (len(pred) + len(gold))


@dataclass(frozen=True)
class EvalResult:
    per_row_f1: tuple[float, ...]
    mean_f1: float

    @property
    def percent(self) -> str:
        return f"{100 * self.mean_f1:.2f}"


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def evaluate(preds: Sequence[Iterable[int]], corpus: Corpus) -> EvalResult:
    if len(preds) != len(corpus):
        raise ValueError(f"{len(preds)} predictions for {len(corpus)} rows")
    scores = tuple(instance_f1(p, row.gold_offsets) for p, row in zip(preds, corpus))
    return EvalResult(scores, _mean(scores))


@dataclass(frozen=True)
class GridResult:
    freq_axis: tuple[int, ...]
    ratio_axis: tuple[float, ...]
    f1_matrix: np.ndarray  # rows follow freq_axis, columns ratio_axis

    def __post_init__(self) -> None:
        m = np.asarray(self.f1_matrix, dtype=np.float64)
        if m.shape != (len(self.freq_axis), len(self.ratio_axis)):
            raise ValueError(f"matrix shape {m.shape} does not match axes")
        object.__setattr__(self, "f1_matrix", m)

    def best(self) -> tuple[int, float, float]:
        """(min_freq, min_ratio, f1) of the best cell; first in row-major order on ties."""
        i, j = np.unravel_index(int(np.argmax(self.f1_matrix)), self.f1_matrix.shape)
        return self.freq_axis[i], self.ratio_axis[j], float(self.f1_matrix[i, j])

    def write_csv(self, sink: TextIO) -> None:
        """Frequencies as row labels, ratios as column headers."""
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(["min_freq"] + [repr(float(r)) for r in self.ratio_axis])
        for f, row in zip(self.freq_axis, self.f1_matrix):
            writer.writerow([f] + [repr(float(v)) for v in row])


def parse_grid_csv(content: str) -> GridResult:
    rows = [r for r in csv.reader(io.StringIO(content, newline="")) if r]
    if not rows or rows[0][0] != "min_freq":
        raise ValueError("grid CSV must start with a 'min_freq' header")
    ratios = tuple(float(v) for v in rows[0][1:])
    freqs = tuple(int(r[0]) for r in rows[1:])
    matrix = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=np.float64)
    return GridResult(freqs, ratios, matrix.reshape(len(freqs), len(ratios)))


# Worker state for the grid; set once per process so rows are not re-pickled per cell.
_STATE: dict = {}


def _init_state(dictionary, eval_tokens, golds, fixed, mask_chars, basis) -> None:
    _STATE.update(
        dictionary=dictionary, eval_tokens=eval_tokens, golds=golds, fixed=fixed, mask_chars=mask_chars, basis=basis
    )


def _grid_row(freq: int, ratios: Sequence[float]) -> list[float]:
    st = _STATE
    out = []
    for ratio in ratios:
        words = select_toxic_words(st["dictionary"], TaggerParams(freq, ratio), st["basis"])
        scores = []
        for i, (tokens, gold) in enumerate(zip(st["eval_tokens"], st["golds"])):
            pred = tag_tokens(tokens, words, st["mask_chars"])
            if st["fixed"] is not None:
                pred = union_spans(pred, st["fixed"][i])
            scores.append(instance_f1(pred, gold))
        out.append(_mean(scores))
    return out


def _run_grid(
    dictionary: ToxicDictionary,
    eval_set: Corpus,
    fixed: Sequence[Iterable[int]] | None,
    freq_axis: Sequence[int],
    ratio_axis: Sequence[float],
    workers: int,
    mask_chars,
    basis: str,
) -> GridResult:
    freq_axis = tuple(int(f) for f in freq_axis)
    ratio_axis = tuple(float(r) for r in ratio_axis)
    if not freq_axis or not ratio_axis:
        raise ValueError("grid axes must be nonempty")
    state = (
        dictionary,
        [tokenize(row.text) for row in eval_set],
        [frozenset(row.gold_offsets) for row in eval_set],
        None if fixed is None else [tuple(p) for p in fixed],
        mask_chars,
        basis,
    )
    if workers <= 1:
        saved = dict(_STATE)
        _init_state(*state)
        try:
            rows = [_grid_row(f, ratio_axis) for f in freq_axis]
        finally:
            _STATE.clear()
            _STATE.update(saved)
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_state, initargs=state) as pool:
            rows = list(pool.map(_grid_row, freq_axis, [ratio_axis] * len(freq_axis)))
    return GridResult(freq_axis, ratio_axis, np.array(rows, dtype=np.float64))


def grid_search(
    train: Corpus,
    eval_set: Corpus,
    freq_axis: Sequence[int] = DEFAULT_FREQ_AXIS,
    ratio_axis: Sequence[float] = DEFAULT_RATIO_AXIS,
    workers: int = 1,
    mask_chars=MASK_CHARS,
    dictionary: ToxicDictionary | None = None,
    basis: str = "toxic",
) -> GridResult:
    """Mean F1 of the BoW tagger on ``eval_set`` for every threshold pair.

    The dictionary is built from ``train`` once and shared by all cells.
    The matrix does not depend on ``workers``.
    """
    if dictionary is None:
        dictionary = build_dictionary(train)
    return _run_grid(dictionary, eval_set, None, freq_axis, ratio_axis, workers, mask_chars, basis)


def grid_search_combined(
    train: Corpus,
    eval_set: Corpus,
    fixed_preds: Sequence[Iterable[int]],
    freq_axis: Sequence[int] = DEFAULT_FREQ_AXIS,
    ratio_axis: Sequence[float] = DEFAULT_RATIO_AXIS,
    workers: int = 1,
    mask_chars=MASK_CHARS,
    dictionary: ToxicDictionary | None = None,
    basis: str = "toxic",
) -> GridResult:
    """Like :func:`grid_search`, scoring the union of BoW output and ``fixed_preds``."""
    if len(fixed_preds) != len(eval_set):
        raise ValueError(f"{len(fixed_preds)} fixed predictions for {len(eval_set)} rows")
    if dictionary is None:
        dictionary = build_dictionary(train)
    return _run_grid(dictionary, eval_set, fixed_preds, freq_axis, ratio_axis, workers, mask_chars, basis)
