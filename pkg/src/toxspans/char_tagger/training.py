"""Mini-batch gradient descent and span decoding for the character tagger."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..corpus_io import Corpus
from ..spans import label_tokens, repair_bio, spans_from_labels, tokenize
from .config import CharTaggerConfig
from .model import ID_LABELS, LABEL_IDS, CharTaggerModel, encode_words, forward, loss_and_gradients, pad_batch

logger = logging.getLogger(__name__)


@dataclass
class TrainingHistory:
    epoch_loss: list[float] = field(default_factory=list)


def _windows(n: int, size: int) -> list[slice]:
    return [slice(i, min(i + size, n)) for i in range(0, n, size)]


def corpus_sequences(corpus: Corpus, model: CharTaggerModel) -> list[tuple[np.ndarray, list[str]]]:
    """Encoded word windows with B/I/O targets; rows longer than ``max_words`` are cut
    into consecutive windows, empty rows are skipped."""
    seqs = []
    for row in corpus:
        tokens = tokenize(row.text)
        if not tokens:
            continue
        ids = encode_words(tokens, model.vocab, model.config)
        labels = label_tokens(tokens, row.gold_offsets)
        for w in _windows(len(tokens), model.config.max_words):
            seqs.append((ids[w], repair_bio(labels[w])))
    return seqs


def train(
    model: CharTaggerModel,
    train_set: Corpus,
    config: CharTaggerConfig | None = None,
    history: TrainingHistory | None = None,
) -> CharTaggerModel:
    """Return a trained copy of ``model``; the input model is left untouched.

    ``config`` supplies batch_size, epochs, learning_rate and seed (defaults to
    the model's own). Sentence order is reshuffled every epoch from ``seed``.
    """
    config = config or model.config
    model = model.copy()
    seqs = corpus_sequences(train_set, model)
    rng = np.random.default_rng([config.seed, 1])
    history = history if history is not None else TrainingHistory()
    for epoch in range(config.epochs):
        order = rng.permutation(len(seqs))
        losses = []
        for start in range(0, len(order), config.batch_size):
            chunk = [seqs[i] for i in order[start : start + config.batch_size]]
            loss, grads = loss_and_gradients(model, ([c[0] for c in chunk], [c[1] for c in chunk]))
            for name, g in grads.items():
                model.params[name] -= config.learning_rate * g
            losses.append(loss)
        mean_loss = float(np.mean(losses)) if losses else 0.0
        history.epoch_loss.append(mean_loss)
        logger.info("epoch %d/%d mean loss %.6f", epoch + 1, config.epochs, mean_loss)
    return model


def predict_labels_batch(model: CharTaggerModel, texts: Sequence[str], batch_size: int = 16) -> list[list[str]]:
    """Repaired argmax labels for the space-split tokens of each text."""
    windows = []  # (text index, encoded window)
    token_lists = [tokenize(t) for t in texts]
    for ti, tokens in enumerate(token_lists):
        if tokens:
            ids = encode_words(tokens, model.vocab, model.config)
            windows.extend((ti, ids[w]) for w in _windows(len(tokens), model.config.max_words))
    raw: list[list[str]] = [[] for _ in texts]
    for start in range(0, len(windows), batch_size):
        chunk = windows[start : start + batch_size]
        ids, mask = pad_batch([c[1] for c in chunk], model.config.max_word_chars)
        probs, _ = forward(ids, mask, model)
        best = probs.argmax(axis=-1)
        for row, (ti, arr) in enumerate(chunk):
            raw[ti].extend(ID_LABELS[k] for k in best[row, : len(arr)])
    return [repair_bio(r) for r in raw]


def predict_spans_batch(model: CharTaggerModel, texts: Sequence[str], batch_size: int = 16) -> list[list[int]]:
    labels = predict_labels_batch(model, texts, batch_size)
    return [spans_from_labels(tokenize(t), lab) for t, lab in zip(texts, labels)]


def predict_spans(model: CharTaggerModel, text: str) -> list[int]:
    """tokenize, encode, forward, argmax, repair I-after-O to B, emit offsets."""
    return predict_spans_batch(model, [text], batch_size=1)[0]


def token_accuracy(model: CharTaggerModel, corpus: Corpus) -> float:
    """Fraction of tokens whose predicted label equals the gold B/I/O label."""
    pred = predict_labels_batch(model, corpus.texts)
    hits = total = 0
    for row, labels in zip(corpus, pred):
        gold = label_tokens(tokenize(row.text), row.gold_offsets)
        hits += sum(a == b for a, b in zip(labels, gold))
        total += len(gold)
    return hits / total if total else 1.0


__all__ = [
    "LABEL_IDS",
    "TrainingHistory",
    "corpus_sequences",
    "train",
    "predict_labels_batch",
    "predict_spans_batch",
    "predict_spans",
    "token_accuracy",
]
