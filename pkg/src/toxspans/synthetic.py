"""Seeded synthetic corpora with planted toxic vocabulary, for tests and demos."""

from __future__ import annotations

import numpy as np

from .corpus_io import AnnotatedText, Corpus

NEUTRAL = (
    "the a this that people government article policy vote city council think "
    "really just about would should never always money tax school road plan "
    "good new year time work law court state news story"
).split()

# word -> probability an occurrence is annotated toxic
TOXIC = {
    "stupid": 0.8,
    "idiot": 0.85,
    "idiots": 0.8,
    "moron": 0.7,
    "pathetic": 0.55,
    "crap": 0.45,
    "dumb": 0.6,
    "fool": 0.5,
    "liar": 0.35,
    "clown": 0.3,
}

_TRAILING = ("",) * 8 + (".", ",", "!", "?")


def make_corpus(
    n_rows: int,
    seed: int = 0,
    toxic_words: dict[str, float] | None = None,
    toxic_rate: float = 0.25,
    min_words: int = 4,
    max_words: int = 14,
    tail_rate: float = 0.15,
    tail_size: int = 300,
) -> Corpus:
    """Rows of space-joined words; each planted toxic word is annotated with its
    listed probability, covering the word and any space before an adjacent
    annotated word but never trailing punctuation.

    A fraction ``tail_rate`` of words come from a Zipf-distributed tail of
    pseudo-words with small random toxicity, so rare words can reach a high
    ratio by chance and the frequency threshold matters.
    """
    rng = np.random.default_rng(seed)
    toxic_words = dict(TOXIC if toxic_words is None else toxic_words)
    tail_rng = np.random.default_rng([seed, 7])
    tail = [f"{NEUTRAL[k % len(NEUTRAL)][:3]}{k}z" for k in range(tail_size)]
    tail_p = 1.0 / np.arange(1, tail_size + 1)
    tail_p /= tail_p.sum()
    for word in tail:
        toxic_words[word] = float(tail_rng.uniform(0.0, 0.5))
    toxic_list = sorted(w for w in toxic_words if w not in set(tail))
    rows = []
    for _ in range(n_rows):
        n = int(rng.integers(min_words, max_words + 1))
        text_parts: list[str] = []
        gold: list[int] = []
        pos = 0
        prev_end = None  # end of the previous word when it was annotated
        suffix_prev = ""
        for _w in range(n):
            u = rng.random()
            if u < toxic_rate:
                word = toxic_list[int(rng.integers(len(toxic_list)))]
                toxic = rng.random() < toxic_words[word]
            elif u < toxic_rate + tail_rate:
                word = tail[int(rng.choice(tail_size, p=tail_p))]
                toxic = rng.random() < toxic_words[word]
            else:
                word = NEUTRAL[int(rng.integers(len(NEUTRAL)))]
                toxic = False
            if rng.random() < 0.2:
                word = word.capitalize()
            suffix = _TRAILING[int(rng.integers(len(_TRAILING)))]
            if text_parts:
                pos += 1
            start = pos
            if toxic:
                if prev_end is not None and suffix_prev == "":
                    gold.extend(range(prev_end, start))
                gold.extend(range(start, start + len(word)))
                prev_end = start + len(word)
            else:
                prev_end = None
            suffix_prev = suffix
            text_parts.append(word + suffix)
            pos += len(word) + len(suffix)
        rows.append(AnnotatedText(" ".join(text_parts), tuple(sorted(set(gold)))))
    return Corpus(tuple(rows))
