"""
Bag-of-words toxic span tagging
===============================

Build a toxic-word dictionary from annotated posts, pick words by frequency
and toxicity ratio, and tag new posts. Uses a seeded synthetic corpus; point
``TOXSPANS_DATA`` at the SemEval-2021 Task 5 CSVs to run on the real data.
"""

# %%
import os
from pathlib import Path

from toxspans import TaggerParams, bow_tag, build_dictionary, evaluate, read_dataset, split_corpus
from toxspans.bow import select_toxic_words, top_k_by_frequency
from toxspans.synthetic import make_corpus

data = Path(os.environ.get("TOXSPANS_DATA", "data"))
if (data / "tsd_train.csv").exists():
    corpus = read_dataset(data / "tsd_train.csv")
else:
    corpus = make_corpus(2000, seed=0)
train, val = split_corpus(corpus, int(len(corpus) * 0.88))
print(f"{len(train)} training rows, {len(val)} validation rows")

# %%
# Every normalized word gets (total occurrences, occurrences inside a toxic
# token). The ranking below uses the toxic count.
dictionary = build_dictionary(train)
for entry in top_k_by_frequency(dictionary, 10, min_ratio=0.1):
    print(f"{entry.word:<12} {entry.toxic_freq:>5} {entry.toxicity_ratio:.2f}")

# %%
# Thresholds are inclusive; raising either one can only shrink the word set.
for params in (TaggerParams(40, 0.7), TaggerParams(20, 0.4), TaggerParams(5, 0.3)):
    words = select_toxic_words(dictionary, params)
    print(params, sorted(words))

# %%
# Tagging: dictionary hits plus bleeped words such as f**k, which are toxic
# whatever the dictionary says.
text = "What a stupid idea, you f**king moron."
offsets = bow_tag(text, dictionary, TaggerParams(20, 0.4))
print(repr("".join(ch if i in set(offsets) else "_" for i, ch in enumerate(text))))

# %%
# Mean per-post F1 on the held-out rows, reported x100 like the shared task.
params = TaggerParams(20, 0.4)
result = evaluate([bow_tag(row.text, dictionary, params) for row in val], val)
print(f"validation F1: {result.percent}")
