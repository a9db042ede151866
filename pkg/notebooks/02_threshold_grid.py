"""
Threshold grid search and model combination
===========================================

Sweep (minimum frequency, minimum ratio), then repeat the sweep with the
bag-of-words output unioned with a fixed second model's predictions. Both
matrices are written as CSV for heatmap plotting.
"""

# %%
import sys

from toxspans.evaluation import grid_search, grid_search_combined
from toxspans.synthetic import make_corpus

corpus = make_corpus(3000, seed=1)
train, val = corpus[:2600], corpus[2600:]
freqs = (1, 10, 20, 40, 80)
ratios = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

# %%
# One dictionary build serves every cell. The matrix is identical for any
# number of workers.
plain = grid_search(train, val, freqs, ratios, workers=2)
plain.write_csv(sys.stdout)
print("best cell:", plain.best())

# %%
# Stand-in for a neural tagger: a high-precision, low-recall prediction that
# finds only the first annotated character run of each post.
def first_run(offsets):
    run = []
    for o in offsets:
        if run and o != run[-1] + 1:
            break
        run.append(o)
    return run


fixed = [first_run(row.gold_offsets) for row in val]
combined = grid_search_combined(train, val, fixed, freqs, ratios)
combined.write_csv(sys.stdout)

# %%
# The union can only add offsets, so recall never drops; whether F1 improves
# depends on how many wrong words the looser thresholds pull in.
print("cells improved by combining:", int((combined.f1_matrix > plain.f1_matrix).sum()), "of", plain.f1_matrix.size)
