"""
Character-aware neural tagger at desk scale
===========================================

Words are spelled out character by character, embedded by a small CNN with
highway layers, contextualized by a transformer encoder and classified as
B, I or O. Everything runs in numpy on a CPU.
"""

# %%
import numpy as np

from toxspans import evaluate
from toxspans.char_tagger import (
    CharTaggerConfig,
    TrainingHistory,
    encode_words,
    encoder_forward,
    init_model,
    char_cnn_forward,
    predict_spans,
    predict_spans_batch,
    train,
)
from toxspans.spans import tokenize
from toxspans.synthetic import make_corpus

config = CharTaggerConfig(epochs=8, learning_rate=0.05, seed=0)
model = init_model(config)
print({k: v.shape for k, v in list(model.params.items())[:6]})

# %%
# Misspellings share most character n-grams with the original word, so their
# embeddings start out closer than those of unrelated words.
ids = encode_words(tokenize("idiot idiiot weather"), model.vocab, config)
emb = char_cnn_forward(ids, model)
cos = emb @ emb.T / np.outer(np.linalg.norm(emb, axis=1), np.linalg.norm(emb, axis=1))
print(np.round(cos, 3))

# %%
h, attention = encoder_forward(emb, model, return_attention=True)
print("attention rows sum to", attention[0].sum(axis=-1).round(6).ravel()[:4])

# %%
corpus = make_corpus(400, seed=3)
train_set, test_set = corpus[:320], corpus[320:]
history = TrainingHistory()
model = train(model, train_set, config, history)
print("epoch losses:", [round(x, 4) for x in history.epoch_loss])

# %%
preds = predict_spans_batch(model, test_set.texts)
print(f"held-out F1: {evaluate(preds, test_set).percent}")
text = "you are such a stupid clown"
print([text[i] for i in predict_spans(model, text)])
