import math

import numpy as np
import pytest

from toxspans.char_tagger import (
    BERT_BASE_SCALE,
    CharTaggerConfig,
    CharVocab,
    TrainingHistory,
    char_cnn_forward,
    classify,
    encode_words,
    encoder_forward,
    init_model,
    load_model,
    loss_and_gradients,
    param_shapes,
    predict_spans,
    predict_spans_batch,
    save_model,
    train,
)
from toxspans.char_tagger import layers
from toxspans.char_tagger import training as training_mod
from toxspans.char_tagger.config import BOW_ID, EOW_ID, PAD_ID, UNK_ID
from toxspans.char_tagger.model import forward, pad_batch
from toxspans.corpus_io import AnnotatedText, Corpus
from toxspans.spans import TokenSpan, spans_from_labels, tokenize
from toxspans.synthetic import make_corpus

from gradcheck import numeric_gradients, relative_errors

SMALL = CharTaggerConfig(
    max_word_chars=8,
    char_embed_dim=4,
    conv_filter_widths=(1, 2),
    conv_filters_per_width=(3, 4),
    hidden_size=8,
    num_layers=1,
    num_heads=2,
    max_words=6,
    seed=3,
)


@pytest.fixture(scope="module")
def small_model():
    return init_model(SMALL)


def _batch(model, texts_labels):
    ids = [encode_words(tokenize(t), model.vocab, model.config) for t, _ in texts_labels]
    return ids, [labs for _, labs in texts_labels]


def test_vocab_reserved_ids():
    v = CharVocab.printable_ascii()
    assert len({PAD_ID, UNK_ID, BOW_ID, EOW_ID}) == 4
    ids = sorted(v.id(c) for c in v.chars)
    assert ids == list(range(4, len(v)))
    assert v.id("é") == UNK_ID


def test_config_validation():
    with pytest.raises(ValueError):
        CharTaggerConfig(hidden_size=10, num_heads=4)
    with pytest.raises(ValueError):
        CharTaggerConfig(conv_filter_widths=(1, 2), conv_filters_per_width=(4,))
    with pytest.raises(ValueError):
        CharTaggerConfig(num_classes=4)
    assert CharTaggerConfig.from_dict(SMALL.to_dict()) == SMALL
    assert (BERT_BASE_SCALE.num_layers, BERT_BASE_SCALE.hidden_size, BERT_BASE_SCALE.num_heads) == (12, 768, 12)
    assert (CharTaggerConfig().batch_size, CharTaggerConfig().epochs) == (4, 1)


def test_encode_cat():
    v = CharVocab.printable_ascii()
    cfg = SMALL.replace(max_word_chars=6)
    out = encode_words([TokenSpan("cat", 0, 3)], v, cfg)
    assert out.tolist() == [[BOW_ID, v.id("c"), v.id("a"), v.id("t"), EOW_ID, PAD_ID]]


def test_encode_empty_and_truncation():
    v = CharVocab.printable_ascii()
    cfg = CharTaggerConfig()
    assert encode_words([], v, cfg).shape == (0, 50)
    word = "abcdefghij" * 6
    out = encode_words([TokenSpan(word, 0, 60)], v, cfg)[0]
    assert out[0] == BOW_ID and out[-1] == EOW_ID
    assert out[1:49].tolist() == [v.id(c) for c in word[:48]]


def test_char_cnn_shape_and_identical_words(small_model):
    ids = encode_words(tokenize("cat dog cat"), small_model.vocab, SMALL)
    out = char_cnn_forward(ids, small_model)
    assert out.shape == (3, SMALL.hidden_size)
    assert np.array_equal(out[0], out[2])


def test_char_cnn_zero_kernels(small_model):
    m = small_model.copy()
    for name in m.params:
        if name.startswith("conv"):
            m.params[name][:] = 0.0
    out = char_cnn_forward(encode_words(tokenize("a bb cccc"), m.vocab, SMALL), m)
    # hand propagation of a zero feature vector: relu(0)=0, each highway layer maps
    # 0 -> g*relu(b_t) with g=sigmoid(b_g), then the projection adds its bias
    h = np.zeros(SMALL.char_features)
    for j in range(SMALL.highway_layers):
        p = m.params
        g = 1 / (1 + np.exp(-(h @ p[f"highway{j}.gate_w"] + p[f"highway{j}.gate_b"])))
        t = np.maximum(h @ p[f"highway{j}.transform_w"] + p[f"highway{j}.transform_b"], 0)
        h = g * t + (1 - g) * h
    expected = h @ m.params["proj.w"] + m.params["proj.b"]
    np.testing.assert_allclose(out, np.tile(expected, (3, 1)), atol=1e-12)


def test_char_cnn_shape_error(small_model):
    with pytest.raises(ValueError):
        char_cnn_forward(np.zeros((2, 5), dtype=int), small_model)


def test_encoder_attention_and_shape(small_model):
    x = np.random.default_rng(0).normal(size=(5, SMALL.hidden_size))
    h, attns = encoder_forward(x, small_model, return_attention=True)
    assert h.shape == x.shape
    for a in attns:
        np.testing.assert_allclose(a.sum(axis=-1), 1.0, atol=1e-6)
        assert np.all(a >= 0)


def test_encoder_masked_keys_get_zero_weight(small_model):
    x = np.random.default_rng(1).normal(size=(1, 4, SMALL.hidden_size))
    mask = np.array([[True, True, False, False]])
    _, attns = encoder_forward(x, small_model, mask=mask, return_attention=True)
    assert np.all(attns[0][..., 2:] == 0.0)


def test_encoder_zero_layers_adds_positions():
    m = init_model(SMALL.replace(num_layers=0))
    x = np.random.default_rng(2).normal(size=(4, SMALL.hidden_size))
    np.testing.assert_array_equal(encoder_forward(x, m), x + m.params["pos_embed"][:4])


def test_encoder_rejects_too_many_words(small_model):
    with pytest.raises(ValueError):
        encoder_forward(np.zeros((SMALL.max_words + 1, SMALL.hidden_size)), small_model)


def test_layer_norm_statistics():
    x = np.random.default_rng(3).normal(3.0, 5.0, size=(20, 16))
    y, _ = layers.layer_norm(x, np.ones(16), np.zeros(16))
    assert np.all(np.abs(y.mean(axis=-1)) < 1e-6)
    assert np.all(np.abs(y.var(axis=-1) - 1) < 1e-4)


def test_classify_rows_and_zero_weights(small_model):
    m = small_model.copy()
    h = np.random.default_rng(4).normal(size=(6, SMALL.hidden_size))
    np.testing.assert_allclose(classify(h, m).sum(axis=-1), 1.0, atol=1e-6)
    m.params["cls.w"][:] = 0
    m.params["cls.b"][:] = 0
    np.testing.assert_allclose(classify(h, m), 1 / 3)


def test_classify_hand_logits(small_model):
    m = small_model.copy()
    m.params["cls.w"][:] = 0
    m.params["cls.b"][:] = [1.0, 2.0, 0.5]
    probs = classify(np.zeros((1, SMALL.hidden_size)), m)[0]
    z = math.exp(1.0) + math.exp(2.0) + math.exp(0.5)
    np.testing.assert_allclose(probs, [math.exp(1) / z, math.exp(2) / z, math.exp(0.5) / z])
    assert probs.argmax() == 1


def test_loss_uniform_is_ln3(small_model):
    m = small_model.copy()
    m.params["cls.w"][:] = 0
    m.params["cls.b"][:] = 0
    loss, _ = loss_and_gradients(m, _batch(m, [("you idiot", ["O", "B"]), ("fine", ["O"])]))
    assert loss == pytest.approx(math.log(3), abs=1e-12)


def test_loss_near_zero_for_confident_correct(small_model):
    m = small_model.copy()
    m.params["cls.w"][:] = 0
    m.params["cls.b"][:] = [0.0, 0.0, 40.0]
    loss, _ = loss_and_gradients(m, _batch(m, [("all good here", ["O", "O", "O"])]))
    assert loss < 1e-15


def test_loss_nonfinite_raises(small_model):
    m = small_model.copy()
    m.params["cls.w"][:] = 0
    m.params["cls.b"][:] = [0.0, 0.0, 1e6]
    with pytest.raises(FloatingPointError, match="parameter norms"):
        loss_and_gradients(m, _batch(m, [("x", ["B"])]))


def test_loss_batch_validation(small_model):
    with pytest.raises(ValueError):
        loss_and_gradients(small_model, ([], []))
    with pytest.raises(ValueError):
        loss_and_gradients(small_model, _batch(small_model, [("a b", ["O"])]))


def test_gradients_match_finite_differences(small_model):
    m = small_model.copy()
    batch = _batch(m, [("you moron", ["O", "B"])])
    _, analytic = loss_and_gradients(m, batch)
    assert set(analytic) == set(m.params)
    errors = relative_errors(analytic, numeric_gradients(m, batch))
    bad = {k: v for k, v in errors.items() if v >= 1e-4}
    assert not bad


def test_gradients_with_padding_and_two_layers():
    m = init_model(SMALL.replace(num_layers=2, highway_layers=1, seed=8))
    batch = _batch(m, [("dumb and dumber", ["B", "I", "I"]), ("ok", ["O"])])
    _, analytic = loss_and_gradients(m, batch)
    errors = relative_errors(analytic, numeric_gradients(m, batch))
    assert max(errors.values()) < 1e-4


def test_train_zero_epochs_unchanged(small_model):
    corpus = make_corpus(5, seed=1)
    out = train(small_model, corpus, SMALL.replace(epochs=0))
    assert all(np.array_equal(out.params[k], small_model.params[k]) for k in out.params)
    assert out is not small_model


def test_train_deterministic():
    corpus = make_corpus(12, seed=2)
    cfg = SMALL.replace(epochs=2, seed=5)
    a = train(init_model(cfg), corpus, cfg)
    b = train(init_model(cfg), corpus, cfg)
    assert all(a.params[k].tobytes() == b.params[k].tobytes() for k in a.params)
    c = train(init_model(cfg.replace(seed=6)), corpus, cfg.replace(seed=6))
    assert any(a.params[k].tobytes() != c.params[k].tobytes() for k in a.params)


def test_train_reports_epoch_losses_and_long_rows_windowed():
    cfg = SMALL.replace(epochs=3, max_words=3)
    history = TrainingHistory()
    corpus = Corpus((AnnotatedText("a b c d e f g", (0,)), AnnotatedText("", ())))
    train(init_model(cfg), corpus, cfg, history)
    assert len(history.epoch_loss) == 3
    assert all(np.isfinite(history.epoch_loss))
    assert len(training_mod.corpus_sequences(corpus, init_model(cfg))) == 3


def _force_output(monkeypatch, label_fn):
    """Replace the network output with probabilities chosen per word position."""

    def fake_forward(ids, mask, model):
        b, t, _ = ids.shape
        probs = np.zeros((b, t, 3))
        for i in range(b):
            for j in range(t):
                probs[i, j, label_fn(i, j)] = 1.0
        return probs, None

    monkeypatch.setattr(training_mod, "forward", fake_forward)


def test_predict_all_outside(monkeypatch, small_model):
    _force_output(monkeypatch, lambda i, j: 2)
    assert predict_spans(small_model, "you are an idiot") == []


def test_predict_single_b(monkeypatch, small_model):
    _force_output(monkeypatch, lambda i, j: 0 if j == 2 else 2)
    text = "you are idiots, really"
    assert predict_spans(small_model, text) == list(range(8, 14))


def test_predict_repairs_i_after_o(monkeypatch, small_model):
    _force_output(monkeypatch, lambda i, j: 1 if j == 1 else 2)
    assert predict_spans(small_model, "ok moron") == list(range(3, 8))


def test_predict_empty_text(small_model):
    assert predict_spans(small_model, "") == []
    assert predict_spans(small_model, "   ") == []


def test_predict_padding_invariant():
    cfg = SMALL.replace(epochs=30, learning_rate=0.1, seed=4, max_words=16)
    corpus = make_corpus(20, seed=9)
    m = train(init_model(cfg), corpus, cfg)
    texts = corpus.texts
    alone = [predict_spans(m, t) for t in texts]
    assert predict_spans_batch(m, texts, batch_size=8) == alone
    # probabilities of real words do not depend on padding partners
    ids = [encode_words(tokenize(t), m.vocab, cfg) for t in texts[:3]]
    padded, mask = pad_batch(ids, cfg.max_word_chars)
    probs, _ = forward(padded, mask, m)
    for k, a in enumerate(ids):
        single, _ = forward(a[None], np.ones((1, len(a)), bool), m)
        np.testing.assert_allclose(probs[k, : len(a)], single[0], atol=1e-12)


def test_predict_handles_text_longer_than_max_words(small_model):
    text = " ".join(["word"] * (SMALL.max_words * 2 + 1))
    out = predict_spans(small_model, text)
    assert all(0 <= i < len(text) for i in out)


def test_save_load_roundtrip(tmp_path, small_model):
    path = tmp_path / "m.npz"
    save_model(small_model, path)
    loaded = load_model(path)
    assert loaded.config == small_model.config
    assert loaded.vocab == small_model.vocab
    assert all(np.array_equal(loaded.params[k], small_model.params[k]) for k in small_model.params)


def test_load_rejects_shape_mismatch(tmp_path, small_model):
    bad = small_model.copy()
    bad.params["cls.w"] = np.zeros((SMALL.hidden_size, 4))
    path = tmp_path / "bad.npz"
    save_model(bad, path)
    with pytest.raises(ValueError, match="cls.w"):
        load_model(path)


def test_param_shapes_consistent(small_model):
    shapes = param_shapes(SMALL, len(small_model.vocab))
    assert {k: v.shape for k, v in small_model.params.items()} == shapes
    assert all(np.all(np.isfinite(v)) for v in small_model.params.values())
