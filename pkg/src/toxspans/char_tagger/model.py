"""Character-CNN word embeddings, a post-LN transformer encoder and a B/I/O head.

All arrays are float64. Parameters live in a flat ``dict`` keyed by dotted
names (``layer0.attn.q_w``); gradients use the same keys.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..spans import TokenSpan
from . import layers as L
from .config import BOW_ID, EOW_ID, PAD_ID, CharTaggerConfig, CharVocab

LABEL_IDS = {"B": 0, "I": 1, "O": 2}
ID_LABELS = ("B", "I", "O")

# Added to attention scores of padded keys; exp() of it underflows to exactly 0.
_MASKED = -1e30


@dataclass
class CharTaggerModel:
    config: CharTaggerConfig
    vocab: CharVocab
    params: dict[str, np.ndarray] = field(repr=False)

    def copy(self) -> "CharTaggerModel":
        return CharTaggerModel(self.config, self.vocab, {k: v.copy() for k, v in self.params.items()})

    def norms(self) -> dict[str, float]:
        return {k: float(np.linalg.norm(v)) for k, v in self.params.items()}


def param_shapes(config: CharTaggerConfig, vocab_size: int) -> dict[str, tuple[int, ...]]:
    c = config
    shapes: dict[str, tuple[int, ...]] = {"char_embed": (vocab_size, c.char_embed_dim)}
    for i, (w, f) in enumerate(zip(c.conv_filter_widths, c.conv_filters_per_width)):
        shapes[f"conv{i}.kernel"] = (w, c.char_embed_dim, f)
        shapes[f"conv{i}.bias"] = (f,)
    d = c.char_features
    for j in range(c.highway_layers):
        shapes[f"highway{j}.transform_w"] = (d, d)
        shapes[f"highway{j}.transform_b"] = (d,)
        shapes[f"highway{j}.gate_w"] = (d, d)
        shapes[f"highway{j}.gate_b"] = (d,)
    h = c.hidden_size
    shapes["proj.w"] = (d, h)
    shapes["proj.b"] = (h,)
    shapes["pos_embed"] = (c.max_words, h)
    for n in range(c.num_layers):
        p = f"layer{n}"
        for m in "qkvo":
            shapes[f"{p}.attn.{m}_w"] = (h, h)
            shapes[f"{p}.attn.{m}_b"] = (h,)
        shapes[f"{p}.ln1.gamma"] = (h,)
        shapes[f"{p}.ln1.beta"] = (h,)
        shapes[f"{p}.ffn.w1"] = (h, c.ffn_size)
        shapes[f"{p}.ffn.b1"] = (c.ffn_size,)
        shapes[f"{p}.ffn.w2"] = (c.ffn_size, h)
        shapes[f"{p}.ffn.b2"] = (h,)
        shapes[f"{p}.ln2.gamma"] = (h,)
        shapes[f"{p}.ln2.beta"] = (h,)
    shapes["cls.w"] = (h, c.num_classes)
    shapes["cls.b"] = (c.num_classes,)
    return shapes


def init_model(config: CharTaggerConfig, vocab: CharVocab | None = None) -> CharTaggerModel:
    """Randomly initialised model; deterministic in ``config.seed``."""
    vocab = vocab or CharVocab.printable_ascii()
    rng = np.random.default_rng([config.seed, 0])
    params = {}
    for name, shape in param_shapes(config, len(vocab)).items():
        leaf = name.rsplit(".", 1)[-1]
        if name == "char_embed":
            value = rng.normal(0.0, 1.0, shape)
        elif name == "pos_embed":
            value = rng.normal(0.0, 0.02, shape)
        elif leaf == "gamma":
            value = np.ones(shape)
        elif leaf == "gate_b":
            value = np.full(shape, -1.0)  # start by carrying the input through
        elif len(shape) == 1:
            value = np.zeros(shape)
        else:
            fan_in = int(np.prod(shape[:-1]))
            value = rng.normal(0.0, 1.0 / np.sqrt(fan_in), shape)
        params[name] = value.astype(np.float64)
    return CharTaggerModel(config, vocab, params)


def encode_words(tokens: Sequence[TokenSpan], vocab: CharVocab, config: CharTaggerConfig) -> np.ndarray:
    """``[n_words, max_word_chars]`` ids: BOW, characters, EOW, then padding.

    Words longer than ``max_word_chars - 2`` are truncated.
    """
    width = config.max_word_chars
    out = np.full((len(tokens), width), PAD_ID, dtype=np.int64)
    for i, tok in enumerate(tokens):
        chars = tok.surface[: width - 2]
        out[i, 0] = BOW_ID
        out[i, 1 : 1 + len(chars)] = [vocab.id(ch) for ch in chars]
        out[i, 1 + len(chars)] = EOW_ID
    return out


# -- character CNN ---------------------------------------------------------


def _cnn_forward(char_ids: np.ndarray, model: CharTaggerModel):
    c, p = model.config, model.params
    if char_ids.ndim != 2 or char_ids.shape[1] != c.max_word_chars:
        raise ValueError(f"char_ids must be [words, {c.max_word_chars}], got {char_ids.shape}")
    x = p["char_embed"][char_ids]  # [N, Lc, E]
    n, _, e = x.shape
    pooled_parts, conv_caches = [], []
    for i, w in enumerate(c.conv_filter_widths):
        kernel = p[f"conv{i}.kernel"]
        win = sliding_window_view(x, w, axis=1)  # [N, P, E, w]
        win = win.transpose(0, 1, 3, 2).reshape(n, -1, w * e)
        conv = win @ kernel.reshape(w * e, -1) + p[f"conv{i}.bias"]
        arg = conv.argmax(axis=1)  # [N, F]
        pooled = np.take_along_axis(conv, arg[:, None, :], axis=1)[:, 0, :]
        pooled_parts.append(L.relu(pooled))
        conv_caches.append((win, arg, pooled))
    h = np.concatenate(pooled_parts, axis=-1) if n else np.zeros((0, c.char_features))
    hw_caches = []
    for j in range(c.highway_layers):
        t_pre = L.linear(h, p[f"highway{j}.transform_w"], p[f"highway{j}.transform_b"])
        g = L.sigmoid(L.linear(h, p[f"highway{j}.gate_w"], p[f"highway{j}.gate_b"]))
        t = L.relu(t_pre)
        hw_caches.append((h, t_pre, t, g))
        h = g * t + (1.0 - g) * h
    out = L.linear(h, p["proj.w"], p["proj.b"])
    return out, (char_ids, x.shape, conv_caches, hw_caches, h)


def _cnn_backward(d_out: np.ndarray, cache, model: CharTaggerModel, grads: dict) -> None:
    c, p = model.config, model.params
    char_ids, x_shape, conv_caches, hw_caches, h = cache
    dh, grads["proj.w"], grads["proj.b"] = L.linear_backward(d_out, h, p["proj.w"])
    for j in reversed(range(c.highway_layers)):
        h_in, t_pre, t, g = hw_caches[j]
        dt_pre = dh * g * (t_pre > 0)
        dg_pre = dh * (t - h_in) * g * (1.0 - g)
        dx_t, grads[f"highway{j}.transform_w"], grads[f"highway{j}.transform_b"] = L.linear_backward(
            dt_pre, h_in, p[f"highway{j}.transform_w"]
        )
        dx_g, grads[f"highway{j}.gate_w"], grads[f"highway{j}.gate_b"] = L.linear_backward(
            dg_pre, h_in, p[f"highway{j}.gate_w"]
        )
        dh = dh * (1.0 - g) + dx_t + dx_g
    n, lc, e = x_shape
    dx = np.zeros(x_shape)
    offset = 0
    for i, (w, f) in enumerate(zip(c.conv_filter_widths, c.conv_filters_per_width)):
        win, arg, pooled = conv_caches[i]
        d_pooled = dh[:, offset : offset + f] * (pooled > 0)
        offset += f
        n_pos = win.shape[1]
        d_conv = np.zeros((n, n_pos, f))
        np.put_along_axis(d_conv, arg[:, None, :], d_pooled[:, None, :], axis=1)
        kernel = p[f"conv{i}.kernel"]
        grads[f"conv{i}.kernel"] = (win.reshape(-1, w * e).T @ d_conv.reshape(-1, f)).reshape(kernel.shape)
        grads[f"conv{i}.bias"] = d_conv.sum(axis=(0, 1))
        d_win = (d_conv @ kernel.reshape(w * e, f).T).reshape(n, n_pos, w, e)
        for k in range(w):
            dx[:, k : k + n_pos, :] += d_win[:, :, k, :]
    d_embed = np.zeros_like(p["char_embed"])
    np.add.at(d_embed, char_ids.reshape(-1), dx.reshape(-1, e))
    grads["char_embed"] = d_embed


def char_cnn_forward(char_ids: np.ndarray, model: CharTaggerModel) -> np.ndarray:
    """Word embeddings ``[words, hidden_size]`` from character ids ``[words, max_word_chars]``."""
    return _cnn_forward(np.asarray(char_ids), model)[0]


# -- transformer encoder ---------------------------------------------------


def _split_heads(x, n_heads):
    b, t, h = x.shape
    return x.reshape(b, t, n_heads, h // n_heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    b, nh, t, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, nh * dh)


def _encoder_forward(x: np.ndarray, mask: np.ndarray, model: CharTaggerModel):
    c, p = model.config, model.params
    b, t, _ = x.shape
    if t > c.max_words:
        raise ValueError(f"{t} words exceed max_words={c.max_words}")
    key_bias = np.where(mask, 0.0, _MASKED)[:, None, None, :]
    scale = 1.0 / np.sqrt(c.head_dim)
    h = x + p["pos_embed"][:t]
    caches = []
    for n in range(c.num_layers):
        pre = f"layer{n}"
        q = _split_heads(L.linear(h, p[f"{pre}.attn.q_w"], p[f"{pre}.attn.q_b"]), c.num_heads)
        k = _split_heads(L.linear(h, p[f"{pre}.attn.k_w"], p[f"{pre}.attn.k_b"]), c.num_heads)
        v = _split_heads(L.linear(h, p[f"{pre}.attn.v_w"], p[f"{pre}.attn.v_b"]), c.num_heads)
        attn = L.softmax(q @ k.transpose(0, 1, 3, 2) * scale + key_bias)
        ctx = _merge_heads(attn @ v)
        a = L.linear(ctx, p[f"{pre}.attn.o_w"], p[f"{pre}.attn.o_b"])
        h1, ln1 = L.layer_norm(h + a, p[f"{pre}.ln1.gamma"], p[f"{pre}.ln1.beta"])
        f1 = L.linear(h1, p[f"{pre}.ffn.w1"], p[f"{pre}.ffn.b1"])
        f1_act = L.gelu(f1)
        f2 = L.linear(f1_act, p[f"{pre}.ffn.w2"], p[f"{pre}.ffn.b2"])
        h2, ln2 = L.layer_norm(h1 + f2, p[f"{pre}.ln2.gamma"], p[f"{pre}.ln2.beta"])
        caches.append((h, q, k, v, attn, ctx, h1, ln1, f1, f1_act, ln2))
        h = h2
    return h, (t, caches)


def _encoder_backward(dh: np.ndarray, cache, model: CharTaggerModel, grads: dict) -> np.ndarray:
    c, p = model.config, model.params
    t, caches = cache
    scale = 1.0 / np.sqrt(c.head_dim)
    for n in reversed(range(c.num_layers)):
        pre = f"layer{n}"
        h, q, k, v, attn, ctx, h1, ln1, f1, f1_act, ln2 = caches[n]
        d_sum2, grads[f"{pre}.ln2.gamma"], grads[f"{pre}.ln2.beta"] = L.layer_norm_backward(
            dh, ln2, p[f"{pre}.ln2.gamma"]
        )
        d_act, grads[f"{pre}.ffn.w2"], grads[f"{pre}.ffn.b2"] = L.linear_backward(d_sum2, f1_act, p[f"{pre}.ffn.w2"])
        d_f1 = L.gelu_backward(d_act, f1)
        d_h1, grads[f"{pre}.ffn.w1"], grads[f"{pre}.ffn.b1"] = L.linear_backward(d_f1, h1, p[f"{pre}.ffn.w1"])
        d_h1 = d_h1 + d_sum2
        d_sum1, grads[f"{pre}.ln1.gamma"], grads[f"{pre}.ln1.beta"] = L.layer_norm_backward(
            d_h1, ln1, p[f"{pre}.ln1.gamma"]
        )
        d_ctx, grads[f"{pre}.attn.o_w"], grads[f"{pre}.attn.o_b"] = L.linear_backward(d_sum1, ctx, p[f"{pre}.attn.o_w"])
        d_ctx = _split_heads(d_ctx, c.num_heads)
        d_attn = d_ctx @ v.transpose(0, 1, 3, 2)
        d_v = attn.transpose(0, 1, 3, 2) @ d_ctx
        d_scores = L.softmax_backward(d_attn, attn) * scale
        d_q = d_scores @ k
        d_k = d_scores.transpose(0, 1, 3, 2) @ q
        d_h = d_sum1
        for m, d_m in (("q", d_q), ("k", d_k), ("v", d_v)):
            dx_m, grads[f"{pre}.attn.{m}_w"], grads[f"{pre}.attn.{m}_b"] = L.linear_backward(
                _merge_heads(d_m), h, p[f"{pre}.attn.{m}_w"]
            )
            d_h = d_h + dx_m
        dh = d_h
    d_pos = np.zeros_like(p["pos_embed"])
    d_pos[:t] = dh.sum(axis=0)
    grads["pos_embed"] = d_pos
    return dh


def encoder_forward(
    word_embeds: np.ndarray,
    model: CharTaggerModel,
    mask: np.ndarray | None = None,
    return_attention: bool = False,
):
    """Contextual word states, same shape as ``word_embeds``.

    Accepts ``[words, hidden]`` or a padded batch ``[batch, words, hidden]``
    with a boolean ``mask`` marking real words. With ``return_attention``
    also returns the per-layer attention weights ``[batch, heads, q, k]``.
    """
    x = np.asarray(word_embeds, dtype=np.float64)
    single = x.ndim == 2
    if single:
        x = x[None]
    if x.ndim != 3 or x.shape[-1] != model.config.hidden_size:
        raise ValueError(f"expected [..., words, {model.config.hidden_size}], got {x.shape}")
    if mask is None:
        mask = np.ones(x.shape[:2], dtype=bool)
    h, (_, caches) = _encoder_forward(x, np.asarray(mask, dtype=bool).reshape(x.shape[:2]), model)
    if single:
        h = h[0]
    if return_attention:
        attns = [cache[4] for cache in caches]
        return h, attns
    return h


def classify(hidden: np.ndarray, model: CharTaggerModel) -> np.ndarray:
    """Per-word probabilities over (B, I, O)."""
    return L.softmax(L.linear(hidden, model.params["cls.w"], model.params["cls.b"]))


# -- full network ------------------------------------------------------------


def pad_batch(char_arrays: Sequence[np.ndarray], max_word_chars: int):
    """Stack per-sentence ``[words_i, chars]`` arrays into ``[B, T, chars]`` plus a word mask."""
    t = max((len(a) for a in char_arrays), default=0)
    ids = np.full((len(char_arrays), t, max_word_chars), PAD_ID, dtype=np.int64)
    mask = np.zeros((len(char_arrays), t), dtype=bool)
    for i, a in enumerate(char_arrays):
        ids[i, : len(a)] = a
        mask[i, : len(a)] = True
    return ids, mask


def forward(char_ids: np.ndarray, mask: np.ndarray, model: CharTaggerModel):
    """Probabilities ``[B, T, 3]`` for a padded batch, plus the cache for :func:`backward`."""
    b, t, lc = char_ids.shape
    flat = char_ids.reshape(b * t, lc)
    emb, cnn_cache = _cnn_forward(flat, model)
    hidden, enc_cache = _encoder_forward(emb.reshape(b, t, -1), mask, model)
    probs = classify(hidden, model)
    return probs, (cnn_cache, enc_cache, hidden, (b, t))


def backward(d_logits: np.ndarray, cache, model: CharTaggerModel) -> dict[str, np.ndarray]:
    cnn_cache, enc_cache, hidden, (b, t) = cache
    grads: dict[str, np.ndarray] = {}
    d_hidden, grads["cls.w"], grads["cls.b"] = L.linear_backward(d_logits, hidden, model.params["cls.w"])
    d_emb = _encoder_backward(d_hidden, enc_cache, model, grads)
    _cnn_backward(d_emb.reshape(b * t, -1), cnn_cache, model, grads)
    return {k: grads[k] for k in model.params}


def _label_array(label_seqs: Sequence[Sequence], t: int) -> np.ndarray:
    out = np.full((len(label_seqs), t), LABEL_IDS["O"], dtype=np.int64)
    for i, seq in enumerate(label_seqs):
        out[i, : len(seq)] = [LABEL_IDS[lab] if isinstance(lab, str) else int(lab) for lab in seq]
    return out


def loss_and_gradients(model: CharTaggerModel, batch) -> tuple[float, dict[str, np.ndarray]]:
    """Mean token cross-entropy over real words of ``batch`` and its gradient.

    ``batch`` is ``(char_arrays, label_seqs)``: one ``[words, max_word_chars]``
    id array and one B/I/O label sequence per sentence.
    """
    char_arrays, label_seqs = batch
    if len(char_arrays) == 0 or len(char_arrays) != len(label_seqs):
        raise ValueError("batch must be nonempty with one label sequence per sentence")
    for a, labs in zip(char_arrays, label_seqs):
        if len(a) != len(labs):
            raise ValueError(f"sentence of {len(a)} words has {len(labs)} labels")
    ids, mask = pad_batch(char_arrays, model.config.max_word_chars)
    n_real = int(mask.sum())
    if n_real == 0:
        raise ValueError("batch has no words")
    labels = _label_array(label_seqs, ids.shape[1])
    probs, cache = forward(ids, mask, model)
    picked = np.take_along_axis(probs, labels[..., None], axis=-1)[..., 0]
    with np.errstate(divide="ignore"):
        loss = float(-(np.log(picked) * mask).sum() / n_real)
    if not np.isfinite(loss):
        raise FloatingPointError(f"non-finite loss {loss}; parameter norms: {model.norms()}")
    d_logits = probs.copy()
    np.put_along_axis(d_logits, labels[..., None], picked[..., None] - 1.0, axis=-1)
    d_logits *= mask[..., None] / n_real
    return loss, backward(d_logits, cache, model)
