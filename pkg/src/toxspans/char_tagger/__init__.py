"""Desk-scale character-aware B/I/O tagger (character CNN + transformer encoder)."""

from .config import BERT_BASE_SCALE, CharTaggerConfig, CharVocab
from .model import (
    CharTaggerModel,
    char_cnn_forward,
    classify,
    encode_words,
    encoder_forward,
    init_model,
    loss_and_gradients,
    param_shapes,
)
from .serialization import load_model, save_model
from .training import (
    TrainingHistory,
    predict_labels_batch,
    predict_spans,
    predict_spans_batch,
    token_accuracy,
    train,
)

__all__ = [
    "BERT_BASE_SCALE",
    "CharTaggerConfig",
    "CharVocab",
    "CharTaggerModel",
    "char_cnn_forward",
    "classify",
    "encode_words",
    "encoder_forward",
    "init_model",
    "loss_and_gradients",
    "param_shapes",
    "load_model",
    "save_model",
    "TrainingHistory",
    "predict_labels_batch",
    "predict_spans",
    "predict_spans_batch",
    "token_accuracy",
    "train",
]
