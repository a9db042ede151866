"""Toxic span detection: a frequency/ratio bag-of-words tagger, a character-aware
neural tagger, offset-level union of their outputs, and per-post F1 scoring."""

from .bow import (
    DictionaryEntry,
    TaggerParams,
    ToxicDictionary,
    bow_tag,
    build_dictionary,
    is_bleeped,
    normalize_word,
    select_toxic_words,
    top_k_by_frequency,
)
from .combine import union_spans
from .corpus_io import AnnotatedText, Corpus, parse_dataset, read_dataset, split_corpus, write_predictions
from .evaluation import EvalResult, GridResult, evaluate, grid_search, grid_search_combined, instance_f1
from .spans import TokenSpan, label_tokens, spans_from_labels, tokenize

__version__ = "0.1.0"
