"""Character vocabulary and tagger hyperparameters."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

PAD_ID, UNK_ID, BOW_ID, EOW_ID = 0, 1, 2, 3
N_RESERVED = 4


@dataclass(frozen=True)
class CharVocab:
    """Ids 0-3 are reserved (pad, unknown, begin-of-word, end-of-word); characters follow densely."""

    chars: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(set(self.chars)) != len(self.chars):
            raise ValueError("duplicate characters in vocabulary")
        object.__setattr__(self, "_index", {c: i + N_RESERVED for i, c in enumerate(self.chars)})

    pad_id = PAD_ID
    unk_id = UNK_ID
    bow_id = BOW_ID
    eow_id = EOW_ID

    @classmethod
    def printable_ascii(cls) -> "CharVocab":
        # '!' (33) through '~' (126); space never occurs inside a token
        return cls(tuple(chr(c) for c in range(33, 127)))

    def __len__(self) -> int:
        return N_RESERVED + len(self.chars)

    def id(self, ch: str) -> int:
        return self._index.get(ch, UNK_ID)


@dataclass(frozen=True)
class CharTaggerConfig:
    max_word_chars: int = 50
    char_embed_dim: int = 16
    conv_filter_widths: tuple[int, ...] = (1, 2, 3, 4, 5)
    conv_filters_per_width: tuple[int, ...] = (8, 8, 16, 16, 16)
    highway_layers: int = 2
    hidden_size: int = 64
    num_layers: int = 2
    num_heads: int = 4
    max_words: int = 128
    num_classes: int = 3
    batch_size: int = 4
    epochs: int = 1
    learning_rate: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "conv_filter_widths", tuple(int(w) for w in self.conv_filter_widths))
        object.__setattr__(self, "conv_filters_per_width", tuple(int(f) for f in self.conv_filters_per_width))
        if self.num_classes != 3:
            raise ValueError("num_classes is fixed at 3 (B, I, O)")
        if self.hidden_size % self.num_heads:
            raise ValueError("hidden_size must be divisible by num_heads")
        if len(self.conv_filter_widths) != len(self.conv_filters_per_width):
            raise ValueError("conv_filter_widths and conv_filters_per_width differ in length")
        if not self.conv_filter_widths or min(self.conv_filter_widths) < 1:
            raise ValueError("need at least one convolution of width >= 1")
        if self.max_word_chars < max(3, max(self.conv_filter_widths)):
            raise ValueError("max_word_chars must fit BOW, EOW and the widest filter")
        if min(self.conv_filters_per_width) < 1 or self.batch_size < 1 or self.max_words < 1:
            raise ValueError("filter counts, batch_size and max_words must be positive")
        if self.epochs < 0 or self.num_layers < 0 or self.highway_layers < 0:
            raise ValueError("epochs and layer counts must be non-negative")

    @property
    def char_features(self) -> int:
        return sum(self.conv_filters_per_width)

    @property
    def head_dim(self) -> int:
        return self.hidden_size // self.num_heads

    @property
    def ffn_size(self) -> int:
        return 4 * self.hidden_size

    def replace(self, **changes) -> "CharTaggerConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["conv_filter_widths"] = list(self.conv_filter_widths)
        d["conv_filters_per_width"] = list(self.conv_filters_per_width)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CharTaggerConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)


# Encoder dimensions of BERT-base with the ELMo character CNN; there are no
# pre-trained weights for it here, so it is only useful for shape/cost checks.
BERT_BASE_SCALE = CharTaggerConfig(
    conv_filter_widths=(1, 2, 3, 4, 5, 6, 7),
    conv_filters_per_width=(32, 32, 64, 128, 256, 512, 1024),
    hidden_size=768,
    num_layers=12,
    num_heads=12,
    max_words=512,
)
