"""Model container: one ``.npz`` archive of named parameter arrays.

Alongside the parameters it stores the config as JSON (``__config__``) and the
character list (``__vocab__``). Loading checks every array against the shapes
the config implies.
"""

from __future__ import annotations

import json

import numpy as np

from .config import CharTaggerConfig, CharVocab
from .model import CharTaggerModel, param_shapes

_META = ("__config__", "__vocab__")


def save_model(model: CharTaggerModel, path) -> None:
    arrays = dict(model.params)
    arrays["__config__"] = np.array(json.dumps(model.config.to_dict(), sort_keys=True))
    arrays["__vocab__"] = np.array(json.dumps(list(model.vocab.chars)))
    with open(path, "wb") as f:
        np.savez(f, **arrays)


def load_model(path) -> CharTaggerModel:
    with np.load(path, allow_pickle=False) as data:
        missing_meta = [k for k in _META if k not in data.files]
        if missing_meta:
            raise ValueError(f"not a model file: missing {missing_meta}")
        config = CharTaggerConfig.from_dict(json.loads(str(data["__config__"])))
        vocab = CharVocab(tuple(json.loads(str(data["__vocab__"]))))
        expected = param_shapes(config, len(vocab))
        names = set(data.files) - set(_META)
        if names != set(expected):
            raise ValueError(
                f"parameter names differ from config: missing {sorted(set(expected) - names)}, "
                f"unexpected {sorted(names - set(expected))}"
            )
        params = {}
        for name, shape in expected.items():
            arr = data[name]
            if arr.shape != shape:
                raise ValueError(f"{name}: shape {arr.shape} but config implies {shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name}: non-finite values")
            params[name] = arr.astype(np.float64)
    return CharTaggerModel(config, vocab, params)
