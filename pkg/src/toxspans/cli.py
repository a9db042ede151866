"""Command-line front end: ``toxspans <subcommand> ...``.

Reports go to stdout, diagnostics to stderr. Exit status 0 on success,
1 on file or data errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from typing import Sequence

from . import bow, corpus_io
from .combine import union_spans
from .evaluation import DEFAULT_FREQ_AXIS, DEFAULT_RATIO_AXIS, evaluate, grid_search, grid_search_combined
from .spans import tokenize

log = logging.getLogger("toxspans")


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as f:
            yield f


def _int_list(s: str) -> list[int]:
    return [int(v) for v in s.split(",") if v.strip()]


def _float_list(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _cmd_build_dict(args) -> None:
    d = bow.build_dictionary(corpus_io.read_dataset(args.train))
    with _output(args.out) as f:
        bow.write_dictionary(d, f)
    log.info("%d dictionary entries", len(d))


def _mask_chars(args):
    return None if args.no_bleep else frozenset(args.mask_chars)


def _cmd_tag_bow(args) -> None:
    d = bow.read_dictionary(args.dict)
    corpus = corpus_io.read_dataset(args.input, require_spans=False)
    words = bow.select_toxic_words(d, bow.TaggerParams(args.min_freq, args.min_ratio), args.freq_basis)
    mask = _mask_chars(args)
    preds = [bow.tag_tokens(tokenize(row.text), words, mask) for row in corpus]
    with _output(args.out) as f:
        corpus_io.write_predictions(enumerate(preds), f)
    log.info("%d words selected, %d rows tagged", len(words), len(preds))


def _cmd_combine(args) -> None:
    merged: dict[int, set[int]] = {}
    for path in (args.first, args.second):
        for row_id, offsets in corpus_io.read_predictions(path):
            merged[row_id] = set(union_spans(merged.get(row_id, ()), offsets))
    with _output(args.out) as f:
        corpus_io.write_predictions(((i, sorted(merged[i])) for i in sorted(merged)), f)


def _aligned_predictions(path, n_rows):
    return corpus_io.predictions_by_row(corpus_io.read_predictions(path), n_rows)


def _cmd_evaluate(args) -> None:
    gold = corpus_io.read_dataset(args.gold)
    result = evaluate(_aligned_predictions(args.predictions, len(gold)), gold)
    print(f"F1: {result.percent}")
    if not args.quiet:
        for i, score in enumerate(result.per_row_f1):
            print(f"{i},{score:.6f}")


def _cmd_grid(args) -> None:
    train = corpus_io.read_dataset(args.train)
    eval_set = corpus_io.read_dataset(args.eval)
    kwargs = dict(
        freq_axis=_int_list(args.freqs),
        ratio_axis=_float_list(args.ratios),
        workers=args.workers,
        mask_chars=_mask_chars(args),
        basis=args.freq_basis,
    )
    if args.command == "grid-combined":
        fixed = _aligned_predictions(args.fixed, len(eval_set))
        result = grid_search_combined(train, eval_set, fixed, **kwargs)
    else:
        result = grid_search(train, eval_set, **kwargs)
    with _output(args.out) as f:
        result.write_csv(f)
    freq, ratio, f1 = result.best()
    print(f"best: min_freq={freq} min_ratio={ratio} F1: {100 * f1:.2f}", file=sys.stderr)


def _cmd_split(args) -> None:
    corpus = corpus_io.read_dataset(args.corpus)
    first, rest = corpus_io.split_corpus(corpus, args.train_size)
    for part, path in ((first, args.train_out), (rest, args.rest_out)):
        with open(path, "w", encoding="utf-8", newline="") as f:
            corpus_io.write_corpus(part, f)
    print(f"{len(first)} rows -> {args.train_out}, {len(rest)} rows -> {args.rest_out}")


def _config_from_args(args):
    from .char_tagger import CharTaggerConfig

    return CharTaggerConfig(
        max_word_chars=args.max_word_chars,
        char_embed_dim=args.char_embed_dim,
        conv_filter_widths=tuple(_int_list(args.conv_filter_widths)),
        conv_filters_per_width=tuple(_int_list(args.conv_filters_per_width)),
        highway_layers=args.highway_layers,
        hidden_size=args.hidden_size,
        num_layers=args.num_layers,
        num_heads=args.num_heads,
        max_words=args.max_words,
        batch_size=args.batch_size,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        seed=args.seed,
    )


def _cmd_train_char(args) -> None:
    from .char_tagger import TrainingHistory, init_model, save_model, train

    config = _config_from_args(args)
    history = TrainingHistory()
    model = train(init_model(config), corpus_io.read_dataset(args.train), config, history)
    save_model(model, args.out)
    for epoch, loss in enumerate(history.epoch_loss, 1):
        print(f"epoch {epoch}: loss {loss:.6f}")


def _cmd_predict_char(args) -> None:
    from .char_tagger import load_model, predict_spans_batch

    model = load_model(args.model)
    corpus = corpus_io.read_dataset(args.input, require_spans=False)
    preds = predict_spans_batch(model, corpus.texts, batch_size=args.batch_size)
    with _output(args.out) as f:
        corpus_io.write_predictions(enumerate(preds), f)


def build_parser() -> argparse.ArgumentParser:
    from .char_tagger import CharTaggerConfig

    parser = argparse.ArgumentParser(prog="toxspans", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def bleep_flags(p):
        p.add_argument("--mask-chars", default="".join(sorted(bow.MASK_CHARS)), help="bleep mask characters")
        p.add_argument("--no-bleep", action="store_true", help="disable the bleeped-word rule")
        p.add_argument("--freq-basis", choices=("toxic", "total"), default="toxic",
                       help="count compared with --min-freq: toxic occurrences (default) or all occurrences")

    p = sub.add_parser("build-dict", help="training CSV -> dictionary CSV")
    p.add_argument("train")
    p.add_argument("-o", "--out")
    p.set_defaults(func=_cmd_build_dict)

    p = sub.add_parser("tag-bow", help="dictionary + thresholds + input CSV -> predictions")
    p.add_argument("input")
    p.add_argument("--dict", required=True)
    p.add_argument("--min-freq", type=int, required=True)
    p.add_argument("--min-ratio", type=float, required=True)
    p.add_argument("-o", "--out")
    bleep_flags(p)
    p.set_defaults(func=_cmd_tag_bow)

    p = sub.add_parser("combine", help="union of two prediction files")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("-o", "--out")
    p.set_defaults(func=_cmd_combine)

    p = sub.add_parser("evaluate", help="predictions + gold CSV -> mean F1 and per-row scores")
    p.add_argument("predictions")
    p.add_argument("gold")
    p.add_argument("-q", "--quiet", action="store_true", help="print only the mean")
    p.set_defaults(func=_cmd_evaluate)

    for name, helptext in (("grid", "BoW threshold grid"), ("grid-combined", "grid over BoW unioned with fixed predictions")):
        p = sub.add_parser(name, help=helptext + " -> matrix CSV")
        p.add_argument("--train", required=True)
        p.add_argument("--eval", required=True)
        if name == "grid-combined":
            p.add_argument("--fixed", required=True, help="predictions file aligned to --eval")
        p.add_argument("--freqs", default=",".join(map(str, DEFAULT_FREQ_AXIS)))
        p.add_argument("--ratios", default=",".join(map(str, DEFAULT_RATIO_AXIS)))
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("-o", "--out")
        bleep_flags(p)
        p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("split", help="first N rows / remaining rows")
    p.add_argument("corpus")
    p.add_argument("--train-size", type=int, required=True)
    p.add_argument("--train-out", required=True)
    p.add_argument("--rest-out", required=True)
    p.set_defaults(func=_cmd_split)

    defaults = CharTaggerConfig()
    p = sub.add_parser("train-char", help="train the character tagger -> model file")
    p.add_argument("train")
    p.add_argument("-o", "--out", required=True)
    for fname in ("max_word_chars", "char_embed_dim", "highway_layers", "hidden_size", "num_layers",
                  "num_heads", "max_words", "batch_size", "epochs", "seed"):
        p.add_argument("--" + fname.replace("_", "-"), type=int, default=getattr(defaults, fname))
    p.add_argument("--conv-filter-widths", default=",".join(map(str, defaults.conv_filter_widths)))
    p.add_argument("--conv-filters-per-width", default=",".join(map(str, defaults.conv_filters_per_width)))
    p.add_argument("--learning-rate", type=float, default=defaults.learning_rate)
    p.set_defaults(func=_cmd_train_char)

    p = sub.add_parser("predict-char", help="model + input CSV -> predictions")
    p.add_argument("input")
    p.add_argument("--model", required=True)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("-o", "--out")
    p.set_defaults(func=_cmd_predict_char)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(name)s: %(message)s")
    try:
        args.func(args)
    except (OSError, ValueError, IndexError, FloatingPointError) as exc:
        print(f"toxspans {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


run = main
