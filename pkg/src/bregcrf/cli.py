"""Command-line entry points: train, tag, eval, calibrate.

Exit codes: 0 success, 1 data/model/calibration errors, 2 bad flags.
"""

from __future__ import annotations

import argparse
import sys

from .chain_crf import viterbi
from .corpus import ParseError, load_conll
from .evaluation import score
from .features import TemplateSet, build_dictionary
from .model_io import ModelFormatError, export_text, load_model, save_model
from .trainer import CalibrationError, TrainConfig, calibrate, train
from .transforms import TransformSpec

UPDATE_KINDS = {
    "sgd": "identity",
    "u1g1": "rational_g1",
    "u2g1": "arctan_g1",
    "u2g2": "erf_g2",
    "u2g3": "gd_g3",
}


def _transform_spec(args) -> TransformSpec:
    kind = UPDATE_KINDS[args.update]
    if kind in ("rational_g1", "arctan_g1"):
        hyper = args.epsilon
    elif kind == "erf_g2":
        hyper = args.alpha
    elif kind == "gd_g3":
        hyper = args.beta
    else:
        hyper = 1.0
    if args.lookup_table:
        return TransformSpec(kind, hyper, args.table_resolution, args.table_range)
    return TransformSpec(kind, hyper)


def _add_update_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--update", choices=sorted(UPDATE_KINDS), default="sgd",
                   help="gradient update: plain sgd, rational (u1g1), arctan (u2g1), "
                        "erf (u2g2), or Gudermannian (u2g3)")
    p.add_argument("--epsilon", type=float, default=0.1,
                   help="epsilon for u1g1/u2g1 (default 0.1)")
    p.add_argument("--alpha", type=float, default=8.8623,
                   help="alpha for u2g2 (default 8.8623)")
    p.add_argument("--beta", type=float, default=10.0,
                   help="beta for u2g3 (default 10)")
    p.add_argument("--C", type=float, default=1.0, help="L2 strength (default 1.0)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--calibration-size", type=int, default=1000)
    p.add_argument("--calibration-grid", type=_float_list,
                   default=(0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0),
                   help="comma-separated candidate base rates")
    p.add_argument("--lookup-table", action="store_true",
                   help="evaluate the transform from a precomputed table")
    p.add_argument("--table-resolution", type=int, default=4096)
    p.add_argument("--table-range", type=float, default=1.0)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a float list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty float list")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bregcrf",
        description="Linear-chain CRF chunker with transformed-gradient training.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a model and write metrics CSV")
    p_train.add_argument("--train", required=True, help="training data (CoNLL, .gz ok)")
    p_train.add_argument("--test", help="optional held-out data scored each epoch")
    p_train.add_argument("--templates", choices=("small", "large"), default="small")
    _add_update_flags(p_train)
    p_train.add_argument("--epochs", type=int, default=50)
    p_train.add_argument("--patience", type=int, default=3)
    p_train.add_argument("--min-delta", type=float, default=1e-4)
    p_train.add_argument("--reshuffle-each-epoch", action="store_true")
    p_train.add_argument("--strict", action="store_true",
                         help="reject IOB2 continuation violations in input")
    p_train.add_argument("--metrics-out", required=True, help="per-epoch metrics CSV path")
    p_train.add_argument("--model-out", required=True, help="model file path")
    p_train.add_argument("--export-text", metavar="PATH",
                         help="also dump feature<TAB>weight lines")
    p_train.set_defaults(func=cmd_train)

    p_tag = sub.add_parser("tag", help="decode data with a model")
    p_tag.add_argument("--model", required=True)
    p_tag.add_argument("--data", required=True)
    p_tag.add_argument("--out", help="output path (default stdout)")
    p_tag.set_defaults(func=cmd_tag)

    p_eval = sub.add_parser("eval", help="score a model on labeled data")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--data", required=True)
    p_eval.set_defaults(func=cmd_eval)

    p_cal = sub.add_parser("calibrate", help="pick the base learning rate only")
    p_cal.add_argument("--train", required=True)
    p_cal.add_argument("--templates", choices=("small", "large"), default="small")
    _add_update_flags(p_cal)
    p_cal.set_defaults(func=cmd_calibrate)

    return parser


def _make_config(args) -> TrainConfig:
    return TrainConfig(
        update=_transform_spec(args),
        C=args.C,
        epochs=getattr(args, "epochs", 1),
        seed=args.seed,
        calibration_size=args.calibration_size,
        calibration_grid=tuple(args.calibration_grid),
        patience=getattr(args, "patience", 3),
        min_delta=getattr(args, "min_delta", 1e-4),
        reshuffle_each_epoch=getattr(args, "reshuffle_each_epoch", False),
    )


def cmd_train(args) -> int:
    dataset = load_conll(args.train, strict=args.strict)
    test = load_conll(args.test, strict=args.strict) if args.test else None
    templates = TemplateSet.by_name(args.templates)
    index = build_dictionary(dataset, templates)
    print(f"features: {index.num_features}", file=sys.stderr)

    config = _make_config(args)
    model, log = train(dataset, index, config, test=test,
                       log_fn=lambda msg: print(msg, file=sys.stderr))

    save_model(args.model_out, model, config.update)
    log.write_csv(args.metrics_out)
    if args.export_text:
        export_text(args.export_text, model)

    train_rows = log.rows("train")
    line = f"final train_f1={train_rows[-1].f1:.6f}"
    test_rows = log.rows("test")
    if test_rows:
        line += f" test_f1={test_rows[-1].f1:.6f}"
    print(line)
    return 0


def cmd_tag(args) -> int:
    model, _ = load_model(args.model)
    dataset = load_conll(args.data)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for k, sentence in enumerate(dataset):
            pred = viterbi(model, sentence)
            if k:
                out.write("\n")
            for token, tag in zip(sentence.tokens, pred):
                out.write(f"{token.word} {token.pos} {token.chunk} {tag}\n")
    finally:
        if args.out:
            out.close()
    return 0


def cmd_eval(args) -> int:
    model, _ = load_model(args.model)
    dataset = load_conll(args.data)
    preds = [viterbi(model, sentence) for sentence in dataset]
    metrics = score(preds, [s.chunks for s in dataset])
    print(f"precision={metrics.precision:.6f} recall={metrics.recall:.6f} "
          f"f1={metrics.f1:.6f}")
    return 0


def cmd_calibrate(args) -> int:
    dataset = load_conll(args.train)
    templates = TemplateSet.by_name(args.templates)
    index = build_dictionary(dataset, templates)
    config = _make_config(args)
    rate = calibrate(dataset, index, config)
    print(f"lambda_hat={rate:g}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, ModelFormatError, CalibrationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
