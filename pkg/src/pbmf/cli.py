"""Command-line front end: train models, evaluate them, and run benchmarks.

Subcommands:

    train      fit one algorithm and write the model + loss-history CSV
    evaluate   score a saved model on a held-out split
    benchmark  train/evaluate every requested algorithm on one shared split
    sweep      benchmark position_bias_mf across a list of beta values

Flags can also be supplied through `--config FILE`, a plain `key = value`
text file; explicit flags override file values.  All output CSVs are
byte-deterministic for a fixed invocation.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from typing import TextIO

from . import baselines, data, metrics, training
from .model import load_model, save_model

BENCHMARK_ALGORITHMS = ("classic_mf", "cosine_mf", "position_bias_mf", "random", "zipf")
_VARIANT_MAP = {"literal": "literal_xmax", "pareto": "pareto_xmin"}


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a number >= 0, got {text!r}")
    return value


def _fraction(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"expected a fraction in (0, 1), got {text!r}")
    return value


def _beta_list(text: str) -> list[float]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("beta list must not be empty")
    return [_nonneg_float(p) for p in parts]


def _algorithm_list(text: str) -> list[str]:
    names = [p.strip() for p in text.split(",") if p.strip()]
    if not names:
        raise argparse.ArgumentTypeError("algorithm list must not be empty")
    for name in names:
        if name not in BENCHMARK_ALGORITHMS:
            raise argparse.ArgumentTypeError(
                f"unknown algorithm {name!r}; choose from {', '.join(BENCHMARK_ALGORITHMS)}"
            )
    return names


def _delimiter(text: str) -> str:
    if text == "\\t":
        text = "\t"
    if len(text) != 1:
        raise argparse.ArgumentTypeError(
            f"delimiter must be a single character (or \\t), got {text!r}"
        )
    return text


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="rating file to load")
    p.add_argument("--format", choices=("movielens", "csv"), default="movielens",
                   help="input layout: UserID::MovieID::Rating::Timestamp lines or delimited columns")
    p.add_argument("--user-col", type=_nonneg_int, default=0, help="user-id column (csv format)")
    p.add_argument("--item-col", type=_nonneg_int, default=1, help="item-id column (csv format)")
    p.add_argument("--rating-col", type=_nonneg_int, default=2, help="rating column (csv format)")
    p.add_argument("--delimiter", type=_delimiter, default=",",
                   help="field delimiter (csv format); \\t for tab")
    p.add_argument("--header", action="store_true", help="skip the first row of the csv file")
    p.add_argument("--test-fraction", type=_fraction, default=0.2,
                   help="fraction of interactions held out for testing")
    p.add_argument("--seed", type=_nonneg_int, default=42,
                   help="seed shared by the split, the initializer, and the baselines")
    p.add_argument("--config", default=None,
                   help="key = value file supplying defaults; explicit flags win")


def _add_training_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=_positive_int, default=32, help="latent dimension")
    p.add_argument("--lr", type=_positive_float, default=0.01, help="SGD learning rate")
    p.add_argument("--epochs", type=_positive_int, default=20)
    p.add_argument("--init-scale", type=_positive_float, default=0.1,
                   help="factors start uniform on (0, init-scale]")
    p.add_argument("--no-shuffle", action="store_true",
                   help="visit interactions in file order instead of reshuffling per epoch")


def _add_metric_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k-top", type=_positive_int, default=10,
                   help="recommendation-list length for the Matthew degree")
    p.add_argument("--matthew-variant", choices=("literal", "pareto"), default="literal",
                   help="reference frequency in the Matthew degree: max (literal) or min (pareto)")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="pbmf",
        description="Matrix-factorization recommender toolkit with a position-bias penalty.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    subs: dict[str, argparse.ArgumentParser] = {}

    p = subparsers.add_parser("train", help="train one algorithm and save the model")
    _add_data_flags(p)
    _add_training_flags(p)
    p.add_argument("--algorithm", choices=training.ALGORITHMS, required=True)
    p.add_argument("--beta", type=_nonneg_float, default=0.0,
                   help="weight of the uniform-click penalty (position_bias_mf)")
    p.add_argument("--output", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)
    subs["train"] = p

    p = subparsers.add_parser("evaluate", help="evaluate a saved model on a held-out split")
    _add_data_flags(p)
    _add_metric_flags(p)
    p.add_argument("--model", required=True, help="model file written by `train`")
    p.add_argument("--label", default="model", help="algorithm name for the report row")
    p.add_argument("--output", default=None, help="report CSV (stdout when omitted)")
    p.set_defaults(func=cmd_evaluate)
    subs["evaluate"] = p

    p = subparsers.add_parser("benchmark", help="compare algorithms on one shared split")
    _add_data_flags(p)
    _add_training_flags(p)
    _add_metric_flags(p)
    p.add_argument("--algorithms", type=_algorithm_list,
                   default=list(BENCHMARK_ALGORITHMS),
                   help="comma-separated subset of: " + ", ".join(BENCHMARK_ALGORITHMS))
    p.add_argument("--beta", type=_beta_list, default=[0.0, 0.1, 1.0],
                   help="comma-separated beta values for position_bias_mf")
    p.add_argument("--output", default=None, help="results CSV (stdout when omitted)")
    p.set_defaults(func=cmd_benchmark)
    subs["benchmark"] = p

    p = subparsers.add_parser("sweep", help="benchmark position_bias_mf over a beta list")
    _add_data_flags(p)
    _add_training_flags(p)
    _add_metric_flags(p)
    p.add_argument("--beta", type=_beta_list, default=[0.0, 0.1, 1.0],
                   help="comma-separated beta values (at least two)")
    p.add_argument("--output", default=None, help="sweep CSV (stdout when omitted)")
    p.set_defaults(func=cmd_sweep)
    subs["sweep"] = p

    return parser, subs


def load_config_file(path: str | Path) -> dict[str, str]:
    """Read a `key = value` file; '#' starts a comment, blank lines ignored."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _apply_config(subparser: argparse.ArgumentParser, values: dict[str, str]) -> None:
    """Install config-file values as parser defaults (so flags still override)."""
    actions = {action.dest: action for action in subparser._actions}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None or key in ("help", "config"):
            continue  # keys for other subcommands are fine to ignore
        if isinstance(action, argparse._StoreTrueAction):
            value: object = _parse_bool(raw)
        elif action.type is not None:
            value = action.type(raw)
        else:
            value = raw
        subparser.set_defaults(**{key: value})


def _find_config(argv: list[str]) -> str | None:
    for pos, token in enumerate(argv):
        if token == "--config" and pos + 1 < len(argv):
            return argv[pos + 1]
        if token.startswith("--config="):
            return token.split("=", 1)[1]
    return None


def _load_dataset(args: argparse.Namespace) -> data.RatingsDataset:
    if args.format == "movielens":
        return data.load_movielens(args.input)
    return data.load_csv(
        args.input,
        user_col=args.user_col,
        item_col=args.item_col,
        rating_col=args.rating_col,
        delimiter=args.delimiter,
        has_header=args.header,
    )


def _split_dataset(args: argparse.Namespace):
    spec = data.SplitSpec(test_fraction=args.test_fraction, seed=args.seed)
    return data.split(_load_dataset(args), spec)


def _make_scorer(algorithm: str, beta: float, train_set: data.RatingsDataset,
                 args: argparse.Namespace) -> tuple[object, int, int]:
    """Train a model or construct a baseline; returns (scorer, k, epochs)."""
    if algorithm in training.ALGORITHMS:
        config = training.TrainConfig(
            algorithm=algorithm,
            k=args.k,
            learning_rate=args.lr,
            beta=beta,
            epochs=args.epochs,
            seed=args.seed,
            init_scale=args.init_scale,
            shuffle_each_epoch=not args.no_shuffle,
        )
        model, _ = training.train(train_set, config)
        return model, args.k, args.epochs
    if algorithm == "random":
        return baselines.RandomScorer(args.seed, train_set.m, train_set.r_max), 0, 0
    if algorithm == "zipf":
        return baselines.ZipfScorer.from_dataset(train_set), 0, 0
    raise ValueError(f"unknown algorithm {algorithm!r}")


def _dump_csv(fh: TextIO, header: list[str], rows: list[list[str]]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def _write_csv(output: str | None, header: list[str], rows: list[list[str]]) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            _dump_csv(fh, header, rows)
    else:
        _dump_csv(sys.stdout, header, rows)


def cmd_train(args: argparse.Namespace) -> int:
    train_set, _ = _split_dataset(args)
    config = training.TrainConfig(
        algorithm=args.algorithm,
        k=args.k,
        learning_rate=args.lr,
        beta=args.beta,
        epochs=args.epochs,
        seed=args.seed,
        init_scale=args.init_scale,
        shuffle_each_epoch=not args.no_shuffle,
    )
    model, history = training.train(train_set, config)
    save_model(model, args.output)
    history_path = Path(str(args.output) + ".history.csv")
    training.save_loss_history(history, history_path)
    print(f"final loss: {metrics.format_value(history[-1].total)}")
    print(f"wrote {args.output} and {history_path}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    train_set, test_set = _split_dataset(args)
    report = metrics.evaluate_all(
        model,
        train_set,
        test_set,
        k_top=args.k_top,
        matthew_variant=_VARIANT_MAP[args.matthew_variant],
        algorithm=args.label,
    )
    row = metrics.report_row(report, k=model.k, epochs=0, seed=args.seed)
    _write_csv(args.output, metrics.REPORT_COLUMNS, [row])
    return 0


def _run_benchmark(args: argparse.Namespace, algorithms: list[str],
                   betas: list[float]) -> int:
    """Shared engine for `benchmark` and `sweep`: one split, one row per run."""
    train_set, test_set = _split_dataset(args)
    rows: list[list[str]] = []
    had_error = False
    for algorithm in algorithms:
        for beta in betas if algorithm == "position_bias_mf" else [0.0]:
            try:
                scorer, k_used, epochs_used = _make_scorer(algorithm, beta, train_set, args)
                report = metrics.evaluate_all(
                    scorer,
                    train_set,
                    test_set,
                    k_top=args.k_top,
                    matthew_variant=_VARIANT_MAP[args.matthew_variant],
                    algorithm=algorithm,
                    beta=beta,
                )
                rows.append(
                    metrics.report_row(report, k=k_used, epochs=epochs_used, seed=args.seed)
                    + [""]
                )
            except (ValueError, RuntimeError) as exc:
                had_error = True
                rows.append(
                    [algorithm, metrics.format_value(beta), str(args.k), str(args.epochs),
                     str(args.seed), str(args.k_top), "", "", "", "", str(exc)]
                )
    _write_csv(args.output, metrics.REPORT_COLUMNS + ["error"], rows)
    return 1 if had_error else 0


def cmd_benchmark(args: argparse.Namespace) -> int:
    return _run_benchmark(args, list(args.algorithms), list(args.beta))


def cmd_sweep(args: argparse.Namespace) -> int:
    if len(args.beta) < 2:
        raise ValueError("sweep needs at least two beta values")
    return _run_benchmark(args, ["position_bias_mf"], list(args.beta))


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser, subs = build_parser()
    config_path = _find_config(argv)
    if config_path:
        try:
            values = load_config_file(config_path)
            for sub in subs.values():
                _apply_config(sub, values)
        except (OSError, ValueError, argparse.ArgumentTypeError) as exc:
            parser.error(str(exc))
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
