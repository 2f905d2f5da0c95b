"""Command-line entry point.

Subcommands: train, explain, report, gen-synthetic, convert. Every command is
deterministic given its inputs and seed, never mutates its input files, and
exits 0 on success, 1 on usage errors, 2 on data errors and 3 on
runtime/numeric errors, printing a single `error: ...` line on failure.
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import metrics as metrics_mod
from . import report as report_mod
from .classifier import FcnClassifier
from .data import (apply_normalization, fit_normalization, load_dataset,
                   parse_uea_ts, serialize_native)
from .errors import DataError, McelsError, NoNeighborError, NumericError
from .explainer import MCelsExplainer
from .nun import find_nun, target_class
from .synthetic import make_two_class

DEFAULT_SEED = 42


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this artifact reserves 2
    # for data errors
    def error(self, message):
        self.exit(1, f"error: {message}\n")


def _load_config_file(path):
    defaults = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise DataError(f"{path}:{lineno}: expected key=value")
                key = key.strip().replace("-", "_")
                if key == "lambda":
                    key = "lambda_coef"
                defaults[key] = value.strip()
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from None
    return defaults


def _build_parser():
    parser = _Parser(prog="mcels",
                     description="Saliency-guided counterfactuals for "
                                 "multivariate time series classifiers")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key=value config file; flags win")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--out", default=".", help="output directory")

    p_train = sub.add_parser("train", parents=[], help="train an FCN classifier")
    add_common(p_train)
    p_train.add_argument("--train", required=True, help="training dataset path")
    p_train.add_argument("--test", help="held-out dataset for the accuracy print")
    p_train.add_argument("--format", choices=("native", "uea-ts"), default="native")
    p_train.add_argument("--checkpoint", required=True, help="checkpoint output path")
    p_train.add_argument("--lr", type=float, default=1e-3)
    p_train.add_argument("--epochs", type=int, default=200)
    p_train.add_argument("--batch-size", type=int, default=16)
    p_train.add_argument("--no-normalize", action="store_true")

    p_explain = sub.add_parser("explain", help="generate counterfactuals")
    add_common(p_explain)
    p_explain.add_argument("--checkpoint", required=True)
    p_explain.add_argument("--train", required=True, help="background dataset path")
    p_explain.add_argument("--test", required=True, help="queries to explain")
    p_explain.add_argument("--format", choices=("native", "uea-ts"), default="native")
    p_explain.add_argument("--method", choices=("mcels", "full-nun"), default="mcels")
    p_explain.add_argument("--lambda", dest="lambda_coef", type=float, default=1.0)
    p_explain.add_argument("--lr", type=float, default=0.1)
    p_explain.add_argument("--epochs", type=int, default=1000)
    p_explain.add_argument("--threshold", type=float, default=0.5)
    p_explain.add_argument("--patience", type=int, default=100)
    p_explain.add_argument("--no-normalize", action="store_true")
    p_explain.add_argument("--nun-labels", choices=("true", "predicted"), default="true")
    p_explain.add_argument("--limit", type=int, help="explain only the first N queries")
    p_explain.add_argument("--parallelism", type=int, default=os.cpu_count() or 1)

    p_report = sub.add_parser("report", help="bar charts + summary from aggregate CSVs")
    p_report.add_argument("results_dir", help="directory holding aggregate CSV files")
    p_report.add_argument("--out", help="output directory (default: results dir)")

    p_gen = sub.add_parser("gen-synthetic", help="write the two-class synthetic dataset")
    add_common(p_gen)
    p_gen.add_argument("--T", type=int, default=32, help="time steps")
    p_gen.add_argument("--D", type=int, default=3, help="dimensions")
    p_gen.add_argument("--n", type=int, default=200, help="total instances")

    p_conv = sub.add_parser("convert", help="convert a UEA .ts file to the native format")
    p_conv.add_argument("input", help="input .ts path")
    p_conv.add_argument("output", help="native-format output path")

    return parser


def _parse_args(argv):
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        defaults = _load_config_file(args.config)
        # re-parse with config values as defaults so explicit flags win
        parser = _build_parser()
        for action in parser._subparsers._group_actions[0].choices.values():
            known = {a.dest for a in action._actions}
            action.set_defaults(**{k: _coerce(action, k, v)
                                   for k, v in defaults.items() if k in known})
        args = parser.parse_args(argv)
    return args


def _coerce(subparser, dest, value):
    for action in subparser._actions:
        if action.dest == dest and action.type is not None:
            return action.type(value)
        if action.dest == dest and isinstance(action.const, bool):
            return value.lower() in ("1", "true", "yes")
    return value


def _dataset_name(ds, path):
    return ds.name or Path(path).stem


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_train(args):
    train = load_dataset(args.train, args.format)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    mean = std = None
    X_train = train.X
    if not args.no_normalize:
        mean, std = fit_normalization(train)
        X_train = apply_normalization(train.X, mean, std)

    clf = FcnClassifier(lr=args.lr, epochs=args.epochs,
                        batch_size=args.batch_size, seed=args.seed)
    clf.initialize(train.n_dims, train.n_classes)
    clf.fit(X_train, train.y, n_classes=train.n_classes)
    if mean is not None:
        clf.norm_mean_ = mean
        clf.norm_std_ = std
    clf.save(args.checkpoint)

    log_path = out_dir / "train_log.csv"
    with open(log_path, "w", encoding="utf-8") as fh:
        fh.write("epoch,loss\n")
        for epoch, loss in enumerate(clf.loss_trace_):
            fh.write(f"{epoch},{loss!r}\n")

    train_acc = float(np.mean(clf.predict(X_train) == train.y))
    print(f"train accuracy: {train_acc:.4f}")
    if args.test:
        test = load_dataset(args.test, args.format)
        X_test = test.X if mean is None else apply_normalization(test.X, mean, std)
        test_acc = float(np.mean(clf.predict(X_test) == test.y))
        print(f"test accuracy: {test_acc:.4f}")
    print(f"checkpoint written to {args.checkpoint}")
    return 0


def _explain_one(index, x, clf, explainer, background_y, method):
    """One instance; returns (index, result_or_None, metrics_or_None, error_or_None)."""
    try:
        if method == "mcels":
            result = explainer.explain(x, index)
            x_prime = result.counterfactual
            wanted = result.target_class
        else:  # full-nun baseline: replace the query wholesale
            probs = clf.forward(x)
            wanted = target_class(probs)
            nun_result = find_nun(x, explainer.background_X_, background_y, wanted)
            x_prime = nun_result.neighbor
            result = None
        inst = metrics_mod.instance_metrics(clf, x, x_prime, wanted)
        if result is not None:
            result.metrics = {
                "target_probability": inst.target_probability,
                "valid": inst.valid,
                "l1_distance": inst.l1_distance,
                "sparsity": inst.sparsity,
            }
        return index, result, inst, None
    except (NoNeighborError, NumericError) as exc:
        return index, None, None, f"{type(exc).__name__}: {exc}"


def cmd_explain(args):
    clf = FcnClassifier.load(args.checkpoint)
    train = load_dataset(args.train, args.format)
    test = load_dataset(args.test, args.format)
    if train.n_dims != clf.input_dim_ or train.n_classes != clf.n_classes_:
        raise DataError(
            f"checkpoint expects D={clf.input_dim_}, C={clf.n_classes_}; dataset "
            f"has D={train.n_dims}, C={train.n_classes}"
        )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    X_bg, X_test = train.X, test.X
    if clf.norm_mean_ is not None and not args.no_normalize:
        X_bg = apply_normalization(X_bg, clf.norm_mean_, clf.norm_std_)
        X_test = apply_normalization(X_test, clf.norm_mean_, clf.norm_std_)

    if args.nun_labels == "predicted":
        background_y = clf.predict(X_bg)
    else:
        background_y = train.y

    explainer = MCelsExplainer(
        classifier=clf, lambda_coef=args.lambda_coef, lr=args.lr,
        epochs=args.epochs, threshold=args.threshold, patience=args.patience,
        seed=args.seed,
    ).fit(X_bg, background_y)

    limit = len(X_test) if args.limit is None else min(args.limit, len(X_test))
    queries = list(enumerate(X_test[:limit]))

    workers = max(1, args.parallelism)
    if workers == 1:
        outcomes = [_explain_one(i, x, clf, explainer, background_y, args.method)
                    for i, x in queries]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(
                lambda item: _explain_one(item[0], item[1], clf, explainer,
                                          background_y, args.method),
                queries))
    outcomes.sort(key=lambda item: item[0])

    collected = []
    n_errors = 0
    for index, result, inst, error in outcomes:
        path = out_dir / f"result_{index:05d}.json"
        if error is not None:
            n_errors += 1
            path.write_text(
                '{"schema": "mcels-result v1", "error": ' + _json_str(error) + "}\n",
                encoding="utf-8")
            continue
        if result is not None:
            path.write_text(result.to_json() + "\n", encoding="utf-8")
        else:
            path.write_text(
                '{"schema": "mcels-result v1", "method": "full-nun"}\n',
                encoding="utf-8")
        collected.append(inst)

    if not collected:
        raise NumericError("no instance produced a counterfactual")
    aggregate = metrics_mod.aggregate(
        collected, dataset=_dataset_name(test, args.test), method=args.method)
    csv_path = out_dir / "aggregate.csv"
    metrics_mod.write_report_csv([aggregate], csv_path)
    print(f"explained {len(collected)}/{len(queries)} instances "
          f"({n_errors} errors); aggregate written to {csv_path}")
    return 0


def _json_str(text):
    import json
    return json.dumps(text)


def cmd_report(args):
    results_dir = Path(args.results_dir)
    if not results_dir.is_dir():
        raise DataError(f"results directory not found: {results_dir}")
    reports = []
    for path in sorted(results_dir.rglob("*.csv")):
        text = path.read_text(encoding="utf-8")
        if not text.startswith("dataset,"):
            continue
        reports.extend(metrics_mod.read_report_csv(text))
    if not reports:
        raise DataError(f"no aggregate CSV files found in {results_dir}")

    out_dir = Path(args.out) if args.out else results_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    for metric, title in report_mod.CHART_METRICS:
        groups = report_mod.reports_to_groups(reports, metric)
        svg = report_mod.bar_chart_svg(title, groups)
        (out_dir / f"{metric}.svg").write_text(svg, encoding="utf-8")
    (out_dir / "summary.md").write_text(
        report_mod.markdown_summary(reports), encoding="utf-8")
    print(f"report written to {out_dir}")
    return 0


def cmd_gen_synthetic(args):
    try:
        train, test = make_two_class(args.T, args.D, args.n, args.seed)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for split, ds in (("train", train), ("test", test)):
        path = out_dir / f"synthetic_{split}.mts"
        path.write_text(serialize_native(ds), encoding="utf-8")
        print(f"wrote {path} ({ds.n} instances)")
    return 0


def cmd_convert(args):
    try:
        text = Path(args.input).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {args.input}: {exc}") from None
    ds = parse_uea_ts(text)
    Path(args.output).write_text(serialize_native(ds), encoding="utf-8")
    print(f"converted {args.input} -> {args.output} "
          f"(n={ds.n}, T={ds.series_length}, D={ds.n_dims}, C={ds.n_classes})")
    return 0


_COMMANDS = {
    "train": cmd_train,
    "explain": cmd_explain,
    "report": cmd_report,
    "gen-synthetic": cmd_gen_synthetic,
    "convert": cmd_convert,
}


def main(argv=None):
    try:
        args = _parse_args(argv)
        return _COMMANDS[args.command](args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, McelsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # anything unexpected counts as a runtime error
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
