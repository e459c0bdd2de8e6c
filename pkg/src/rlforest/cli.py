"""Command-line entry point: ``rlforest <subcommand> [flags]``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 internal error.
Failures print one JSON line ``{"error": ..., "kind": ...}`` to stderr.
Every output file is written to a temporary name and renamed into place.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .dataset import DataError, load_csv
from .evaluation import TuneGrid, bench_csv, bench_scaling, run_cv_comparison, tune
from .forest import ForestParams, ModelFormatError, fit_forest, load_forest, \
    predict_batch, save_forest
from .normality_lab import NormalityConfig, run_normality
from .rl_tree import TreeParams
from .synthgen import SyntheticSpec, generate

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

EXAMPLE_MODELS = {1: "sine", 2: "mixture"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".part")
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise DataError(f"cannot write {path}: {exc}") from exc


def _check_writable(path) -> None:
    parent = Path(path).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise DataError(f"cannot write to {path}")


def _emit(doc) -> None:
    print(json.dumps(doc))


def _p_value(mode: str, p, flag: str):
    if mode == "data":
        if p is not None:
            raise UsageError(f"{flag} is only valid with fixed mode")
        return None
    if p is None:
        raise UsageError(f"fixed mode needs {flag}")
    if not 0.0 <= p <= 1.0:
        raise UsageError(f"{flag} must lie in [0, 1], got {p}")
    return p


def _forest_params(args, p_fixed) -> ForestParams:
    try:
        tree = TreeParams(min_node=args.min_node, mtry=args.mtry,
                          m_local=args.local_trees, p_fixed=p_fixed)
        return ForestParams(args.trees, args.alpha, tree, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_synth(args) -> None:
    try:
        spec = SyntheticSpec(args.model, args.n, seed=args.seed, sigma=args.sigma,
                             d_total=args.d_total)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _check_writable(args.out)
    ds = generate(spec)
    tmp = Path(args.out).with_name(Path(args.out).name + ".part")
    ds.to_csv(tmp)
    os.replace(tmp, args.out)
    _emit({"out": str(args.out), "model": spec.model, "n": ds.n, "d": ds.d,
           "sigma": spec.sigma, "seed": spec.seed})


def cmd_train(args) -> None:
    p = _p_value(args.p_mode, args.p, "--p")
    params = _forest_params(args, p)
    _check_writable(args.out)
    ds = load_csv(args.data, args.target, log_transform=args.log_target)
    if params.tree.mtry is not None and params.tree.mtry > ds.d:
        raise UsageError(f"--mtry {params.tree.mtry} exceeds the {ds.d} features")
    forest = fit_forest(ds, params, n_jobs=args.threads)
    save_forest(forest, args.out)
    _emit({"out": str(args.out), "n": ds.n, "d": ds.d,
           "mtry": forest.params.tree.mtry, **forest.stats()})


def cmd_predict(args) -> None:
    _check_writable(args.out)
    forest = load_forest(args.model)
    ds_features = _load_features(args.data, args.target, forest.d)
    preds = predict_batch(forest, ds_features)
    lines = (["prediction"] if not args.no_header else []) + [repr(v) for v in preds.tolist()]
    _atomic_write(args.out, "\n".join(lines) + "\n")
    _emit({"out": str(args.out), "rows": int(preds.size)})


def _load_features(path, target, d):
    """Feature matrix from a CSV, with or without the target column."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    if target and target in header:
        X = load_csv(path, target).features
    else:
        try:
            X = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from exc
        if not np.all(np.isfinite(X)):
            raise DataError(f"{path}: non-finite feature values")
    if X.shape[1] != d:
        raise DataError(f"{path}: model expects {d} features, file has {X.shape[1]}")
    return X


def cmd_cv(args) -> None:
    pa = _p_value(args.p_mode_a, args.p_a, "--p-a")
    pb = _p_value(args.p_mode_b, args.p_b, "--p-b")
    params_a = _forest_params(args, pa)
    params_b = _forest_params(args, pb)
    if args.folds < 2:
        raise UsageError("--folds must be at least 2")
    _check_writable(args.report)
    ds = load_csv(args.data, args.target, log_transform=args.log_target)
    report = run_cv_comparison(ds, args.folds, params_a, params_b, args.seed,
                               n_jobs=args.threads)
    _atomic_write(args.report, json.dumps(report.to_dict(), indent=2))
    _emit({"report": str(args.report), "mean_a": report.mean_a, "mean_b": report.mean_b,
           "t": report.ttest.t, "significant": report.ttest.significant})


def cmd_tune(args) -> None:
    if (args.data is None) == (args.example is None):
        raise UsageError("give exactly one of --data or --example")
    if args.data is not None and args.target is None:
        raise UsageError("--data needs --target")
    grid = TuneGrid()
    if args.grid:
        try:
            grid = TuneGrid.from_dict(json.loads(Path(args.grid).read_text()))
        except (OSError, ValueError, TypeError) as exc:
            raise UsageError(f"bad --grid: {exc}") from exc
    _check_writable(args.report)
    if args.example is not None:
        ds = generate(SyntheticSpec(EXAMPLE_MODELS[args.example], args.n, seed=args.seed))
    else:
        ds = load_csv(args.data, args.target, log_transform=args.log_target)
    result = tune(ds, grid, args.seed, n_jobs=args.threads)
    result["example"] = args.example
    result["seed"] = args.seed
    _atomic_write(args.report, json.dumps(result, indent=2))
    _emit({"report": str(args.report), "test_mse_rlf": result["test_mse_rlf"],
           "test_mse_rf": result["test_mse_rf"]})


def cmd_bench(args) -> None:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --sizes: {exc}") from exc
    if not sizes or sizes != sorted(sizes) or min(sizes) < 2:
        raise UsageError("--sizes must be ascending integers >= 2")
    p = _p_value(args.p_mode, args.p, "--p")
    params = _forest_params(args, p)
    _check_writable(args.report)
    rows = bench_scaling(sizes, params, args.seed, n_jobs=args.threads)
    _atomic_write(args.report, bench_csv(rows))
    _emit({"report": str(args.report), "rows": rows})


def cmd_normality(args) -> None:
    try:
        cfg = NormalityConfig(n=args.n, alpha=args.alpha, m_trees=args.trees,
                              reps=args.reps, query_point=(args.x,),
                              generator=SyntheticSpec("sine", args.n),
                              seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _check_writable(args.report)
    report = run_normality(cfg)
    _atomic_write(args.report, json.dumps(report.to_dict()))
    _emit({"report": str(args.report), "ks_distance": report.ks_distance,
           "mean": report.mean, "sd": report.sd})


def _add_forest_flags(p, trees=100, alpha=0.632):
    p.add_argument("--trees", type=int, default=trees)
    p.add_argument("--local-trees", type=int, default=10)
    p.add_argument("--alpha", type=float, default=alpha)
    p.add_argument("--min-node", type=int, default=5)
    p.add_argument("--mtry", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--threads", type=int, default=0,
                        help="tree-level worker threads (0 = one per CPU)")

    parser = _Parser(prog="rlforest", description="Riemann-Lebesgue forests.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic dataset")
    p.add_argument("--model", required=True, choices=["sparse", "sine", "mixture"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--d-total", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", parents=[common], help="fit and save a forest")
    p.add_argument("--data", required=True)
    p.add_argument("--target", default="y")
    p.add_argument("--log-target", action="store_true")
    _add_forest_flags(p)
    p.add_argument("--p-mode", choices=["data", "fixed"], default="data")
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="predict with a saved forest")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--target", default="y",
                   help="column to drop from --data if present")
    p.add_argument("--no-header", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", parents=[common], help="cross-validated comparison")
    p.add_argument("--data", required=True)
    p.add_argument("--target", default="y")
    p.add_argument("--log-target", action="store_true")
    p.add_argument("--folds", type=int, default=10)
    _add_forest_flags(p)
    p.add_argument("--p-mode-a", choices=["data", "fixed"], default="data")
    p.add_argument("--p-a", type=float, default=None)
    p.add_argument("--p-mode-b", choices=["data", "fixed"], default="fixed")
    p.add_argument("--p-b", type=float, default=None)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("tune", parents=[common], help="grid tuning, RLF vs RF")
    p.add_argument("--data", default=None)
    p.add_argument("--target", default=None)
    p.add_argument("--log-target", action="store_true")
    p.add_argument("--example", type=int, choices=[1, 2], default=None)
    p.add_argument("--n", type=int, default=3000, help="sample size for --example")
    p.add_argument("--grid", default=None, help="JSON file overriding the grid")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("bench", parents=[common], help="time fit/predict vs n")
    p.add_argument("--sizes", default="500,1000,2000")
    _add_forest_flags(p)
    p.add_argument("--p-mode", choices=["data", "fixed"], default="data")
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("normality", parents=[common],
                       help="Monte Carlo normality of forest predictions")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--trees", type=int, default=200)
    p.add_argument("--reps", type=int, default=300)
    p.add_argument("--x", type=float, default=0.5)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_normality)
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": message, "kind": kind}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "cv" and args.p_mode_b == "fixed" and args.p_b is None:
            args.p_b = 1.0
        if args.threads < 0:
            raise UsageError("--threads must be >= 0")
        args.func(args)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except (DataError, ModelFormatError, FileNotFoundError) as exc:
        return _fail("data", str(exc), EXIT_DATA)
    except Exception as exc:  # noqa: BLE001
        return _fail("internal", f"{type(exc).__name__}: {exc}", EXIT_INTERNAL)
    return 0


if __name__ == "__main__":
    sys.exit(main())
