"""Cross-validated comparisons, the corrected resampled t-test, grid tuning, timing."""

from __future__ import annotations

import csv
import io
import itertools
import math
import time
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .dataset import Dataset, DataError, stratified_folds
from .forest import ForestParams, fit_forest, mse, predict_batch
from .rl_tree import TreeParams
from .rng import RandomState
from .synthgen import SyntheticSpec, generate

Z95 = 1.96


@dataclass(frozen=True)
class TTestResult:
    t: float
    V: int
    n1: float
    n2: float
    sigma_hat: float
    mean_diff: float
    p_value: float
    significant: bool
    degenerate: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def corrected_t(r: Sequence[float], n1, n2, level: float = 0.05) -> TTestResult:
    """Corrected resampled t-test on per-fold differences ``r``.

    t = mean(r) / sqrt((1/V + n2/n1) * s^2), with s the sample standard
    deviation (V - 1 denominator), compared two-sided against Student-t with
    V - 1 degrees of freedom. ``n1``/``n2`` are training/testing sizes and
    may be Fractions so that the ratio is exact. Zero spread with a nonzero
    mean gives an infinite t flagged as degenerate.
    """
    r = np.asarray(r, dtype=np.float64)
    V = r.size
    if V < 2:
        raise ValueError(f"need at least 2 differences, got {V}")
    if not np.all(np.isfinite(r)):
        raise ValueError("differences must be finite")
    if n1 <= 0 or n2 <= 0:
        raise ValueError("n1 and n2 must be positive")
    ratio = float(Fraction(n2) / Fraction(n1))
    mean = float(np.sum(r) / V)
    sigma = float(np.sqrt(np.sum((r - mean) ** 2) / (V - 1)))
    df = V - 1
    if sigma == 0.0:
        if mean == 0.0:
            return TTestResult(0.0, V, float(n1), float(n2), 0.0, 0.0, 1.0, False)
        return TTestResult(math.copysign(math.inf, mean), V, float(n1), float(n2),
                           0.0, mean, 0.0, True, degenerate=True)
    t = mean / math.sqrt((1.0 / V + ratio) * sigma * sigma)
    p = float(2.0 * stats.t.sf(abs(t), df))
    return TTestResult(t, V, float(n1), float(n2), sigma, mean, p, p < level)


def margin_of_error(values) -> float:
    values = np.asarray(values, dtype=np.float64)
    return float(Z95 * np.std(values, ddof=1) / math.sqrt(values.size))


@dataclass(frozen=True)
class CvReport:
    per_fold_mse_a: list
    per_fold_mse_b: list
    mean_a: float
    mean_b: float
    margin_a: float
    margin_b: float
    ttest: TTestResult

    def to_dict(self) -> dict:
        return {"per_fold_mse_a": self.per_fold_mse_a, "per_fold_mse_b": self.per_fold_mse_b,
                "mean_a": self.mean_a, "mean_b": self.mean_b,
                "margin_a": self.margin_a, "margin_b": self.margin_b,
                "ttest": self.ttest.to_dict()}


def run_cv_comparison(ds: Dataset, V: int, params_a: ForestParams, params_b: ForestParams,
                      seed: int, n_jobs: Optional[int] = 1) -> CvReport:
    """V-fold stratified comparison of two forest configurations.

    Both configurations are trained on the same folds, each with its own
    seed; the per-fold differences (a - b) feed the corrected t-test with
    n2/n1 = 1/(V - 1).
    """
    folds = stratified_folds(ds, V, seed)
    errs_a, errs_b = [], []
    for train, test in folds.splits():
        tr, te = ds.take(train), ds.take(test)
        for params, errs in ((params_a, errs_a), (params_b, errs_b)):
            forest = fit_forest(tr, params, n_jobs=n_jobs)
            errs.append(mse(predict_batch(forest, te), te.target))
    diffs = np.asarray(errs_a) - np.asarray(errs_b)
    n1, n2 = folds.mean_sizes()
    return CvReport(errs_a, errs_b, float(np.mean(errs_a)), float(np.mean(errs_b)),
                    margin_of_error(errs_a), margin_of_error(errs_b),
                    corrected_t(diffs, n1, n2))


@dataclass(frozen=True)
class TuneGrid:
    """Hyperparameter grids for the RLF and the RF baseline.

    RLF cells sweep (p, m_local) with the ensemble size, subagging ratio and
    node size held fixed; RF cells sweep (alpha, min_node, m_trees).
    """

    rlf_p: tuple = (0.2, 0.4, 0.6, 0.8)
    rlf_m_local: tuple = (10, 20, 50)
    rlf_m_trees: int = 100
    rlf_alpha: float = 0.63
    rlf_min_node: int = 5
    rf_alpha: tuple = (0.5, 0.63, 0.8)
    rf_min_node: tuple = (5, 10, 15)
    rf_m_trees: tuple = (50, 100, 150, 200)
    ratios: tuple = (0.6, 0.2, 0.2)

    def __post_init__(self):
        for name in ("rlf_p", "rlf_m_local", "rf_alpha", "rf_min_node", "rf_m_trees"):
            if len(getattr(self, name)) == 0:
                raise ValueError(f"grid list {name} is empty")
        if len(self.ratios) != 3 or abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"split ratios must be three numbers summing to 1, "
                             f"got {self.ratios}")

    def rlf_cells(self) -> list[ForestParams]:
        return [ForestParams(self.rlf_m_trees, self.rlf_alpha,
                             TreeParams(min_node=self.rlf_min_node, m_local=ml, p_fixed=p))
                for p, ml in itertools.product(self.rlf_p, self.rlf_m_local)]

    def rf_cells(self) -> list[ForestParams]:
        return [ForestParams(m, a, TreeParams(min_node=mn, p_fixed=1.0))
                for a, mn, m in itertools.product(self.rf_alpha, self.rf_min_node,
                                                  self.rf_m_trees)]

    @classmethod
    def from_dict(cls, doc: dict) -> "TuneGrid":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown grid keys {sorted(unknown)}")
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()})


def _describe(params: ForestParams) -> dict:
    t = params.tree
    return {"m_trees": params.m_trees, "alpha": params.alpha, "min_node": t.min_node,
            "m_local": t.m_local, "p": t.p_fixed}


def split_three_way(n: int, ratios, seed: int):
    """Shuffle ``range(n)`` and cut it into train/validation/test by ``ratios``."""
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(round(ratios[0] * n))
    n_val = int(round(ratios[1] * n))
    if n_train < 2 or n_val < 1 or n - n_train - n_val < 1:
        raise DataError(f"cannot split {n} rows by {tuple(ratios)}")
    return perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:]


def tune(ds: Dataset, grid: TuneGrid, seed: int, n_jobs: Optional[int] = 1,
         progress=None) -> dict:
    """Grid search on a train/validation/test split.

    Every cell is fitted on the training part and scored on the validation
    part; the best RLF and best RF (lowest validation MSE, ties to the
    earlier cell) are then scored once on the test part.
    """
    train, val, test = split_three_way(ds.n, grid.ratios, seed)
    tr, va, te = ds.take(train), ds.take(val), ds.take(test)
    cell_rng = RandomState(seed)
    results = {}
    for family, cells in (("rlf", grid.rlf_cells()), ("rf", grid.rf_cells())):
        family_seed = cell_rng.child(1 if family == "rlf" else 2).seed
        rows = []
        best = None
        for i, params in enumerate(cells):
            params = replace(params, seed=family_seed)
            forest = fit_forest(tr, params, n_jobs=n_jobs)
            val_mse = mse(predict_batch(forest, va), va.target)
            rows.append({**_describe(params), "validation_mse": val_mse})
            if progress is not None:
                progress(family, i, len(cells), rows[-1])
            if best is None or val_mse < best[0]:
                best = (val_mse, params, forest)
        _, params, forest = best
        results[family] = {
            "best": _describe(params),
            "validation_table": sorted(rows, key=lambda r: r["validation_mse"]),
            "test_mse": mse(predict_batch(forest, te), te.target),
        }
    return {
        "best_rlf": results["rlf"]["best"],
        "best_rf": results["rf"]["best"],
        "validation_table": {"rlf": results["rlf"]["validation_table"],
                             "rf": results["rf"]["validation_table"]},
        "test_mse_rlf": results["rlf"]["test_mse"],
        "test_mse_rf": results["rf"]["test_mse"],
        "sizes": {"train": len(train), "validation": len(val), "test": len(test)},
    }


def bench_scaling(sizes: Sequence[int], params: ForestParams, seed: int,
                  n_test: int = 500, n_jobs: Optional[int] = 1) -> list[dict]:
    """Wall-clock fit and predict time on sparse-model data of each size."""
    sizes = list(sizes)
    if not sizes:
        raise ValueError("no sizes given")
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    rows = []
    test = generate(SyntheticSpec("sparse", n_test, seed=seed + 1))
    for n in sizes:
        train = generate(SyntheticSpec("sparse", n, seed=seed))
        t0 = time.perf_counter()
        forest = fit_forest(train, params, n_jobs=n_jobs)
        t1 = time.perf_counter()
        predict_batch(forest, test)
        t2 = time.perf_counter()
        rows.append({"n": n, "fit_seconds": t1 - t0, "predict_seconds": t2 - t1})
    return rows


def bench_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["n", "fit_seconds", "predict_seconds"],
                            lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
