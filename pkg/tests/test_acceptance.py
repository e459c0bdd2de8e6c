"""Acceptance criteria 1-10.

Each test carries ``@pytest.mark.criterion(k)``; the conftest prints one
PASS/FAIL line per criterion after the run. Tolerances are fixed by the
criteria and are not tuned to the results.
"""

import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from rlforest.cart import fit_cart_forest
from rlforest.cli import main as cli_main
from rlforest.dataset import Dataset, stratified_folds
from rlforest.evaluation import corrected_t
from rlforest.forest import ForestParams, fit_forest, mse, predict_batch
from rlforest.normality_lab import NormalityConfig, run_normality
from rlforest.rl_tree import TreeParams, fit_rl_tree
from rlforest.splitters import (best_lebesgue_split, best_riemann_split,
                                oracle_best_split_lebesgue, oracle_best_split_riemann)
from rlforest.synthgen import SyntheticSpec, generate


def random_nodes(count, seed, n_range=(10, 200), d_range=(1, 10)):
    """Random nodes; every other one has duplicated feature and response values."""
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        d = int(rng.integers(d_range[0], d_range[1] + 1))
        X = rng.random((n, d))
        if i % 2:
            X = np.floor(X * rng.integers(2, 8))
            y = rng.integers(0, int(rng.integers(2, 6)), n).astype(float)
        else:
            y = rng.normal(0, rng.uniform(0.1, 10), n)
        yield Dataset(X, y)


def detail(record, text):
    record("detail", text)


@pytest.mark.criterion(1)
def test_gain_dominance(record_property):
    start = time.perf_counter()
    violations = 0
    for ds in random_nodes(1000, seed=101):
        rows = np.arange(ds.n)
        r = best_riemann_split(ds, rows, np.arange(ds.d))
        l = best_lebesgue_split(ds, rows)
        rg = r.gain if r is not None else 0.0
        lg = l.gain if l is not None else 0.0
        violations += not (lg >= rg - 1e-12)
    elapsed = time.perf_counter() - start
    detail(record_property, f"violations={violations}/1000 time={elapsed:.1f}s")
    assert violations == 0
    assert elapsed < 60


@pytest.mark.criterion(2)
def test_oracle_equivalence(record_property):
    start = time.perf_counter()
    mismatches = 0
    worst = 0.0
    for ds in random_nodes(500, seed=202, n_range=(2, 50)):
        rows, feats = np.arange(ds.n), np.arange(ds.d)
        fast, slow = best_riemann_split(ds, rows, feats), \
            oracle_best_split_riemann(ds, rows, feats)
        if (fast is None) != (slow is None):
            mismatches += 1
        elif fast is not None:
            worst = max(worst, abs(fast.gain - slow.gain))
            mismatches += (fast.feature, fast.threshold) != (slow.feature, slow.threshold) \
                or abs(fast.gain - slow.gain) > 1e-10
        fast, slow = best_lebesgue_split(ds, rows), oracle_best_split_lebesgue(ds, rows)
        if (fast is None) != (slow is None):
            mismatches += 1
        elif fast is not None:
            worst = max(worst, abs(fast.gain - slow.gain))
            mismatches += fast.threshold != slow.threshold \
                or abs(fast.gain - slow.gain) > 1e-10
    elapsed = time.perf_counter() - start
    detail(record_property, f"mismatches={mismatches} max_gain_diff={worst:.2e} "
                            f"time={elapsed:.1f}s")
    assert mismatches == 0
    assert elapsed < 60


@pytest.mark.criterion(3)
def test_p_tilde_range(record_property):
    ps = []
    for i, ds in enumerate(random_nodes(1000, seed=101)):
        trace = []
        fit_rl_tree(ds, np.arange(ds.n), TreeParams(mtry=ds.d), i, trace=trace)
        ps.extend(ev.p_tilde for ev in trace if ev.p_tilde is not None)
    ps = np.asarray(ps)
    detail(record_property, f"nodes={ps.size} min={ps.min():.6f} max={ps.max():.6f}")
    assert np.all((ps >= 0.5) & (ps <= 1.0))


@pytest.mark.criterion(4)
def test_cart_degeneration(record_property):
    unequal = 0
    for seed in range(10):
        train = generate(SyntheticSpec("sparse", 500, seed=seed))
        test = generate(SyntheticSpec("sparse", 1000, seed=1000 + seed))
        rl = fit_forest(train, ForestParams(100, 0.632, TreeParams(p_fixed=1.0), seed))
        cart = fit_cart_forest(train, m_trees=100, alpha=0.632, seed=seed)
        unequal += not np.array_equal(predict_batch(rl, test), cart.predict(test.features))
    detail(record_property, f"seeds_with_differences={unequal}/10")
    assert unequal == 0


@pytest.mark.criterion(5)
@pytest.mark.slow
def test_sparse_superiority(record_property):
    rlf, rf = [], []
    for seed in range(5):
        train = generate(SyntheticSpec("sparse", 1000, seed=seed))
        test = generate(SyntheticSpec("sparse", 500, seed=100 + seed))
        for p_fixed, out in ((None, rlf), (1.0, rf)):
            params = ForestParams(100, 0.632, TreeParams(min_node=5, m_local=10,
                                                         p_fixed=p_fixed), seed)
            out.append(mse(predict_batch(fit_forest(train, params, n_jobs=0), test),
                           test.target))
    detail(record_property, f"mean_mse_rlf={np.mean(rlf):.4f} mean_mse_rf={np.mean(rf):.4f}")
    assert np.mean(rlf) < np.mean(rf)


def run_example(tmp_path, example):
    report = tmp_path / f"tune{example}.json"
    code = cli_main(["tune", "--example", str(example), "--seed", "7", "--report",
                     str(report)])
    assert code == 0
    doc = json.loads(report.read_text())
    return doc["test_mse_rlf"], doc["test_mse_rf"]


@pytest.mark.criterion(6)
@pytest.mark.slow
def test_example_1_reproduction(tmp_path, record_property):
    rlf, rf = run_example(tmp_path, 1)
    detail(record_property, f"test_mse_rlf={rlf:.4f} (1.018 +/- 0.2) "
                            f"test_mse_rf={rf:.4f} (1.283 +/- 0.2)")
    assert rlf < rf
    assert abs(rlf - 1.018) <= 0.2
    assert abs(rf - 1.283) <= 0.2


@pytest.mark.criterion(7)
@pytest.mark.slow
def test_example_2_reproduction(tmp_path, record_property):
    rlf, rf = run_example(tmp_path, 2)
    detail(record_property, f"test_mse_rlf={rlf:.3f} (29.87 +/- 3) "
                            f"test_mse_rf={rf:.3f} (35.17 +/- 3)")
    assert rlf < rf
    assert abs(rlf - 29.87) <= 3
    assert abs(rf - 35.17) <= 3


@pytest.mark.criterion(8)
@pytest.mark.slow
def test_normality(record_property):
    cfg = NormalityConfig(n=500, alpha=0.1, m_trees=200, reps=300, query_point=(0.5,),
                          generator=SyntheticSpec("sine", 500), seed=0)
    forest = run_normality(cfg)
    stub = run_normality(NormalityConfig(reps=1000, seed=1),
                         replicate=lambda cfg, rng: float(rng.generator().normal()))
    detail(record_property, f"ks_forest={forest.ks_distance:.4f} (<= 0.08) "
                            f"ks_stub={stub.ks_distance:.4f} (< 0.05)")
    assert not forest.degenerate
    assert forest.ks_distance <= 0.08
    assert stub.ks_distance < 0.05


def scripted_t(r, n1, n2):
    V = len(r)
    total = 0.0
    for v in r:
        total += v
    mean = total / V
    ss = 0.0
    for v in r:
        ss += (v - mean) * (v - mean)
    sigma2 = ss / (V - 1)
    return mean / math.sqrt((1.0 / V + n2 / n1) * sigma2)


@pytest.mark.criterion(9)
def test_corrected_t(record_property):
    rng = np.random.default_rng(909)
    worst = 0.0
    antisymmetric = True
    for _ in range(100):
        r = rng.normal(rng.normal(0, 0.5), rng.uniform(0.05, 2.0), size=10)
        res = corrected_t(r, 90, 10)
        worst = max(worst, abs(res.t - scripted_t(r.tolist(), 90.0, 10.0)))
        antisymmetric &= corrected_t(-r, 90, 10).t == -res.t
    folds = stratified_folds(Dataset(np.zeros((250, 1)), np.arange(250.0)), 10, 0)
    n1, n2 = folds.mean_sizes()
    ratio = Fraction(n2) / Fraction(n1)
    detail(record_property, f"max_abs_diff={worst:.2e} antisymmetric={antisymmetric} "
                            f"ratio={ratio}")
    assert worst <= 1e-12
    assert antisymmetric
    assert ratio == Fraction(1, 9)


@pytest.mark.criterion(10)
def test_determinism(tmp_path, record_property):
    data = tmp_path / "d.csv"
    assert cli_main(["synth", "--model", "sparse", "--n", "300", "--seed", "3",
                     "--out", str(data)]) == 0
    outs = {}
    for name, threads in (("a", 1), ("b", 1), ("c", 4)):
        path = tmp_path / f"{name}.json"
        assert cli_main(["train", "--data", str(data), "--trees", "20", "--seed", "5",
                         "--threads", str(threads), "--out", str(path)]) == 0
        outs[name] = path.read_bytes()
    repeat, parallel = outs["a"] == outs["b"], outs["a"] == outs["c"]
    detail(record_property, f"repeat_identical={repeat} threads4_equals_threads1={parallel}")
    assert repeat and parallel
