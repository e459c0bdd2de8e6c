import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from rlforest.dataset import Dataset
from rlforest.splitters import (NodeView, best_lebesgue_split, best_riemann_split,
                                compute_p_tilde, evaluate_node,
                                oracle_best_split_lebesgue, oracle_best_split_riemann)


def ds_of(X, y):
    return Dataset(np.asarray(X, dtype=float), np.asarray(y, dtype=float))


def test_riemann_step_example():
    ds = ds_of([[1], [2], [3], [4]], [0, 0, 1, 1])
    s = best_riemann_split(ds, NodeView.of(ds), [0])
    assert (s.feature, s.threshold) == (0, 2.5)
    assert s.gain == pytest.approx(0.25, abs=1e-15)
    assert (s.left_count, s.right_count) == (2, 2)


def test_riemann_constant_response_has_zero_gain():
    ds = ds_of([[1], [2], [3], [4]], [5, 5, 5, 5])
    s = best_riemann_split(ds, np.arange(4), [0])
    assert s.gain == 0.0


def test_riemann_constant_feature_is_absent():
    ds = ds_of([[7], [7], [7], [7]], [0, 1, 2, 3])
    assert best_riemann_split(ds, np.arange(4), [0]) is None


def test_lebesgue_examples():
    ds = ds_of(np.zeros((4, 1)), [0, 0, 1, 1])
    s = best_lebesgue_split(ds, np.arange(4))
    assert s.threshold == 0.5 and s.gain == pytest.approx(0.25, abs=1e-15)

    ds = ds_of(np.zeros((2, 1)), [0, 10])
    s = best_lebesgue_split(ds, np.arange(2))
    assert (s.threshold, s.gain, s.down_count, s.up_count) == (5.0, 25.0, 1, 1)

    ds = ds_of(np.zeros((3, 1)), [2.5, 2.5, 2.5])
    assert best_lebesgue_split(ds, np.arange(3)) is None


@pytest.mark.parametrize("rg, lg, expected", [
    (0.25, 0.25, 0.5),
    (0.1, 0.3, 0.75),
    (0.0, 0.0, None),
    (0.0, 2.0, 1.0),
])
def test_compute_p_tilde(rg, lg, expected):
    p = compute_p_tilde(rg, lg)
    if expected is None:
        assert p is None
    else:
        assert p == pytest.approx(expected, rel=1e-15)


def test_compute_p_tilde_rejects_negative_gain():
    with pytest.raises(ValueError):
        compute_p_tilde(-0.1, 0.2)


def test_input_validation():
    ds = ds_of([[1, 2], [3, 4], [5, 6]], [1, 2, 3])
    with pytest.raises(ValueError):
        best_riemann_split(ds, np.arange(3), [])
    with pytest.raises(ValueError):
        best_riemann_split(ds, np.arange(3), [2])
    with pytest.raises(ValueError):
        best_riemann_split(ds, np.array([0]), [0])
    with pytest.raises(ValueError):
        best_lebesgue_split(ds, np.array([1]))


def test_oracle_size_guard():
    rng = np.random.default_rng(0)
    ds = ds_of(rng.random((201, 1)), rng.random(201))
    with pytest.raises(ValueError):
        oracle_best_split_lebesgue(ds, np.arange(201))
    with pytest.raises(ValueError):
        oracle_best_split_riemann(ds, np.arange(201), [0])


def test_oracles_on_constant_response():
    ds = ds_of([[1], [2], [3]], [4, 4, 4])
    assert oracle_best_split_lebesgue(ds, np.arange(3)) is None
    assert best_lebesgue_split(ds, np.arange(3)) is None


def test_monotone_response_gives_equal_gains():
    rng = np.random.default_rng(3)
    x = np.sort(rng.random(30))
    y = np.cumsum(rng.random(30) + 0.1)
    ds = ds_of(x[:, None], y)
    r = oracle_best_split_riemann(ds, np.arange(30), [0])
    l = oracle_best_split_lebesgue(ds, np.arange(30))
    assert r.gain == pytest.approx(l.gain, abs=1e-10)
    assert r.left_count == l.down_count


def test_node_view_stats():
    ds = ds_of([[1], [2], [3]], [1, 2, 4])
    node = NodeView.of(ds, [0, 2])
    assert (node.count, node.total, node.total_sq) == (2, 5.0, 17.0)


def test_subset_node_uses_only_its_rows():
    ds = ds_of([[1], [2], [3], [4], [5]], [0, 0, 100, 1, 1])
    s = best_riemann_split(ds, np.array([0, 1, 3, 4]), [0])
    assert s.threshold == 3.0 and s.gain == pytest.approx(0.25)


def random_node(rng, n, d, duplicates):
    X = rng.random((n, d))
    if duplicates:
        X = np.round(X * rng.integers(2, 6), 0)
        y = rng.integers(0, 4, n).astype(float)
    else:
        y = rng.normal(size=n)
    return ds_of(X, y)


@pytest.mark.parametrize("seed", range(40))
def test_fast_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 51))
    d = int(rng.integers(1, 6))
    ds = random_node(rng, n, d, duplicates=seed % 2 == 1)
    feats = np.arange(d)
    fast, slow = best_riemann_split(ds, np.arange(n), feats), \
        oracle_best_split_riemann(ds, np.arange(n), feats)
    if slow is None:
        assert fast is None
    else:
        assert (fast.feature, fast.threshold, fast.left_count) == \
            (slow.feature, slow.threshold, slow.left_count)
        assert abs(fast.gain - slow.gain) <= 1e-10
    fast, slow = best_lebesgue_split(ds, np.arange(n)), \
        oracle_best_split_lebesgue(ds, np.arange(n))
    if slow is None:
        assert fast is None
    else:
        assert (fast.threshold, fast.down_count) == (slow.threshold, slow.down_count)
        assert abs(fast.gain - slow.gain) <= 1e-10


node_data = st.integers(2, 40).flatmap(lambda n: st.tuples(
    arrays(np.float64, (n, 3), elements=st.floats(-5, 5, allow_nan=False)),
    arrays(np.float64, n, elements=st.one_of(
        st.sampled_from([0.0, 1.0, 2.5]), st.floats(-1e3, 1e3, allow_nan=False))),
))


@settings(max_examples=150, deadline=None)
@given(node_data, st.sets(st.integers(0, 2), min_size=1))
def test_gain_dominance_and_bounds(data, feats):
    X, y = data
    ds = ds_of(X, y)
    ev = evaluate_node(ds, np.arange(len(y)), sorted(feats))
    msd = float(np.mean((y - y.mean()) ** 2))
    rg = ev.riemann.gain if ev.riemann else 0.0
    lg = ev.lebesgue.gain if ev.lebesgue else 0.0
    assert lg >= rg - 1e-12 * max(1.0, msd)
    assert 0.0 <= rg <= msd * (1 + 1e-9) + 1e-12
    assert 0.0 <= lg <= msd * (1 + 1e-9) + 1e-12
    for s, counts in ((ev.riemann, "lr"), (ev.lebesgue, "du")):
        if s is None:
            continue
        a, b = ((s.left_count, s.right_count) if counts == "lr"
                else (s.down_count, s.up_count))
        assert a >= 1 and b >= 1 and a + b == len(y)
    if ev.riemann is not None:
        below = X[:, ev.riemann.feature] < ev.riemann.threshold
        assert below.sum() == ev.riemann.left_count
    if ev.lebesgue is not None:
        assert (y < ev.lebesgue.threshold).sum() == ev.lebesgue.down_count


@settings(max_examples=100, deadline=None)
@given(node_data)
def test_fast_equals_oracle_property(data):
    X, y = data
    ds = ds_of(X, y)
    idx = np.arange(len(y))
    scale = max(1.0, float(np.mean((y - y.mean()) ** 2)))
    fast = best_lebesgue_split(ds, idx)
    slow = oracle_best_split_lebesgue(ds, idx)
    assert (fast is None) == (slow is None)
    if fast is not None:
        assert abs(fast.gain - slow.gain) <= 1e-10 * scale
