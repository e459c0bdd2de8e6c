"""Optimal feature-axis (Riemann) and response-axis (Lebesgue) node splits.

Both criteria score a bipartition of the node by the decrease in mean squared
deviation of the response,

    gain = (SSE(node) - SSE(left) - SSE(right)) / N(node),

evaluated at midpoints between consecutive distinct sorted values. Points
strictly below the threshold go to the left (down) child. The fast searches
run in compiled code with running sums; the ``oracle_*`` functions recompute
every candidate from scratch and exist to check them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .dataset import Dataset

ORACLE_MAX_NODE = 200


@dataclass(frozen=True, eq=False)
class NodeView:
    """Rows of a dataset lying in one node, with cached response moments."""

    indices: np.ndarray
    count: int
    total: float
    total_sq: float

    @classmethod
    def of(cls, ds: Dataset, indices=None) -> "NodeView":
        idx = np.arange(ds.n) if indices is None else np.asarray(indices, dtype=np.int64)
        if idx.size == 0:
            raise ValueError("a node needs at least one point")
        yv = ds.target[idx]
        return cls(idx, int(idx.size), float(np.sum(yv)), float(np.sum(yv * yv)))


@dataclass(frozen=True)
class RiemannSplit:
    feature: int
    threshold: float
    gain: float
    left_count: int
    right_count: int


@dataclass(frozen=True)
class LebesgueSplit:
    threshold: float
    gain: float
    down_count: int
    up_count: int


@dataclass(frozen=True)
class SplitEvaluation:
    riemann: Optional[RiemannSplit]
    lebesgue: Optional[LebesgueSplit]
    p_tilde: Optional[float]


def _as_node(ds: Dataset, node) -> NodeView:
    return node if isinstance(node, NodeView) else NodeView.of(ds, node)


def _check_features(ds: Dataset, selected_features) -> np.ndarray:
    feats = np.unique(np.asarray(selected_features, dtype=np.int64))
    if feats.size == 0:
        raise ValueError("selected feature set is empty")
    if feats[0] < 0 or feats[-1] >= ds.d:
        raise ValueError(f"feature indices must lie in [0, {ds.d})")
    return feats


def best_riemann_split(ds: Dataset, node, selected_features: Sequence[int]
                       ) -> Optional[RiemannSplit]:
    """Best CART cut of ``node`` over ``selected_features``.

    Returns None when every selected feature is constant on the node. Ties
    (gains within 1e-12) go to the smaller feature index, then the smaller
    threshold.
    """
    node = _as_node(ds, node)
    feats = _check_features(ds, selected_features)
    if node.count < 2:
        raise ValueError("a node needs at least two points to split")
    j, z, gain, nl = _kernels.riemann_search(ds.features, ds.target, node.indices, feats)
    if j < 0:
        return None
    return RiemannSplit(int(j), float(z), float(gain), int(nl), node.count - int(nl))


def best_lebesgue_split(ds: Dataset, node) -> Optional[LebesgueSplit]:
    """Best cut of ``node`` on the response axis; None for a constant response."""
    node = _as_node(ds, node)
    if node.count < 2:
        raise ValueError("a node needs at least two points to split")
    nl, z, gain = _kernels.lebesgue_search(ds.target, node.indices)
    if nl == 0:
        return None
    return LebesgueSplit(float(z), float(gain), int(nl), node.count - int(nl))


def compute_p_tilde(riemann_gain: float, lebesgue_gain: float) -> Optional[float]:
    """Probability of a Riemann cut: lebesgue_gain / (riemann_gain + lebesgue_gain)."""
    if not (np.isfinite(riemann_gain) and np.isfinite(lebesgue_gain)):
        raise ValueError("gains must be finite")
    if riemann_gain < 0 or lebesgue_gain < 0:
        raise ValueError(f"gains must be non-negative, got "
                         f"{riemann_gain!r} and {lebesgue_gain!r}")
    denom = riemann_gain + lebesgue_gain
    if denom == 0:
        return None
    return lebesgue_gain / denom


def evaluate_node(ds: Dataset, node, selected_features) -> SplitEvaluation:
    node = _as_node(ds, node)
    riemann = best_riemann_split(ds, node, selected_features)
    lebesgue = best_lebesgue_split(ds, node)
    p = compute_p_tilde(riemann.gain if riemann else 0.0,
                        lebesgue.gain if lebesgue else 0.0)
    return SplitEvaluation(riemann, lebesgue, p)


# -- brute-force oracles -------------------------------------------------------

def _sse(v: np.ndarray) -> float:
    mean = sum(v.tolist()) / len(v)
    return sum((a - mean) ** 2 for a in v.tolist())


def _oracle_scan(values: np.ndarray, y: np.ndarray):
    """Every (threshold, gain, left_count) for cuts of ``values``, ascending."""
    n = len(y)
    parent = _sse(y)
    distinct = np.unique(values)
    out = []
    for a, b in zip(distinct[:-1], distinct[1:]):
        z = float(a + (b - a) / 2.0)
        if z <= a or z > b:
            z = float(b)
        below = values < z
        gain = (parent - _sse(y[below]) - _sse(y[~below])) / n
        out.append((z, gain, int(below.sum())))
    return out


def _guard(node: NodeView):
    if node.count > ORACLE_MAX_NODE:
        raise ValueError(f"oracle limited to {ORACLE_MAX_NODE} points, "
                         f"node has {node.count}")
    if node.count < 2:
        raise ValueError("a node needs at least two points to split")


def oracle_best_split_riemann(ds: Dataset, node, selected_features
                              ) -> Optional[RiemannSplit]:
    """Exhaustive two-pass evaluation of every candidate feature cut."""
    node = _as_node(ds, node)
    _guard(node)
    feats = _check_features(ds, selected_features)
    y = ds.target[node.indices]
    if np.all(y == y[0]):
        y = np.zeros_like(y)
    best = None
    for j in feats:
        for z, gain, nl in _oracle_scan(ds.features[node.indices, j], y):
            if best is None or gain > best.gain + _kernels.TIE:
                best = RiemannSplit(int(j), z, gain, nl, node.count - nl)
    return best


def oracle_best_split_lebesgue(ds: Dataset, node) -> Optional[LebesgueSplit]:
    """Exhaustive two-pass evaluation of every candidate response cut."""
    node = _as_node(ds, node)
    _guard(node)
    y = ds.target[node.indices]
    best = None
    for z, gain, nl in _oracle_scan(y, y):
        if best is None or gain > best.gain + _kernels.TIE:
            best = LebesgueSplit(z, gain, nl, node.count - nl)
    return best
