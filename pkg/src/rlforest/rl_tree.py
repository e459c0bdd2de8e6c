"""Riemann-Lebesgue trees: CART trees that may also cut on the response.

At each node both the best feature cut and the best response cut are found.
A Bernoulli draw with probability ``p`` picks the feature (Riemann) cut,
otherwise the response (Lebesgue) cut. In data-driven mode ``p`` is the
Lebesgue gain's share of the two gains; in fixed mode it is a constant.

A Lebesgue node keeps a small CART forest fitted on its points. A query
cannot see its own response, so at prediction time the local forest's
estimate decides whether it goes down or up.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from . import _kernels
from .cart import CartForest, default_mtry, fit_local_forest
from .dataset import Dataset
from .rng import RandomState, as_random_state
from .splitters import SplitEvaluation, LebesgueSplit, RiemannSplit, compute_p_tilde


@dataclass(frozen=True)
class TreeParams:
    """Tree hyperparameters.

    ``p_fixed`` is the constant Riemann-cut probability; None selects the
    data-driven probability. ``mtry`` None means ``max(1, d // 3)``.
    """

    min_node: int = 5
    mtry: Optional[int] = None
    m_local: int = 10
    p_fixed: Optional[float] = None

    def __post_init__(self):
        if self.min_node < 1:
            raise ValueError(f"min_node must be >= 1, got {self.min_node}")
        if self.mtry is not None and self.mtry < 1:
            raise ValueError(f"mtry must be >= 1, got {self.mtry}")
        if self.m_local < 1:
            raise ValueError(f"m_local must be >= 1, got {self.m_local}")
        if self.p_fixed is not None and not 0.0 <= self.p_fixed <= 1.0:
            raise ValueError(f"fixed p must lie in [0, 1], got {self.p_fixed}")

    def resolve(self, d: int) -> "TreeParams":
        mtry = default_mtry(d) if self.mtry is None else self.mtry
        if mtry > d:
            raise ValueError(f"mtry={mtry} exceeds the {d} available features")
        return replace(self, mtry=mtry)


@dataclass
class Leaf:
    mean: float


@dataclass
class RiemannNode:
    feature: int
    threshold: float
    left: "TreeNode" = None
    right: "TreeNode" = None


@dataclass
class LebesgueNode:
    threshold: float
    local: CartForest
    down: "TreeNode" = None
    up: "TreeNode" = None


TreeNode = Union[Leaf, RiemannNode, LebesgueNode]


def _choose(params: TreeParams, rg: float, lg: float, u: float):
    """Return "riemann", "lebesgue" or None for one node, plus the p used.

    A drawn type with no positive-gain cut falls back to the other type,
    unless a fixed p gives that other type probability zero.
    """
    usable_r = rg > 0.0
    usable_l = lg > 0.0
    if params.p_fixed is None:
        # Gain dominance holds exactly; max() absorbs rounding in the two scans.
        p = compute_p_tilde(rg, max(lg, rg))
        fallback_r = fallback_l = True
    else:
        p = params.p_fixed
        fallback_l = p < 1.0
        fallback_r = p > 0.0
    if not (usable_r or usable_l):
        return None, p
    if u < p:
        if usable_r:
            return "riemann", p
        return ("lebesgue" if fallback_l else None), p
    if usable_l:
        return "lebesgue", p
    return ("riemann" if usable_r and fallback_r else None), p


def fit_rl_tree(ds: Dataset, sample, params: TreeParams, rng,
                trace: Optional[list] = None) -> TreeNode:
    """Grow one Riemann-Lebesgue tree on the rows ``sample``.

    Nodes with at most ``min_node`` points are leaves. Every random draw of
    a node comes from streams derived from the node's position, so the tree
    is a pure function of (data, sample, params, rng). When ``trace`` is a
    list, a SplitEvaluation is appended for every node that was searched.
    """
    sample = np.asarray(sample, dtype=np.int64)
    if sample.size == 0:
        raise ValueError("cannot grow a tree on an empty sample")
    params = params.resolve(ds.d)
    X, y = ds.features, ds.target
    rng = as_random_state(rng)

    root_box = [None]
    stack = [(sample, rng.seed, root_box, 0)]
    while stack:
        idx, seed, parent, slot = stack.pop()
        node = None
        if idx.size > params.min_node:
            feats = _kernels.draw_features(
                _kernels.derive_seed(seed, _kernels.FEATURES), ds.d, params.mtry)
            j, z, rg, nl = _kernels.riemann_search(X, y, idx, feats)
            dl, zl, lg = _kernels.lebesgue_search(y, idx)
            rg = rg if j >= 0 else 0.0
            lg = lg if dl > 0 else 0.0
            u = _kernels.stream_uniform(_kernels.derive_seed(seed, _kernels.BERNOULLI))
            kind, p = _choose(params, rg, lg, u)
            if trace is not None:
                trace.append(SplitEvaluation(
                    RiemannSplit(int(j), float(z), float(rg), int(nl),
                                 idx.size - int(nl)) if j >= 0 else None,
                    LebesgueSplit(float(zl), float(lg), int(dl),
                                  idx.size - int(dl)) if dl > 0 else None,
                    p))
            left_seed = _kernels.derive_seed(seed, _kernels.LEFT)
            right_seed = _kernels.derive_seed(seed, _kernels.RIGHT)
            if kind == "riemann":
                below = X[idx, j] < z
                node = RiemannNode(int(j), float(z))
                stack.append((idx[~below], right_seed, node, "right"))
                stack.append((idx[below], left_seed, node, "left"))
            elif kind == "lebesgue":
                local = fit_local_forest(
                    ds, idx, params.m_local,
                    RandomState(_kernels.derive_seed(seed, _kernels.LOCAL)))
                below = y[idx] < zl
                node = LebesgueNode(float(zl), local)
                stack.append((idx[~below], right_seed, node, "up"))
                stack.append((idx[below], left_seed, node, "down"))
        if node is None:
            node = Leaf(float(_kernels.leaf_mean(y, idx)))
        if parent is root_box:
            root_box[0] = node
        else:
            setattr(parent, slot, node)
    return root_box[0]


def predict_tree_batch(tree: TreeNode, X) -> np.ndarray:
    """Route every row of ``X`` to a leaf and return the leaf means."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be 2-d")
    out = np.empty(X.shape[0])
    stack = [(tree, np.arange(X.shape[0]))]
    while stack:
        node, rows = stack.pop()
        if rows.size == 0:
            continue
        if isinstance(node, Leaf):
            out[rows] = node.mean
        elif isinstance(node, RiemannNode):
            below = X[rows, node.feature] < node.threshold
            stack.append((node.left, rows[below]))
            stack.append((node.right, rows[~below]))
        else:
            below = node.local.predict(X[rows]) < node.threshold
            stack.append((node.down, rows[below]))
            stack.append((node.up, rows[~below]))
    return out


def predict_tree(tree: TreeNode, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be a single feature vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    _check_dim(tree, x.size)
    return float(predict_tree_batch(tree, x[None, :])[0])


def _check_dim(tree: TreeNode, d: int) -> None:
    need = _min_dim(tree)
    if d < need:
        raise ValueError(f"tree uses feature {need - 1}; got a vector of length {d}")


def _min_dim(tree: TreeNode) -> int:
    need = 0
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, RiemannNode):
            need = max(need, node.feature + 1)
            stack.extend((node.left, node.right))
        elif isinstance(node, LebesgueNode):
            if node.local.n_nodes:
                need = max(need, int(node.local.feature.max()) + 1)
            stack.extend((node.down, node.up))
    return need


def tree_stats(tree: TreeNode) -> dict:
    """Node-type census and depth (a lone leaf has depth 0)."""
    stats = {"leaf_count": 0, "riemann_count": 0, "lebesgue_count": 0, "depth": 0}
    stack = [(tree, 0)]
    while stack:
        node, depth = stack.pop()
        stats["depth"] = max(stats["depth"], depth)
        if isinstance(node, Leaf):
            stats["leaf_count"] += 1
        elif isinstance(node, RiemannNode):
            stats["riemann_count"] += 1
            stack.extend(((node.left, depth + 1), (node.right, depth + 1)))
        else:
            stats["lebesgue_count"] += 1
            stack.extend(((node.down, depth + 1), (node.up, depth + 1)))
    return stats


def tree_to_dict(tree: TreeNode) -> dict:
    if isinstance(tree, Leaf):
        return {"kind": "leaf", "mean": tree.mean}
    if isinstance(tree, RiemannNode):
        return {"kind": "riemann", "j": tree.feature, "z": tree.threshold,
                "left": tree_to_dict(tree.left), "right": tree_to_dict(tree.right)}
    return {"kind": "lebesgue", "zl": tree.threshold, "local": tree.local.to_dict(),
            "down": tree_to_dict(tree.down), "up": tree_to_dict(tree.up)}


def tree_from_dict(doc: dict) -> TreeNode:
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind == "leaf":
        return Leaf(float(doc["mean"]))
    if kind == "riemann":
        return RiemannNode(int(doc["j"]), float(doc["z"]),
                           tree_from_dict(doc["left"]), tree_from_dict(doc["right"]))
    if kind == "lebesgue":
        return LebesgueNode(float(doc["zl"]), CartForest.from_dict(doc["local"]),
                            tree_from_dict(doc["down"]), tree_from_dict(doc["up"]))
    raise ValueError(f"unknown tree node kind {kind!r}")
