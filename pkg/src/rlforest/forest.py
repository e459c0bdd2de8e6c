"""Subagged ensembles of Riemann-Lebesgue trees."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import _kernels
from .dataset import Dataset, subsample_without_replacement
from .rl_tree import (TreeNode, TreeParams, fit_rl_tree, predict_tree_batch,
                      tree_from_dict, tree_stats, tree_to_dict)
from .rng import as_random_state

FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    """A model document that cannot be loaded."""


@dataclass(frozen=True)
class ForestParams:
    m_trees: int = 100
    alpha: float = 0.632
    tree: TreeParams = field(default_factory=TreeParams)
    seed: int = 0

    def __post_init__(self):
        if self.m_trees < 1:
            raise ValueError(f"m_trees must be >= 1, got {self.m_trees}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")

    def subsample_size(self, n: int) -> int:
        return int(math.ceil(self.alpha * n))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ForestParams":
        return cls(m_trees=int(doc["m_trees"]), alpha=float(doc["alpha"]),
                   tree=TreeParams(**doc["tree"]), seed=int(doc["seed"]))


@dataclass(frozen=True, eq=False)
class TrainedForest:
    trees: tuple
    params: ForestParams
    d: int

    def predict(self, X) -> np.ndarray:
        return predict_batch(self, X)

    def stats(self) -> dict:
        """Node counts summed over trees, plus the share of Lebesgue internal nodes."""
        total = {"leaf_count": 0, "riemann_count": 0, "lebesgue_count": 0}
        depth = 0
        for tree in self.trees:
            s = tree_stats(tree)
            for key in total:
                total[key] += s[key]
            depth = max(depth, s["depth"])
        internal = total["riemann_count"] + total["lebesgue_count"]
        total["max_depth"] = depth
        total["lebesgue_fraction"] = total["lebesgue_count"] / internal if internal else 0.0
        return total


def _resolve_jobs(n_jobs: Optional[int]) -> int:
    if not n_jobs:
        return os.cpu_count() or 1
    return max(1, int(n_jobs))


def fit_forest(ds: Dataset, params: ForestParams, n_jobs: Optional[int] = 1
               ) -> TrainedForest:
    """Fit ``m_trees`` RL trees, each on ``ceil(alpha * n)`` rows drawn without replacement.

    Tree ``i`` draws all its randomness from ``seed`` and ``i`` alone, so
    the result is identical whatever ``n_jobs`` is (0 or None means one
    worker per CPU).
    """
    k = params.subsample_size(ds.n)
    if ds.n < 2 or k < 2:
        raise ValueError(f"need at least 2 rows per tree; n={ds.n}, alpha={params.alpha}")
    tree_params = params.tree.resolve(ds.d)
    master = as_random_state(params.seed)

    def grow(i: int) -> TreeNode:
        tree_rng = master.child(i)
        sample = subsample_without_replacement(
            ds.n, k, tree_rng.child(_kernels.SUBSAMPLE).generator())
        return fit_rl_tree(ds, sample, tree_params, tree_rng.child(_kernels.ROOT))

    jobs = _resolve_jobs(n_jobs)
    if jobs == 1:
        trees = [grow(i) for i in range(params.m_trees)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            trees = list(pool.map(grow, range(params.m_trees)))
    return TrainedForest(tuple(trees), replace(params, tree=tree_params), ds.d)


def _features_of(f: TrainedForest, X) -> np.ndarray:
    if isinstance(X, Dataset):
        X = X.features
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != f.d:
        raise ValueError(f"expected rows with {f.d} features, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("feature values must be finite")
    return X


def predict_batch(f: TrainedForest, X) -> np.ndarray:
    """Mean of the member trees' predictions for every row of ``X`` (or a Dataset)."""
    X = _features_of(f, X)
    total = np.zeros(X.shape[0])
    for tree in f.trees:
        total += predict_tree_batch(tree, X)
    return total / len(f.trees)


def predict_forest(f: TrainedForest, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("x must be a single feature vector")
    return float(predict_batch(f, x[None, :])[0])


def mse(preds, targets) -> float:
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.shape != targets.shape:
        raise ValueError(f"shape mismatch: {preds.shape} vs {targets.shape}")
    if preds.size == 0:
        raise ValueError("mse of empty vectors")
    return float(np.mean((preds - targets) ** 2))


def forest_to_dict(f: TrainedForest) -> dict:
    return {"format_version": FORMAT_VERSION, "params": f.params.to_dict(), "d": f.d,
            "trees": [tree_to_dict(t) for t in f.trees]}


def forest_from_dict(doc) -> TrainedForest:
    if not isinstance(doc, dict):
        raise ModelFormatError("model document must be a JSON object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {version!r}")
    try:
        params = ForestParams.from_dict(doc["params"])
        trees = tuple(tree_from_dict(t) for t in doc["trees"])
        d = int(doc["d"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"malformed model document: {exc}") from exc
    if not trees:
        raise ModelFormatError("model has no trees")
    return TrainedForest(trees, params, d)


def dumps_forest(f: TrainedForest) -> str:
    return json.dumps(forest_to_dict(f), separators=(",", ":"))


def save_forest(f: TrainedForest, path) -> None:
    """Write the model JSON atomically (temp file, then rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".part")
    tmp.write_text(dumps_forest(f))
    os.replace(tmp, path)


def load_forest(path) -> TrainedForest:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON: {exc}") from exc
    return forest_from_dict(doc)
