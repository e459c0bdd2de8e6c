"""Classical CART forests stored as flat node arrays.

These serve two roles: the local forests that Lebesgue nodes use to estimate
a query's response, and the reference subagged CART forest that a
Riemann-only RL forest must reproduce exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dataset import Dataset, subsample_without_replacement
from .rng import RandomState, as_random_state

LOCAL_MIN_NODE = 5


def default_mtry(d: int) -> int:
    return max(1, d // 3)


@dataclass(frozen=True, eq=False)
class CartForest:
    """Trees packed into parallel arrays; ``left == -1`` marks a leaf.

    ``roots[t]`` is the node slot of tree ``t``'s root.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    roots: np.ndarray

    @property
    def n_trees(self) -> int:
        return len(self.roots)

    @property
    def n_nodes(self) -> int:
        return len(self.left)

    def predict(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return _kernels.predict_cart_forest(X, self.feature, self.threshold, self.left,
                                            self.right, self.value, self.roots)

    def predict_trees(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return _kernels.predict_cart_trees(X, self.feature, self.threshold, self.left,
                                           self.right, self.value, self.roots)

    def to_dict(self) -> dict:
        return {
            "kind": "cart_forest",
            "roots": self.roots.tolist(),
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CartForest":
        if doc.get("kind") != "cart_forest":
            raise ValueError(f"expected a cart_forest record, got {doc.get('kind')!r}")
        forest = cls(
            feature=np.asarray(doc["feature"], dtype=np.int32),
            threshold=np.asarray(doc["threshold"], dtype=np.float64),
            left=np.asarray(doc["left"], dtype=np.int32),
            right=np.asarray(doc["right"], dtype=np.int32),
            value=np.asarray(doc["value"], dtype=np.float64),
            roots=np.asarray(doc["roots"], dtype=np.int64),
        )
        sizes = {len(forest.feature), len(forest.threshold), len(forest.right),
                 len(forest.value), forest.n_nodes}
        if len(sizes) != 1 or forest.n_trees == 0:
            raise ValueError("cart_forest arrays are inconsistent")
        if (np.any(forest.roots < 0) or np.any(forest.roots >= forest.n_nodes)
                or np.any(forest.left >= forest.n_nodes)
                or np.any(forest.right >= forest.n_nodes)):
            raise ValueError("cart_forest node references out of range")
        return forest


def fit_local_forest(ds: Dataset, rows: np.ndarray, n_trees: int,
                     rng: RandomState) -> CartForest:
    """Bootstrap CART forest over ``rows`` with the classical defaults."""
    rows = np.asarray(rows, dtype=np.int64)
    parts = _kernels.grow_cart_forest(ds.features, ds.target, rows, n_trees,
                                      default_mtry(ds.d), LOCAL_MIN_NODE,
                                      rng.seed, True)
    return CartForest(*parts)


def fit_cart_forest(ds: Dataset, m_trees: int = 100, alpha: float = 0.632,
                    mtry: int | None = None, min_node: int = 5,
                    seed=0) -> CartForest:
    """Reference subagged CART forest.

    Tree ``i`` sees ``ceil(alpha * n)`` rows drawn without replacement and
    is grown with the same seed derivation as an RL forest, so it matches a
    Riemann-only RL forest built with the same arguments node for node.
    """
    master = as_random_state(seed)
    mtry = default_mtry(ds.d) if mtry is None else mtry
    k = int(np.ceil(alpha * ds.n))
    arrays = []
    roots = []
    offset = 0
    for i in range(m_trees):
        tree_rng = master.child(i)
        sample = subsample_without_replacement(
            ds.n, k, tree_rng.child(_kernels.SUBSAMPLE).generator())
        cap = 2 * k - 1
        feature = np.empty(cap, dtype=np.int32)
        threshold = np.empty(cap)
        left = np.empty(cap, dtype=np.int32)
        right = np.empty(cap, dtype=np.int32)
        value = np.empty(cap)
        used = _kernels.grow_cart(ds.features, ds.target, sample, mtry, min_node,
                                  tree_rng.child(_kernels.ROOT).seed,
                                  feature, threshold, left, right, value, 0)
        shift = np.where(left[:used] >= 0, offset, 0).astype(np.int32)
        arrays.append((feature[:used], threshold[:used], left[:used] + shift,
                       right[:used] + shift, value[:used]))
        roots.append(offset)
        offset += used
    return CartForest(*(np.concatenate(col) for col in zip(*arrays)),
                      roots=np.asarray(roots, dtype=np.int64))
