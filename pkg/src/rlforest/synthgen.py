"""Seeded synthetic regression models: sparse, sine and two-component mixture."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import Dataset

SPARSE_EFFECTIVE_DIM = 35
_DEFAULT_SIGMA = {"sparse": 1.3, "sine": 1.0, "mixture": 1.0}


@dataclass(frozen=True)
class SyntheticSpec:
    model: str  # "sparse" | "sine" | "mixture"
    n: int
    seed: int = 0
    sigma: Optional[float] = None
    d_total: int = 100
    d_noise_override: Optional[int] = None

    def __post_init__(self):
        if self.model not in _DEFAULT_SIGMA:
            raise ValueError(f"unknown model {self.model!r}; "
                             f"expected one of {sorted(_DEFAULT_SIGMA)}")
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.sigma is None:
            object.__setattr__(self, "sigma", _DEFAULT_SIGMA[self.model])
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.model == "mixture" and self.sigma != 1.0:
            raise ValueError("the mixture model has unit noise by definition")
        if self.d_noise_override is not None:
            if self.d_noise_override < 0:
                raise ValueError("d_noise_override must be non-negative")
            object.__setattr__(self, "d_total",
                               SPARSE_EFFECTIVE_DIM + self.d_noise_override)
        if self.model == "sparse" and self.d_total < SPARSE_EFFECTIVE_DIM:
            raise ValueError(f"sparse model needs d_total >= {SPARSE_EFFECTIVE_DIM}, "
                             f"got {self.d_total}")


def sparse_mean(X) -> np.ndarray:
    """10 * prod_{j<5} exp(-2 x_j^2) + sum_{5<=j<35} x_j."""
    X = np.atleast_2d(X)
    return (10.0 * np.exp(-2.0 * np.sum(X[:, :5] ** 2, axis=1))
            + np.sum(X[:, 5:SPARSE_EFFECTIVE_DIM], axis=1))


def sine_mean(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        x = x[:, 0]
    return np.sin(16.0 * x)


def mixture_mean(x, component) -> np.ndarray:
    """Noiseless response of component 1 (5x) or component 2 (10 + 5x)."""
    x = np.asarray(x, dtype=np.float64)
    return 5.0 * x + 10.0 * (np.asarray(component) == 2)


def gen_sparse(spec: SyntheticSpec) -> Dataset:
    if spec.model != "sparse":
        raise ValueError(f"gen_sparse got a {spec.model!r} spec")
    rng = np.random.default_rng(spec.seed)
    X = rng.random((spec.n, spec.d_total))
    y = sparse_mean(X) + spec.sigma * rng.standard_normal(spec.n)
    return Dataset(X, y)


def gen_sine(spec: SyntheticSpec) -> Dataset:
    if spec.model != "sine":
        raise ValueError(f"gen_sine got a {spec.model!r} spec")
    rng = np.random.default_rng(spec.seed)
    x = rng.random(spec.n)
    y = np.sin(16.0 * x) + spec.sigma * rng.standard_normal(spec.n)
    return Dataset(x[:, None], y)


def gen_mixture(spec: SyntheticSpec) -> Dataset:
    """Y = 5X + eps for C = 1, 10 + 5X + eps for C = 2; C is not emitted."""
    if spec.model != "mixture":
        raise ValueError(f"gen_mixture got a {spec.model!r} spec")
    rng = np.random.default_rng(spec.seed)
    x = rng.standard_normal(spec.n)
    component = rng.integers(1, 3, size=spec.n)
    y = mixture_mean(x, component) + spec.sigma * rng.standard_normal(spec.n)
    return Dataset(x[:, None], y)


_GENERATORS = {"sparse": gen_sparse, "sine": gen_sine, "mixture": gen_mixture}


def generate(spec: SyntheticSpec) -> Dataset:
    return _GENERATORS[spec.model](spec)
