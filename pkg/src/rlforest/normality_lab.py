"""Monte Carlo check that subagged forest predictions at a point look Gaussian.

Each replicate draws a fresh training set, fits a forest and records its
prediction at a fixed query point. The replicate predictions are
studentized by their own mean and standard deviation and compared with the
standard normal CDF by the Kolmogorov-Smirnov distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.special import erfc

from .forest import ForestParams, fit_forest, predict_forest
from .rl_tree import TreeParams
from .rng import RandomState
from .synthgen import SyntheticSpec, generate


def normal_cdf(x):
    return 0.5 * erfc(-np.asarray(x, dtype=np.float64) / np.sqrt(2.0))


def ks_statistic(sample) -> float:
    """Exact one-sample KS distance between the sample's ECDF and N(0, 1)."""
    x = np.sort(np.asarray(sample, dtype=np.float64))
    R = x.size
    if R < 2:
        raise ValueError("need at least two values")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample must be finite")
    cdf = normal_cdf(x)
    i = np.arange(1, R + 1)
    return float(max(np.max(i / R - cdf), np.max(cdf - (i - 1) / R)))


@dataclass(frozen=True)
class NormalityConfig:
    n: int = 500
    alpha: float = 0.1
    m_trees: int = 200
    reps: int = 300
    query_point: tuple = (0.5,)
    generator: SyntheticSpec = field(default_factory=lambda: SyntheticSpec("sine", 500))
    tree: TreeParams = field(default_factory=TreeParams)
    seed: int = 0

    def __post_init__(self):
        if self.reps < 50:
            raise ValueError(f"need at least 50 replicates, got {self.reps}")
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if int(np.ceil(self.alpha * self.n)) < 2:
            raise ValueError("alpha * n must give at least two rows per tree")
        ForestParams(self.m_trees, self.alpha, self.tree, 0)


@dataclass(frozen=True)
class NormalityReport:
    replicate_predictions: np.ndarray
    ks_distance: float
    mean: float
    sd: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {"reps": int(self.replicate_predictions.size),
                "ks_distance": self.ks_distance, "mean": self.mean, "sd": self.sd,
                "degenerate": self.degenerate,
                "predictions": self.replicate_predictions.tolist()}


def forest_replicate(cfg: NormalityConfig, rng: RandomState) -> float:
    """Fit one forest on fresh data from the generator; predict at the query point."""
    data = generate(replace(cfg.generator, n=cfg.n, seed=rng.child(1).seed))
    params = ForestParams(cfg.m_trees, cfg.alpha, cfg.tree, rng.child(2).seed)
    return predict_forest(fit_forest(data, params), np.asarray(cfg.query_point))


def studentize(values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    return (values - values.mean()) / values.std(ddof=1)


def run_normality(cfg: NormalityConfig,
                  replicate: Optional[Callable[[NormalityConfig, RandomState], float]] = None,
                  progress=None) -> NormalityReport:
    """Run ``cfg.reps`` replicates and measure their distance from normality.

    ``replicate`` replaces the forest fit, e.g. with a stub of known law.
    Zero spread across replicates is reported as degenerate, with the
    distance of the centred point mass (0.5).
    """
    replicate = replicate or forest_replicate
    master = RandomState(cfg.seed)
    preds = np.empty(cfg.reps)
    for r in range(cfg.reps):
        preds[r] = replicate(cfg, master.child(r))
        if progress is not None:
            progress(r, cfg.reps)
    mean = float(preds.mean())
    sd = float(preds.std(ddof=1))
    if sd == 0.0 or not np.isfinite(sd):
        return NormalityReport(preds, ks_statistic(preds - mean), mean, 0.0, True)
    return NormalityReport(preds, ks_statistic(studentize(preds)), mean, sd)
