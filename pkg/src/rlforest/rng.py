"""Label-derived random streams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

_SEED_MASK = (1 << 63) - 1


@dataclass(frozen=True)
class RandomState:
    """A deterministic stream identified by a 63-bit seed.

    ``child(label)`` derives an independent stream from this one and an
    integer label. Two states with the same seed and the same label path
    produce identical draws, whatever else has been drawn in between.
    """

    seed: int

    def __post_init__(self):
        if not 0 <= self.seed <= _SEED_MASK:
            object.__setattr__(self, "seed", int(self.seed) & _SEED_MASK)

    def child(self, *labels: int) -> "RandomState":
        seed = self.seed
        for label in labels:
            seed = int(_kernels.derive_seed(seed, int(label)))
        return RandomState(seed)

    def uniform(self) -> float:
        """The first U[0, 1) draw of this stream."""
        return float(_kernels.stream_uniform(self.seed))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed))


def as_random_state(seed) -> RandomState:
    if isinstance(seed, RandomState):
        return seed
    return RandomState(int(seed))
