"""
Seeded random streams
One owner per stream; parallel consumers get derived child streams
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray


@dataclass
class RngState:
    """A seeded PCG64 stream. Identical seed and key give identical draws."""
    seed: int
    key: tuple = ()
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        seq = np.random.SeedSequence([int(self.seed) & 0xFFFFFFFFFFFFFFFF, *self.key])
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def child(self, index: int) -> "RngState":
        """Independent stream derived from (seed, key..., index)"""
        return RngState(seed=self.seed, key=(*self.key, int(index)))

    def standard_normal(self, shape) -> NDArray:
        return self.generator.standard_normal(shape)

    def uniform(self, low: float, high: float, shape) -> NDArray:
        return self.generator.uniform(low, high, shape)

    def binomial(self, n: int, p: NDArray) -> NDArray:
        return self.generator.binomial(n, p)


def child_seed(master_seed: int, run_index: int) -> int:
    """Deterministic 63-bit child seed hashed from (master seed, run index)"""
    seq = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(run_index)])
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
