"""Portable seeded random numbers.

Network initialisation draws from SplitMix64 (Steele, Lea & Flood 2014)
implemented here in pure Python, so a given seed yields the same weights on
every platform and numpy version. Doubles are formed from the top 53 bits
of each 64-bit output.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float, shape=()) -> np.ndarray:
        n = int(np.prod(shape)) if shape else 1
        draws = [low + (high - low) * self.random() for _ in range(n)]
        return np.array(draws, dtype=np.float64).reshape(shape)
