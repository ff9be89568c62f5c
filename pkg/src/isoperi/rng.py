"""SplitMix64 generator for trials that must reproduce across implementations.

State update: s <- s + 0x9E3779B97F4A7C15 (mod 2^64). Output mixing:
    z = s
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z = z ^ (z >> 31)
Uniform doubles use the top 53 bits: (z >> 11) * 2^-53.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & _MASK
        z = ((z ^ (z >> 27)) * MIX2) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        if size is None:
            return low + (high - low) * self.random()
        count = int(np.prod(size))
        vals = np.array([self.random() for _ in range(count)]).reshape(size)
        return low + (high - low) * vals

    def integers(self, low: int, high: int | None = None) -> int:
        """Integer in [low, high) (or [0, low) with one argument), by rejection."""
        if high is None:
            low, high = 0, low
        span = high - low
        if span <= 0:
            raise ValueError("empty integer range")
        limit = (1 << 64) - ((1 << 64) % span)
        while True:
            z = self.next_u64()
            if z < limit:
                return low + z % span

    def spawn(self) -> "SplitMix64":
        """Independent child stream seeded from the next output."""
        return SplitMix64(self.next_u64())
