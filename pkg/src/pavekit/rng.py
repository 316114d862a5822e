"""Pinned pseudo-random stream for reproducible instance corpora.

SplitMix64 (Steele, Lea & Flood; finalizer constants 0x9E3779B97F4A7C15,
0xBF58476D1CE4E5B9, 0x94D049BB133111EB) drives 53-bit uniforms in (0, 1];
normals come from the Box-Muller transform.  The generator is trivial to
reimplement in any language, so seeded fixtures stay portable.
"""

from __future__ import annotations

import math

import numpy as np

GENERATOR_NAME = "splitmix64-boxmuller-v1"
GENERATOR_CONSTANTS = {
    "gamma": "0x9E3779B97F4A7C15",
    "mix1": "0xBF58476D1CE4E5B9",
    "mix2": "0x94D049BB133111EB",
}

_MASK = (1 << 64) - 1


class SplitMix64:
    """Deterministic 64-bit stream with uniform and normal draws."""

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK
        self._spare_normal: float | None = None

    def next_uint64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in (0, 1]."""
        return ((self.next_uint64() >> 11) + 1) * 2.0**-53

    def normal(self) -> float:
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
            return z
        u1 = self.uniform()
        u2 = self.uniform()
        radius = math.sqrt(-2.0 * math.log(u1))
        self._spare_normal = radius * math.sin(2.0 * math.pi * u2)
        return radius * math.cos(2.0 * math.pi * u2)

    def normals(self, *shape: int) -> np.ndarray:
        count = int(np.prod(shape)) if shape else 1
        out = np.array([self.normal() for _ in range(count)])
        return out.reshape(shape) if shape else out[0]
