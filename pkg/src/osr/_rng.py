"""Deterministic random primitives for reproducible splits and datasets.

Manifests must be bit-identical across runs, machines, and languages, so
the generator is pinned to SplitMix64 rather than a library RNG whose
stream is an implementation detail.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


class SplitMix64:
    """SplitMix64 generator (Steele et al.); 64-bit output per step."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64
        self._spare_gauss: float | None = None

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) via modulo reduction.

        The modulo bias is < n/2**64, irrelevant for shuffling at our
        scales and trivially portable.
        """
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def next_unit(self) -> float:
        """Uniform float in (0, 1]; never 0 so log() is safe."""
        return (self.next_u64() >> 11) * 2.0**-53 + 2.0**-53

    def next_gauss(self) -> float:
        """Standard normal via Box-Muller; second value cached."""
        if self._spare_gauss is not None:
            z = self._spare_gauss
            self._spare_gauss = None
            return z
        u1 = self.next_unit()
        u2 = self.next_unit()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare_gauss = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)


def fisher_yates(items: list, rng: SplitMix64) -> list:
    """Return a shuffled copy; classic downward Fisher-Yates."""
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = rng.next_below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
