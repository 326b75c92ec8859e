"""Portable seeded random numbers: xoshiro256** seeded through splitmix64.

Both algorithms are the published reference versions (Blackman & Vigna), so
a seed reproduces the same stream on any platform or language:

    splitmix64:  x += 0x9E3779B97F4A7C15
                 z = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
                 z = (z ^ (z >> 27)) * 0x94D049BB133111EB
                 return z ^ (z >> 31)
    xoshiro256**: result = rotl(s1 * 5, 7) * 9; t = s1 << 17
                 s2 ^= s0; s3 ^= s1; s1 ^= s2; s0 ^= s3; s2 ^= t; s3 = rotl(s3, 45)

A uniform double in [0, 1) is ``(next() >> 11) * 2**-53``. This module is
the plain-integer reference; ``cowordmap.lda`` carries a compiled copy of
the same step for the sampler.
"""

from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1


def splitmix64(x: int) -> tuple[int, int]:
    """One splitmix64 step; returns ``(new_state, output)``."""
    x = (x + 0x9E3779B97F4A7C15) & MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return x, z ^ (z >> 31)


def seed_state(seed: int) -> list[int]:
    """Expand an integer seed into the four 64-bit words of xoshiro256** state."""
    x = seed & MASK
    state = []
    for _ in range(4):
        x, out = splitmix64(x)
        state.append(out)
    return state


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK


class Xoshiro256:
    def __init__(self, seed: int = 0):
        self.s = seed_state(seed)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s
        result = (_rotl((s1 * 5) & MASK, 7) * 9) & MASK
        t = (s1 << 17) & MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def randbelow(self, n: int) -> int:
        return int(self.random() * n)

    def state_array(self) -> np.ndarray:
        return np.array(self.s, dtype=np.uint64)
