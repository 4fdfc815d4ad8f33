"""Portable counter-based random numbers for the synthetic data generator.

Stream ``s`` of seed ``seed`` yields, for draw ``k = 0, 1, ...``::

    x_k = splitmix64(seed + (s * 2**32 + k + 1) * 0x9E3779B97F4A7C15)   (mod 2**64)

where ``splitmix64`` is the standard finaliser

    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    z =  z ^ (z >> 31)

Uniforms in (0, 1) are ``((x >> 11) + 0.5) / 2**53``.  Standard normals take
uniform pairs ``(u_{2j}, u_{2j+1})`` through Box-Muller and keep only the
cosine branch: ``sqrt(-2 ln u_{2j}) * cos(2 pi u_{2j+1})``.

Everything is exact 64-bit integer arithmetic, so any language reproduces the
same bits (the final float ops are IEEE-754 log/cos/sqrt).
"""
from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def raw(seed: int, stream: int, n: int, offset: int = 0) -> np.ndarray:
    """``n`` raw 64-bit outputs of ``stream`` starting at draw ``offset``."""
    counters = np.uint64(stream << 32) + np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        state = np.uint64(seed & _MASK) + counters * GOLDEN
    return mix64(state)


def uniform(seed: int, stream: int, n: int) -> np.ndarray:
    bits = raw(seed, stream, n) >> np.uint64(11)
    return (bits.astype(np.float64) + 0.5) * 2.0**-53


def normal(seed: int, stream: int, n: int) -> np.ndarray:
    u = uniform(seed, stream, 2 * n)
    return np.sqrt(-2.0 * np.log(u[0::2])) * np.cos(2.0 * np.pi * u[1::2])
