"""Deterministic counter-based random number generation.

All randomness in this package flows through a 64-bit counter-style
generator built on the SplitMix64 finalizer.  A draw is a pure function
of (seed, derivation path), so Monte Carlo work can be reordered or
parallelized without changing results.

Scheme
------
* ``mix64`` is the SplitMix64 output function (xor-shift-multiply).
* ``derive_seed(seed, *path)`` folds integer path components (purpose
  tag, trial, level, node, slot indices) into the seed, applying the
  finalizer at every step.
* ``uniforms(seed, n)`` is the counter stream: element ``i`` is
  ``mix64(seed + GOLDEN * (i + 1))`` mapped to [0, 1) with 53-bit
  resolution.

By convention a seed value is used either as a stream (via ``uniforms``)
or for further derivation, never both, which keeps streams disjoint.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

__all__ = ["mix64", "derive_seed", "uniforms", "uniform_matrix"]


def mix64(x: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z = x & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *path: int) -> int:
    """Derive a child seed from integer path components.

    Identical (seed, path) pairs always produce identical child seeds.
    """
    s = seed & MASK64
    for p in path:
        s = mix64((s + GOLDEN * (int(p) + 1)) & MASK64)
    return s


def _mix64_array(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        return z ^ (z >> np.uint64(31))


def uniforms(seed: int, n: int) -> np.ndarray:
    """Return ``n`` uniforms in [0, 1) from the counter stream of ``seed``."""
    idx = np.arange(1, n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _mix64_array(np.uint64(seed & MASK64) + np.uint64(GOLDEN) * idx)
    return (z >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def uniform_matrix(seed: int, shape: tuple[int, ...]) -> np.ndarray:
    """Counter stream reshaped to ``shape`` (row-major counter order)."""
    n = 1
    for s in shape:
        n *= int(s)
    return uniforms(seed, n).reshape(shape)
