"""Counter-based random streams (Philox4x64-10).

Every random block is a pure function of a 128-bit key and a 256-bit
counter, so substreams are addressed rather than advanced::

    key     = (seed mod 2**64, seed >> 64)
    counter = (event index, replica index, stream tag, 0)

A replica's draws therefore depend only on ``(seed, replica, tag)`` and never
on how replicas are distributed across workers.  Each simulated event
consumes exactly one block of four uniforms.

The round function is written once with operators valid for both numpy
``uint64`` arrays and numba scalars; it matches ``numpy.random.Philox``
(whose generator increments its counter before emitting a block).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import njit

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S12 = np.uint64(12)
_TWO_M52 = 2.0 ** -52
_MASK64 = (1 << 64) - 1


def _mulhilo(a, b):
    lo = a * b
    a0 = a & _LO32
    a1 = a >> _S32
    b0 = b & _LO32
    b1 = b >> _S32
    p00 = a0 * b0
    p01 = a0 * b1
    p10 = a1 * b0
    p11 = a1 * b1
    mid = (p00 >> _S32) + (p01 & _LO32) + (p10 & _LO32)
    hi = p11 + (p01 >> _S32) + (p10 >> _S32) + (mid >> _S32)
    return hi, lo


def _philox(c0, c1, c2, c3, k0, k1):
    for r in range(10):
        if r > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo(_M0, c0)
        hi1, lo1 = _mulhilo(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def philox_block(c0, c1, c2, c3, k0, k1):
    """Philox4x64-10 on numpy ``uint64`` arrays (or scalars)."""
    with np.errstate(over="ignore"):
        args = [np.asarray(v, dtype=np.uint64) for v in (c0, c1, c2, c3, k0, k1)]
        return _philox(*args)


def to_unit(x):
    """Map 64-bit words to doubles in the open interval (0, 1).

    The top 52 bits plus one half keep every value exactly representable, so
    neither endpoint can be produced by rounding.
    """
    return ((np.asarray(x, dtype=np.uint64) >> _S12).astype(np.float64) + 0.5) * _TWO_M52


_mulhilo_jit = njit(inline="always")(_mulhilo)


@njit(inline="always")
def _philox_jit(c0, c1, c2, c3, k0, k1):
    for r in range(10):
        if r > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        hi0, lo0 = _mulhilo_jit(_M0, c0)
        hi1, lo1 = _mulhilo_jit(_M1, c2)
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


@njit(inline="always")
def unit_jit(x):
    return (np.float64(x >> _S12) + 0.5) * _TWO_M52


@njit(inline="always")
def uniforms_jit(event, replica, tag, k0, k1):
    """Four uniforms for one event of one replica (numba kernels)."""
    b0, b1, b2, b3 = _philox_jit(event, replica, tag, np.uint64(0), k0, k1)
    return unit_jit(b0), unit_jit(b1), unit_jit(b2), unit_jit(b3)


def uniforms_np(event, replica, tag, k0, k1):
    """Vectorised counterpart of :func:`uniforms_jit`."""
    b = philox_block(event, replica, tag, 0, k0, k1)
    return tuple(to_unit(v) for v in b)


def seed_key(seed):
    """Split a nonnegative integer seed into the two Philox key words."""
    seed = int(seed)
    if seed < 0 or seed >= 1 << 128:
        raise ValueError(f"seed must be in [0, 2**128), got {seed}")
    return np.uint64(seed & _MASK64), np.uint64(seed >> 64)


@dataclass(frozen=True)
class Substream:
    """Address of one replica's random stream."""

    seed: int
    replica: int = 0
    tag: int = 0

    def uniforms(self, event):
        """The four uniforms of block ``event`` (for inspection and tests)."""
        k0, k1 = seed_key(self.seed)
        return tuple(float(u) for u in uniforms_np(np.uint64(event), np.uint64(self.replica),
                                                   np.uint64(self.tag), k0, k1))
