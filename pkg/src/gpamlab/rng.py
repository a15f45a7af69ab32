"""Counter-based random numbers: Philox4x64-10, vectorized over counters.

Each (key, counter) pair maps to four independent uint64 words through a
fixed bijective mixing network, so any collection of counters can be
evaluated in any order, in parallel, or one mode at a time and always
produce the same words.  The field samplers exploit this by deriving the
counter from the integer mode vector itself: a mode's random coefficient
never depends on the grid size or the iteration order.

The implementation matches numpy's ``np.random.Philox`` bit for bit (the
test suite checks this); it is re-done here because numpy's generator API
only walks counters sequentially, while the samplers need direct keyed
access per mode.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)

_MASK32 = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)
_SH11 = np.uint64(11)
_ROUNDS = 10

_INV53 = 1.0 / 9007199254740992.0  # 2^-53


def _mulhilo(a: np.uint64, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """128-bit product of a scalar and an array of uint64: (high, low) words."""
    a_hi = a >> _SH32
    a_lo = a & _MASK32
    b_hi = b >> _SH32
    b_lo = b & _MASK32
    lo = a * b  # wraps mod 2^64
    t = a_hi * b_lo + ((a_lo * b_lo) >> _SH32)
    t2 = a_lo * b_hi + (t & _MASK32)
    hi = a_hi * b_hi + (t >> _SH32) + (t2 >> _SH32)
    return hi, lo


def philox4x64(
    c0: np.ndarray,
    c1: np.ndarray,
    c2: np.ndarray,
    c3: np.ndarray,
    key0: int,
    key1: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Philox4x64-10 applied elementwise to four broadcast counter arrays."""
    x0 = np.asarray(c0, dtype=np.uint64).copy()
    x1 = np.asarray(c1, dtype=np.uint64).copy()
    x2 = np.asarray(c2, dtype=np.uint64).copy()
    x3 = np.asarray(c3, dtype=np.uint64).copy()
    x0, x1, x2, x3 = np.broadcast_arrays(x0, x1, x2, x3)
    k0 = np.uint64(key0)
    k1 = np.uint64(key1)
    with np.errstate(over="ignore"):
        for r in range(_ROUNDS):
            if r > 0:
                k0 = k0 + _W0
                k1 = k1 + _W1
            hi0, lo0 = _mulhilo(_M0, x0)
            hi1, lo1 = _mulhilo(_M1, x2)
            x0, x1, x2, x3 = hi1 ^ x1 ^ k0, lo1, hi0 ^ x3 ^ k1, lo0
    return x0, x1, x2, x3


def _open_unit(w: np.ndarray) -> np.ndarray:
    """uint64 word -> uniform in (0, 1]; safe under log."""
    return ((w >> _SH11) + np.uint64(1)).astype(np.float64) * _INV53


def _half_open_unit(w: np.ndarray) -> np.ndarray:
    """uint64 word -> uniform in [0, 1)."""
    return (w >> _SH11).astype(np.float64) * _INV53


def box_muller(w_a: np.ndarray, w_b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two uint64 word arrays -> two independent standard normal arrays."""
    r = np.sqrt(-2.0 * np.log(_open_unit(w_a)))
    theta = 2.0 * np.pi * _half_open_unit(w_b)
    return r * np.cos(theta), r * np.sin(theta)


def mode_normals(
    k1: np.ndarray,
    k2: np.ndarray,
    seed: int,
    stream: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Two standard normals per integer mode (k1, k2), keyed by
    (seed, stream).  Modes enter the counter in two's complement, so the
    value at a given mode is grid-independent."""
    c0 = np.asarray(k1, dtype=np.int64).astype(np.uint64)
    c1 = np.asarray(k2, dtype=np.int64).astype(np.uint64)
    zero = np.uint64(0)
    w0, w1, _, _ = philox4x64(c0, c1, zero, zero, seed, stream)
    return box_muller(w0, w1)


def stream_normals(seed: int, stream: int, count: int) -> np.ndarray:
    """``count`` standard normals from sequential counters under
    (seed, stream).  All four output words of each counter are used."""
    blocks = (count + 3) // 4
    idx = np.arange(blocks, dtype=np.uint64)
    zero = np.uint64(0)
    w0, w1, w2, w3 = philox4x64(idx, zero, zero, zero, seed, stream)
    z0, z1 = box_muller(w0, w1)
    z2, z3 = box_muller(w2, w3)
    out = np.empty(4 * blocks, dtype=np.float64)
    out[0::4], out[1::4], out[2::4], out[3::4] = z0, z1, z2, z3
    return out[:count]
