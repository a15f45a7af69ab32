r"""Spatial white noise on the torus, mollification, and the lattice
renormalization constants.

The noise is zero-mean: its mode-0 coefficient vanishes, and for every
conjugate mode pair {k, -k} one complex Gaussian (a + ib)/sqrt(2) is drawn
with unit E|coeff|^2, the partner set by conjugation.  That normalization
is forced by the covariance E[(xi,phi)(xi,psi)] = (phi,psi) -
(phi,1)(psi,1) in the orthonormal basis.  Coefficients come from the
counter-based generator keyed by (seed, stream) with the mode vector as
the counter, so a mode's draw is independent of grid size, sampling order,
and parallel layout.

Renormalization constants are pure lattice sums over Z^2 \ {0}:

    c(psi, eps)      = sum |psi(eps k)|^2 / |k|^2
    b(psi, eps)      = sum  psi(eps k)    / |k|^2     (optionally |psi|)
    c_trunc(radius)  = sum_{0 < |k| <= radius} 1 / |k|^2

evaluated exactly over a component box |k_i| <= k_cut; for mollifiers with
compact support the box covers the support and the sum is exact, otherwise
a tail overestimate is available separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import exp1

from .fields import TWO_PI, Grid, SpectralField
from .rng import mode_normals

_SQRT_HALF = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class Mollifier:
    """Radial profile psi with psi(0)=1, |psi| <= 1; compact_radius is the
    support radius of the profile, or None when unbounded."""

    name: str
    profile: Callable[[np.ndarray], np.ndarray]
    compact_radius: float | None

    def __call__(self, r: np.ndarray) -> np.ndarray:
        return self.profile(np.asarray(r, dtype=np.float64))


def _sharp(r: np.ndarray) -> np.ndarray:
    return (r <= 1.0).astype(np.float64)


def _gaussian(r: np.ndarray) -> np.ndarray:
    return np.exp(-(r * r))


def _fejer(r: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - r)


MOLLIFIERS: dict[str, Mollifier] = {
    "sharp": Mollifier("sharp", _sharp, 1.0),
    "gaussian": Mollifier("gaussian", _gaussian, None),
    "fejer": Mollifier("fejer", _fejer, 1.0),
}


@dataclass(frozen=True)
class WhiteNoiseSample:
    """One noise draw plus the key that reproduces it."""

    field: SpectralField
    seed: int
    stream: int


def sample_white_noise(grid: Grid, seed: int, stream: int = 0) -> WhiteNoiseSample:
    """Zero-mean white noise: unit-variance complex Gaussian per conjugate
    mode pair, Nyquist lines and mode 0 empty."""
    n = grid.n
    primary = (grid.k2 > 0) | ((grid.k2 == 0) & (grid.k1 > 0))
    primary = primary & ~grid.nyquist_mask
    idx = np.flatnonzero(primary.ravel())
    k1 = np.broadcast_to(grid.k1, (n, n)).ravel()[idx]
    k2 = np.broadcast_to(grid.k2, (n, n)).ravel()[idx]
    a, b = mode_normals(k1, k2, seed, stream)
    coeffs = np.zeros((n, n), dtype=np.complex128)
    coeffs.ravel()[idx] = (a + 1j * b) * _SQRT_HALF
    mirror_flat = ((-k1) % n) * n + ((-k2) % n)
    coeffs.ravel()[mirror_flat] = np.conj(coeffs.ravel()[idx])
    return WhiteNoiseSample(SpectralField(grid, coeffs, real=True), seed, stream)


def unit_density_field(xi: WhiteNoiseSample) -> SpectralField:
    """The draw rescaled to unit variance against the plain characters
    e^{i k.x} (factor 2pi over the orthonormal-basis normalization).

    At this scaling the resonant product of the noise with its
    inverse-Laplacian image has mean exactly equal to the raw lattice sums
    (c_eps, c_n), so subtracting those constants centers it; at the
    orthonormal scaling the mean would be (2pi)^-2 of that and the raw
    constants would overshoot.  Renormalized objects built from a draw
    should go through this helper.
    """
    return TWO_PI * xi.field


def mollify(xi: WhiteNoiseSample, psi: Mollifier, eps: float) -> SpectralField:
    """Coefficient-wise damping by psi(eps |k|); zero mean is preserved."""
    if eps <= 0:
        raise ValueError(f"mollification scale must be positive, got {eps}")
    u = xi.field
    weights = psi(eps * u.grid.abs_k)
    return SpectralField(u.grid, u.coeffs * weights, real=u._realflag)


def _default_k_cut(psi: Mollifier, eps: float) -> int:
    if psi.compact_radius is not None:
        return math.ceil(psi.compact_radius / eps)
    # unbounded profile: both built-in uses decay like exp(-(eps r)^2);
    # beyond 8/eps the weight is below 1e-27 and the tail bound reports it
    return math.ceil(8.0 / eps)


def _lattice_sum(term: Callable[[np.ndarray], np.ndarray], k_cut: int) -> float:
    """sum over the box 0 < max(|k1|,|k2|) <= k_cut of term(|k|^2) / |k|^2,
    accumulated in row chunks to bound memory."""
    ks = np.arange(-k_cut, k_cut + 1, dtype=np.float64)
    total = 0.0
    chunk = max(1, (1 << 22) // (2 * k_cut + 1))
    for start in range(0, ks.size, chunk):
        k1 = ks[start:start + chunk, None]
        ksq = k1 * k1 + ks[None, :] ** 2
        vals = term(ksq)
        np.divide(vals, ksq, out=vals, where=ksq > 0)
        vals[ksq == 0] = 0.0
        total += float(vals.sum())
    return total


def _check_k_cut(psi: Mollifier, eps: float, k_cut: int) -> None:
    if psi.compact_radius is not None and k_cut < psi.compact_radius / eps:
        raise ValueError(
            f"k_cut={k_cut} misses support of {psi.name} at eps={eps}: "
            f"need k_cut >= {psi.compact_radius / eps:g}"
        )


def renorm_constant(psi: Mollifier, eps: float, k_cut: int | None = None) -> float:
    """Lattice sum of |psi(eps k)|^2 / |k|^2; exact for compact profiles."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if k_cut is None:
        k_cut = _default_k_cut(psi, eps)
    _check_k_cut(psi, eps, k_cut)
    return _lattice_sum(lambda ksq: np.abs(psi(eps * np.sqrt(ksq))) ** 2, k_cut)


def mixed_constant(
    psi: Mollifier,
    eps: float,
    k_cut: int | None = None,
    absolute: bool = False,
) -> float:
    """Lattice sum of psi(eps k) / |k|^2, or of |psi(eps k)| / |k|^2 with
    ``absolute=True``.  The built-in profiles are nonnegative, so the two
    readings coincide for them."""
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if k_cut is None:
        k_cut = _default_k_cut(psi, eps)
    _check_k_cut(psi, eps, k_cut)
    if absolute:
        return _lattice_sum(lambda ksq: np.abs(psi(eps * np.sqrt(ksq))), k_cut)
    return _lattice_sum(lambda ksq: psi(eps * np.sqrt(ksq)), k_cut)


def tail_bound(psi: Mollifier, eps: float, k_cut: int, squared: bool = True) -> float:
    """Overestimate of the lattice sum's remainder beyond the box.

    Zero when the box covers a compact support.  For the gaussian profile
    the remainder of sum exp(-s eps^2 |k|^2)/|k|^2 (s = 2 when squared) is
    dominated by pi * E1(s eps^2 (k_cut - 2)^2), inflated by a safety
    factor; intended for the reporting column, valid in the regime
    eps <= 1/2, k_cut >= 4/eps used by the built-in sweeps.
    """
    if psi.compact_radius is not None:
        if k_cut >= psi.compact_radius / eps:
            return 0.0
        raise ValueError("box does not cover the compact support")
    s = 2.0 if squared else 1.0
    if k_cut <= 2:
        return math.inf
    return float(np.pi * exp1(s * eps * eps * (k_cut - 2) ** 2) * np.exp(6.0 * eps))


def lattice_inverse_square_sum(radius: float) -> float:
    """Exact sum of |k|^-2 over lattice points 0 < |k| <= radius."""
    if radius < 1:
        return 0.0
    k_cut = int(math.floor(radius))
    r_sq = float(radius) ** 2
    return _lattice_sum(lambda ksq: (ksq <= r_sq).astype(np.float64), k_cut)


def truncate_noise(
    xi: WhiteNoiseSample, n: int, nu: float
) -> tuple[SpectralField, float]:
    """Sharp spectral cutoff at radius nu * 2^n, paired with the exact
    lattice constant at that radius.

    A radius at or beyond the grid's mode coverage returns the field
    unchanged (on-grid identity); the constant still grows with the radius.
    """
    if n < 0:
        raise ValueError(f"truncation level must be >= 0, got {n}")
    radius = float(nu) * 2.0**n
    grid = xi.field.grid
    mask = grid.k_sq <= radius * radius
    out = SpectralField(grid, xi.field.coeffs * mask, real=xi.field._realflag)
    return out, lattice_inverse_square_sum(radius)
