"""Fourier-multiplier operators and the dealiased pointwise product.

Multipliers act coefficient-wise: (T u)^(k) = m(k) u^(k).  The heat kernel,
Laplacian, its inverse on zero-mean fields, and the gradient are the
instances the rest of the package needs.

Products of two band-limited fields are computed exactly by zero-padding
to the double grid, multiplying physical samples there, transforming back,
and truncating to the base mode set (Nyquist lines kept zero).  Whenever
the true product is band-limited to the retained mode set, the result is
the exact convolution of coefficients; in general it is that convolution
restricted to the retained modes, with no aliasing.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .fields import (
    TWO_PI,
    Grid,
    GridMismatchError,
    NonZeroMeanError,
    SpectralField,
    _fft2,
    _rfft2,
    half_to_full,
    phys_padded,
    truncate_spectrum,
    zero_nyquist,
)

Multiplier = Callable[[np.ndarray, np.ndarray], np.ndarray]


def apply_multiplier(u: SpectralField, m: Multiplier) -> SpectralField:
    """Apply a Fourier multiplier given as a function of the integer mode
    arrays (k1, k2).  The weights are used as given; a multiplier that
    breaks Hermitian symmetry produces a non-real field, visible through
    hermitian_defect()."""
    g = u.grid
    weights = m(g.k1, g.k2)
    return SpectralField(g, u.coeffs * weights)


def laplacian(u: SpectralField) -> SpectralField:
    """Laplacian: multiplication by -|k|^2."""
    return SpectralField(u.grid, u.coeffs * (-u.grid.k_sq), real=u._realflag)


def inverse_laplacian(u: SpectralField, tol: float = 1e-12) -> SpectralField:
    """K = (-Laplacian)^-1 on zero-mean fields: division by |k|^2, k != 0.

    Raises NonZeroMeanError when coeff(0) is not negligible against the
    field's largest coefficient.
    """
    if not u.is_zero_mean(tol):
        raise NonZeroMeanError(
            "inverse Laplacian is defined only on zero-mean fields; "
            f"mean coefficient is {u.coeffs[0, 0]!r}"
        )
    k_sq = u.grid.k_sq.copy()
    k_sq[0, 0] = 1.0  # dummy; the output mode 0 is forced to zero below
    out = u.coeffs / k_sq
    out[0, 0] = 0.0
    return SpectralField(u.grid, out, real=u._realflag)


def heat_semigroup(u: SpectralField, t: float) -> SpectralField:
    """exp(t * Laplacian): multiplication by exp(-t |k|^2).  t >= 0."""
    if t < 0:
        raise ValueError(f"heat semigroup needs t >= 0, got {t}")
    return SpectralField(u.grid, u.coeffs * np.exp(-u.grid.k_sq * t),
                         real=u._realflag)


def gradient(u: SpectralField) -> tuple[SpectralField, SpectralField]:
    """Both partial derivatives: multiplication by i*k1 and i*k2."""
    g = u.grid
    d1 = SpectralField(g, u.coeffs * (1j * g.k1), real=u._realflag)
    d2 = SpectralField(g, u.coeffs * (1j * g.k2), real=u._realflag)
    return d1, d2


def project_zero_mean(u: SpectralField) -> SpectralField:
    """Drop the mode-0 coefficient."""
    out = u.coeffs.copy()
    out[0, 0] = 0.0
    return SpectralField(u.grid, out, real=u._realflag)


def pad_values(u: SpectralField, factor: int = 2) -> np.ndarray:
    """Physical samples on the factor-times oversampled grid (see
    fields.phys_padded)."""
    return phys_padded(u, factor)


def field_from_padded_values(grid: Grid, vals: np.ndarray) -> SpectralField:
    """Transform samples on an oversampled grid back and truncate to the
    base mode set.  Real sample arrays stay on the half-spectrum path."""
    m = vals.shape[0]
    if np.isrealobj(vals):
        half = _rfft2(vals) * (TWO_PI / (m * m))
        return SpectralField(grid, half_to_full(half, grid.n), real=True)
    big = _fft2(vals) * (TWO_PI / (m * m))
    return SpectralField(grid, zero_nyquist(truncate_spectrum(big, grid.n)))


def dealiased_product(u: SpectralField, v: SpectralField) -> SpectralField:
    """Pointwise product via padded physical grids; alias-free truncation
    of the coefficient convolution to the base mode set."""
    if u.grid != v.grid:
        raise GridMismatchError(
            f"product needs matching grids, got n={u.grid.n} and n={v.grid.n}"
        )
    vals = phys_padded(u, 2) * phys_padded(v, 2)
    return field_from_padded_values(u.grid, vals)


def convolution_product_oracle(u: SpectralField, v: SpectralField) -> SpectralField:
    """Reference product: direct coefficient convolution

        (u v)^(s) = (2pi)^-1 sum_k u^(k) v^(s - k)

    restricted to the retained mode set (components in -(n/2-1)..n/2-1).
    Quadratic in the number of nonzero coefficients; for small tests only.
    """
    if u.grid != v.grid:
        raise GridMismatchError("oracle needs matching grids")
    n = u.grid.n
    half = n // 2
    kk = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
    out = np.zeros((n, n), dtype=np.complex128)
    nz_u = np.argwhere(u.coeffs != 0)
    nz_v = np.argwhere(v.coeffs != 0)
    for i1, i2 in nz_u:
        cu = u.coeffs[i1, i2]
        a, b = kk[i1], kk[i2]
        for j1, j2 in nz_v:
            s1, s2 = a + kk[j1], b + kk[j2]
            if -half < s1 < half and -half < s2 < half:
                out[s1 % n, s2 % n] += cu * v.coeffs[j1, j2]
    return SpectralField(u.grid, out / TWO_PI)
