"""Shared helpers for the test suite: seeded band-limited test fields."""

from __future__ import annotations

import numpy as np

from gpamlab.fields import Grid, SpectralField


def band_mask(grid: Grid, max_freq: int) -> np.ndarray:
    """Modes with both components in [-max_freq, max_freq], Nyquist excluded."""
    m = (np.abs(grid.k1) <= max_freq) & (np.abs(grid.k2) <= max_freq)
    return m & ~grid.nyquist_mask


def random_real_field(
    grid: Grid,
    max_freq: int,
    rng: np.random.Generator,
    zero_mean: bool = True,
) -> SpectralField:
    """Random real field band-limited to |k_i| <= max_freq."""
    vals = rng.standard_normal((grid.n, grid.n))
    coeffs = SpectralField.from_values(grid, vals).coeffs * band_mask(grid, max_freq)
    if zero_mean:
        coeffs[0, 0] = 0.0
    return SpectralField(grid, coeffs, real=True)


def random_complex_field(
    grid: Grid,
    max_freq: int,
    rng: np.random.Generator,
    zero_mean: bool = True,
) -> SpectralField:
    """Random complex field (no Hermitian symmetry) band-limited likewise."""
    shape = (grid.n, grid.n)
    coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    coeffs *= band_mask(grid, max_freq)
    if zero_mean:
        coeffs[0, 0] = 0.0
    return SpectralField(grid, coeffs)


def max_coeff_diff(u: SpectralField, v: SpectralField) -> float:
    return float(np.max(np.abs(u.coeffs - v.coeffs)))
