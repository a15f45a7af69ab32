"""Spectral fields on the two-dimensional torus [0, 2pi)^2.

A field is stored by its coefficients against the orthonormal Fourier basis

    e_k(x) = (2pi)^-1 exp(i<k, x>),   k integer mode vector,

laid out like numpy's fft2 output: along each axis the mode index runs
0, 1, ..., n/2-1, -n/2, ..., -1.  Real-valued fields satisfy the Hermitian
symmetry coeff(-k) == conj(coeff(k)).  A field is "zero-mean" iff
coeff(0) == 0.  Physical values live on the collocation grid
x_m = 2pi m / n; the round trip values -> coefficients -> values is the
identity to floating round-off.

With this normalization the L^2 norm of a field equals the Euclidean norm
of its coefficient array, a constant field of value v has coeff(0) = 2pi*v,
and the Laplacian acts as multiplication by -|k|^2 with integer modes.

The rows/columns with a mode component equal to -n/2 (unpaired Nyquist
modes) are excluded from sampled random fields and from the band-limited
contract, and product truncation keeps them zero, so fields stay exactly
Hermitian under the whole calculus.  Real fields are transformed through
half-spectrum rfft/irfft paths; arrays with broken symmetry fall back to
full complex transforms.
"""

from __future__ import annotations

import numpy as np
import scipy.fft as _sfft

TWO_PI = 2.0 * np.pi

_WORKERS = -1  # scipy.fft splits across available cores


class NonZeroMeanError(ValueError):
    """Raised when an operation defined only on zero-mean fields gets a
    field with a nonzero mode-0 coefficient."""


class GridMismatchError(ValueError):
    """Raised when two fields that must share a grid do not."""


def _fft2(a: np.ndarray) -> np.ndarray:
    return _sfft.fft2(a, workers=_WORKERS)


def _ifft2(a: np.ndarray) -> np.ndarray:
    return _sfft.ifft2(a, workers=_WORKERS)


def _rfft2(a: np.ndarray) -> np.ndarray:
    return _sfft.rfft2(a, workers=_WORKERS)


def _irfft2(a: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    return _sfft.irfft2(a, s=shape, workers=_WORKERS)


class Grid:
    """Collocation geometry for the torus [0, 2pi)^2 with n points per axis.

    n must be a power of two, at least 8.  The mode set is
    {-n/2, ..., n/2-1}^2.
    """

    __slots__ = ("n", "k1", "k2", "k_sq", "abs_k", "nyquist_mask", "_mirror")

    def __init__(self, n: int):
        n = int(n)
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 8, got {n}")
        self.n = n
        kk = np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)
        self.k1 = kk[:, None]
        self.k2 = kk[None, :]
        self.k_sq = (self.k1 * self.k1 + self.k2 * self.k2).astype(np.float64)
        self.abs_k = np.sqrt(self.k_sq)
        self.nyquist_mask = (self.k1 == -n // 2) | (self.k2 == -n // 2)
        self._mirror = (-np.arange(n)) % n  # index map i -> index of -k

    def points(self) -> np.ndarray:
        """1-d array of collocation coordinates 2pi*m/n."""
        return TWO_PI * np.arange(self.n) / self.n

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.points()
        zero = np.zeros((self.n, self.n))
        return x[:, None] + zero, x[None, :] + zero

    def mode_index(self, k1: int, k2: int) -> tuple[int, int]:
        """Array index of mode (k1, k2) in fft layout."""
        n = self.n
        if not (-n // 2 <= k1 < n // 2 and -n // 2 <= k2 < n // 2):
            raise ValueError(f"mode {(k1, k2)} not representable on grid n={n}")
        return (k1 % n, k2 % n)

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and other.n == self.n

    def __hash__(self) -> int:
        return hash(("Grid", self.n))

    def __repr__(self) -> str:
        return f"Grid(n={self.n})"


class SpectralField:
    """A field on a Grid, held as coefficients against the e_k basis.

    Treat ``coeffs`` as read-only; operations return new fields.  The
    constructor's ``real`` argument seeds the cached Hermitian-symmetry
    flag when the caller already knows it; ``is_real()`` measures it
    otherwise.
    """

    __slots__ = ("grid", "coeffs", "_realflag")

    def __init__(self, grid: Grid, coeffs: np.ndarray, real: bool | None = None):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape != (grid.n, grid.n):
            raise ValueError(
                f"coefficient array shape {coeffs.shape} does not match grid n={grid.n}"
            )
        self.grid = grid
        self.coeffs = coeffs
        self._realflag = real

    @classmethod
    def from_values(cls, grid: Grid, values: np.ndarray) -> "SpectralField":
        """Forward transform: physical samples on the n x n grid -> field."""
        values = np.asarray(values)
        if values.shape != (grid.n, grid.n):
            raise ValueError(
                f"value array shape {values.shape} does not match grid n={grid.n}"
            )
        if np.isrealobj(values):
            coeffs = _fft2(values.astype(np.float64)) * (TWO_PI / (grid.n * grid.n))
            return cls(grid, coeffs, real=True)
        coeffs = _fft2(values) * (TWO_PI / (grid.n * grid.n))
        return cls(grid, coeffs)

    def values(self) -> np.ndarray:
        """Inverse transform: complex physical samples at x_m = 2pi m/n."""
        n = self.grid.n
        return _ifft2(self.coeffs) * (n * n / TWO_PI)

    def real_values(self) -> np.ndarray:
        """Physical samples of a real field as a float array."""
        n = self.grid.n
        if self.is_real():
            half = full_to_half(self.coeffs)
            return _irfft2(half, (n, n)) * (n * n / TWO_PI)
        return self.values().real

    def values_oversampled(self, factor: int = 2) -> np.ndarray:
        """Physical samples on a factor-times finer grid (spectral padding)."""
        return phys_padded(self, factor)

    def coeff(self, k1: int, k2: int) -> complex:
        return complex(self.coeffs[self.grid.mode_index(k1, k2)])

    @property
    def mean_value(self) -> complex:
        """Average of the field over the torus: coeff(0) / 2pi."""
        return complex(self.coeffs[0, 0]) / TWO_PI

    def is_zero_mean(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.coeffs))))
        return abs(self.coeffs[0, 0]) <= tol * scale

    def hermitian_defect(self) -> float:
        """Max deviation from coeff(-k) == conj(coeff(k)); 0 for real fields."""
        m = self.grid._mirror
        mirrored = np.conj(self.coeffs[np.ix_(m, m)])
        return float(np.max(np.abs(self.coeffs - mirrored)))

    def is_real(self, tol: float = 1e-10) -> bool:
        if self._realflag is None:
            scale = max(1.0, float(np.max(np.abs(self.coeffs))))
            self._realflag = self.hermitian_defect() <= tol * scale
        return self._realflag

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.coeffs.copy(), real=self._realflag)

    def _check(self, other: "SpectralField") -> None:
        if self.grid != other.grid:
            raise GridMismatchError(
                f"grids differ: n={self.grid.n} vs n={other.grid.n}"
            )

    def _both_real(self, other: "SpectralField") -> bool | None:
        if self._realflag and other._realflag:
            return True
        return None

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs,
                             real=self._both_real(other))

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs,
                             real=self._both_real(other))

    def __mul__(self, scalar) -> "SpectralField":
        keep = self._realflag if np.isrealobj(scalar) else None
        return SpectralField(self.grid, self.coeffs * scalar, real=keep)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.grid, -self.coeffs, real=self._realflag)

    def __repr__(self) -> str:
        return f"SpectralField(n={self.grid.n})"


def pad_spectrum(coeffs: np.ndarray, factor: int = 2) -> np.ndarray:
    """Embed an n x n coefficient array into factor*n x factor*n, zero-filling
    the new high modes.  Mode content is unchanged."""
    n = coeffs.shape[0]
    m = factor * n
    pad = (m - n) // 2
    centered = np.fft.fftshift(coeffs)
    big = np.pad(centered, pad)
    return np.fft.ifftshift(big)


def truncate_spectrum(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Keep only the modes {-n/2..n/2-1}^2 of a larger coefficient array."""
    m = coeffs.shape[0]
    lo = (m - n) // 2
    centered = np.fft.fftshift(coeffs)
    return np.fft.ifftshift(centered[lo:lo + n, lo:lo + n]).copy()


def zero_nyquist(coeffs: np.ndarray) -> np.ndarray:
    """Zero the unpaired k = -n/2 row and column in place; returns input."""
    n = coeffs.shape[0]
    coeffs[n // 2, :] = 0.0
    coeffs[:, n // 2] = 0.0
    return coeffs


def full_to_half(coeffs: np.ndarray, factor: int = 1) -> np.ndarray:
    """Half-spectrum (rfft2 layout) of a Hermitian coefficient array,
    spectrally padded by ``factor``.  Unpadded, this is an exact slice and
    keeps Nyquist content; padding drops the unpaired Nyquist lines (zero
    for sampled and band-limited fields by the grid contract)."""
    n = coeffs.shape[0]
    if factor == 1:
        return coeffs[:, :n // 2 + 1].copy()
    m = factor * n
    half = np.zeros((m, m // 2 + 1), dtype=np.complex128)
    h = n // 2
    half[:h, :h] = coeffs[:h, :h]
    half[m - h + 1:, :h] = coeffs[h + 1:, :h]
    return half


def half_to_full(half: np.ndarray, n: int) -> np.ndarray:
    """Rebuild the full n x n Hermitian coefficient array from a (possibly
    larger) rfft2 half-spectrum, truncating to the base mode set and keeping
    the Nyquist lines zero."""
    m = half.shape[0]
    h = n // 2
    full = np.zeros((n, n), dtype=np.complex128)
    full[:h, :h] = half[:h, :h]
    full[h + 1:, :h] = half[m - h + 1:, :h]
    mirror = (-np.arange(n)) % n
    # columns k2 = -(n/2-1)..-1 from conjugation of columns n/2-1..1
    full[:, h + 1:] = np.conj(full[np.ix_(mirror, np.arange(h - 1, 0, -1))])
    return full


def phys_padded(u: SpectralField, factor: int = 2) -> np.ndarray:
    """Physical samples of u on the factor-times oversampled grid.

    Real fields go through the half-spectrum transform and come back as
    float arrays; complex fields through the full transform.
    """
    m = factor * u.grid.n
    scale = m * m / TWO_PI
    if u.is_real():
        half = full_to_half(u.coeffs, factor)
        return _irfft2(half, (m, m)) * scale
    return _ifft2(pad_spectrum(u.coeffs, factor)) * scale


def constant_field(grid: Grid, value: float) -> SpectralField:
    """The constant field of the given value: coeff(0) = 2pi * value."""
    coeffs = np.zeros((grid.n, grid.n), dtype=np.complex128)
    coeffs[0, 0] = TWO_PI * value
    return SpectralField(grid, coeffs, real=True)


def mode_field(grid: Grid, k1: int, k2: int, coeff: complex = 1.0) -> SpectralField:
    """Field with a single nonzero coefficient at mode (k1, k2)."""
    coeffs = np.zeros((grid.n, grid.n), dtype=np.complex128)
    coeffs[grid.mode_index(k1, k2)] = coeff
    return SpectralField(grid, coeffs)


def cosine_field(grid: Grid, k1: int, k2: int, amplitude: float = 1.0) -> SpectralField:
    """amplitude * cos(k1 x1 + k2 x2): one conjugate mode pair, zero elsewhere."""
    coeffs = np.zeros((grid.n, grid.n), dtype=np.complex128)
    c = amplitude * np.pi  # amplitude/2, scaled by the 2pi basis convention
    coeffs[grid.mode_index(k1, k2)] += c
    coeffs[grid.mode_index(-k1, -k2)] += c
    return SpectralField(grid, coeffs, real=True)


def lp_norm(u: SpectralField, p: float) -> float:
    """L^p norm over the torus, normalized so the constant 1 has norm
    (2pi)^(2/p).  p = inf takes the max of |values| on a 2x-oversampled
    grid (a plain grid max under-estimates the sup of a trigonometric
    polynomial)."""
    if p == np.inf:
        return float(np.max(np.abs(phys_padded(u, 2))))
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    vals = np.abs(u.real_values() if u.is_real() else u.values())
    cell = (TWO_PI / u.grid.n) ** 2
    return float((np.sum(vals**p) * cell) ** (1.0 / p))


def l2_norm(u: SpectralField) -> float:
    """L^2 norm; equals sqrt(sum |coeff|^2) by orthonormality of the basis."""
    return float(np.sqrt(np.sum(np.abs(u.coeffs) ** 2)))


def sup_dist(u: SpectralField, v: SpectralField) -> float:
    """Sup-norm distance on the 2x-oversampled grid."""
    return lp_norm(u - v, np.inf)
