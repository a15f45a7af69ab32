"""Enhanced noise pairs and their calculus.

A pair bundles a candidate noise with its renormalized resonant lift:

    lift(theta, c) = (theta, theta o K theta - c)

where K inverts the negative Laplacian on zero-mean fields and the
constant -c lives in the mode-0 coefficient of the second component.  The
pair distance at regularity alpha adds the Hoelder norms of the component
differences at exponents alpha-2 and 2*alpha-2.

Translation by a zero-mean field h acts as

    T_h (F1, F2) = (F1 + h, F2 + h o K h + h o K F1 + F1 o K h),

a group action whose inverse is T_{-h}; translating a lift by h turns it
into the lift of theta + h with the same constant.

The oscillatory fields

    osc(n, c) = sqrt(c) 2^(n+1) cos(2^n <z, x>),   z = (1, 1),

carry exactly two Fourier modes; their self-resonance is c plus a wave at
twice the frequency, and as n grows both components shrink in the relevant
negative-regularity norms while staying order-one in supremum.  Combining
a sharp noise truncation with an oscillatory correction gives the
zero-translation field: the separation radius nu is chosen from the
partition's recorded annulus support so the truncated-away tail and the
oscillation occupy dyadic blocks at least two levels apart, making their
resonant products vanish on the grid (asserted numerically at build)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .fields import (
    Grid,
    GridMismatchError,
    NonZeroMeanError,
    SpectralField,
    TWO_PI,
    constant_field,
    sup_dist,
)
from .lp import DyadicPartition, holder_norm
from .noise import WhiteNoiseSample, truncate_noise
from .operators import inverse_laplacian
from .paraproduct import BlockValueCache, resonant


@dataclass(frozen=True)
class EnhancedPair:
    """Candidate noise plus renormalized resonant lift on one grid."""

    first: SpectralField
    second: SpectralField

    def __post_init__(self):
        if self.first.grid != self.second.grid:
            raise GridMismatchError("pair components live on different grids")
        if not self.first.is_zero_mean():
            raise NonZeroMeanError("first component of a pair must be zero-mean")

    @property
    def grid(self) -> Grid:
        return self.first.grid

    def __add__(self, other: "EnhancedPair") -> "EnhancedPair":
        return EnhancedPair(self.first + other.first, self.second + other.second)

    def __sub__(self, other: "EnhancedPair") -> "EnhancedPair":
        return EnhancedPair(self.first - other.first, self.second - other.second)


def enhance(theta: SpectralField, c: float, part: DyadicPartition) -> EnhancedPair:
    """The canonical lift (theta, theta o K theta - c).

    theta must be zero-mean.  The resonant product is the exact truncated
    convolution whenever theta is band-limited to n/4; for fuller spectra
    it is the dealiased grid resonance, which is still bilinear, so all the
    pair identities (shift, translation) hold on the grid regardless."""
    if not theta.is_zero_mean():
        raise NonZeroMeanError("lift requires a zero-mean first component")
    second = resonant(theta, inverse_laplacian(theta), part)
    out = second.coeffs.copy()
    out[0, 0] -= c * TWO_PI
    return EnhancedPair(theta, SpectralField(theta.grid, out,
                                             real=second._realflag))


def h_alpha_dist(
    a: EnhancedPair,
    b: EnhancedPair,
    alpha: float,
    part: DyadicPartition,
) -> float:
    """Pair distance: Hoelder norm of the first difference at alpha-2 plus
    Hoelder norm of the second difference at 2*alpha-2."""
    if a.grid != b.grid:
        raise GridMismatchError("pairs live on different grids")
    if not (2.0 / 3.0 < alpha < 1.0):
        warnings.warn(
            f"alpha={alpha} is outside the standing range (2/3, 1); "
            "distances remain well-defined but the theory does not apply",
            stacklevel=2,
        )
    return (holder_norm(a.first - b.first, alpha - 2.0, part)
            + holder_norm(a.second - b.second, 2.0 * alpha - 2.0, part))


def translate(
    xi: EnhancedPair,
    h: SpectralField,
    part: DyadicPartition,
    cache: BlockValueCache | None = None,
) -> EnhancedPair:
    """Translation T_h: shifts the first component by h and corrects the
    second by the three cross resonances."""
    if not h.is_zero_mean():
        raise NonZeroMeanError("translation field must be zero-mean")
    if h.grid != xi.grid:
        raise GridMismatchError("translation field on a different grid")
    cache = cache or BlockValueCache()
    kh = inverse_laplacian(h)
    k_first = cache.derived("inv_lap", xi.first, inverse_laplacian)
    second = (xi.second
              + resonant(h, kh, part, cache)
              + resonant(h, k_first, part, cache)
              + resonant(xi.first, kh, part, cache))
    return EnhancedPair(xi.first + h, second)


def oscillatory(n: int, c: float, grid: Grid) -> SpectralField:
    """sqrt(c) 2^(n+1) cos(2^n <z, x>) with z = (1,1): two modes at
    +-2^n(1,1), each with coefficient sqrt(c) 2^n 2pi."""
    if n < 1:
        raise ValueError(f"oscillation level must be >= 1, got {n}")
    if c < 0:
        raise ValueError(f"oscillation budget must be >= 0, got {c}")
    freq = 2**n
    # keep the self-resonance (frequency 2^(n+1), diagonal) representable
    # and alias-free: twice its component must fit under the Nyquist line
    if 2 * freq > grid.n // 4:
        raise ValueError(
            f"oscillation level {n} out of range on grid n={grid.n}: "
            f"resonance frequency {2 * freq} exceeds {grid.n // 4}"
        )
    coeffs = np.zeros((grid.n, grid.n), dtype=np.complex128)
    amp = math.sqrt(c) * 2**n * TWO_PI
    coeffs[grid.mode_index(freq, freq)] = amp
    coeffs[grid.mode_index(-freq, -freq)] = amp
    return SpectralField(grid, coeffs, real=True)


def separation_nu(part: DyadicPartition) -> float:
    """Smallest power of two nu such that modes beyond radius nu*2^n and
    the oscillation at 2^n(1,1) sit >= 2 dyadic blocks apart, read off the
    recorded annulus support radii."""
    return 2.0 ** math.ceil(math.log2(2.0 * part.r_outer))


def zero_translation_field(
    xi: WhiteNoiseSample,
    n: int,
    a: float,
    part: DyadicPartition,
) -> tuple[SpectralField, float, float]:
    """The combined field -xi^n + osc(n, c_n - a) whose translation drives
    a lift of the unit-density noise toward the constant pair (0, -a).
    Returns (field, nu, annihilation defect).

    The subtracted truncation is taken at the unit-density scaling (see
    noise.unit_density_field), the scaling at which the raw lattice
    constant c_n is the exact resonance budget, so the oscillation
    amplitude and the cancelled noise agree about what one unit of c
    means.

    Raises when c_n < a (the oscillation budget must be nonnegative) and
    when the oscillation does not fit the grid.  The block-separation
    annihilation between the truncated-away tail and the oscillation is
    asserted numerically before returning."""
    nu = separation_nu(part)
    truncated, c_n = truncate_noise(xi, n, nu)
    if c_n - a < 0:
        raise ValueError(
            f"truncation constant c_n={c_n:.6f} below the shift a={a}: "
            "the oscillation budget would be negative"
        )
    osc = oscillatory(n, c_n - a, xi.field.grid)
    tail = xi.field - truncated
    defect = sup_dist(resonant(tail, inverse_laplacian(osc), part),
                      constant_field(xi.field.grid, 0.0))
    if defect > 1e-12:
        raise RuntimeError(
            f"separation failed: tail/oscillation resonance {defect:.3e}"
        )
    return -TWO_PI * truncated + osc, nu, defect
