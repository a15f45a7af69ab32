"""Pseudo-spectral laboratory for renormalized multiplicative-noise heat
equations on the two-dimensional torus.

The package provides periodic spectral fields and Fourier-multiplier
calculus, a dyadic (Littlewood-Paley) partition with Besov/Hoelder/Sobolev
norms, Bony paraproducts, spatial white noise with lattice renormalization
constants, enhanced noise pairs with a translation operator and oscillatory
approximants, an exponential-integrator PDE solver with a Feynman-Kac
cross-check, and a set of reproducible desk-scale experiments.
"""

__version__ = "0.1.0"

from .fields import (
    TWO_PI,
    Grid,
    GridMismatchError,
    NonZeroMeanError,
    SpectralField,
    constant_field,
    cosine_field,
    l2_norm,
    lp_norm,
    mode_field,
    phys_padded,
    sup_dist,
)
from .operators import (
    apply_multiplier,
    laplacian,
    inverse_laplacian,
    heat_semigroup,
    gradient,
    project_zero_mean,
    field_from_padded_values,
    dealiased_product,
)
from .lp import (
    BesovIndex,
    DyadicPartition,
    build_partition,
    lp_block,
    block_lp_norm,
    besov_norm,
    holder_norm,
    sobolev_norm,
    besov_embedding_check,
    partition_dump_rows,
)
from .paraproduct import (
    BlockValueCache,
    para_lt,
    para_gt,
    resonant,
    bony_estimate_check,
)
from .noise import (
    MOLLIFIERS,
    Mollifier,
    WhiteNoiseSample,
    sample_white_noise,
    unit_density_field,
    mollify,
    renorm_constant,
    mixed_constant,
    tail_bound,
    lattice_inverse_square_sum,
    truncate_noise,
)
from .enhancement import (
    EnhancedPair,
    enhance,
    h_alpha_dist,
    translate,
    oscillatory,
    separation_nu,
    zero_translation_field,
)
from .pde import (
    NONLINEARITIES,
    Nonlinearity,
    PicardDivergenceError,
    SolveConfig,
    Trajectory,
    solve_classical,
    solve_renormalized_mollified,
    gamma_map,
    estimate_contraction,
    feynman_kac_mc,
    point_values,
    field_hash,
)
from .fieldio import (
    write_field,
    read_field,
    write_enhanced_pair,
    read_enhanced_pair,
    write_trajectory,
    read_trajectory,
)
from .experiments import (
    EXPERIMENTS,
    ExperimentReport,
    write_report,
    read_report_dir,
)
