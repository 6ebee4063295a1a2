"""Rotation-at-the-minimum path transforms: exact lattice combinatorics,
exact-on-grid samplers, closed-form laws, and a statistical verification
suite binding the two together."""

from .closed_forms import (
    DensitySpec, F_a, F_z, F_zhat, f_a, f_a_spec, f_z, f_z_conditioned,
    f_z_conditioned_spec, f_zhat, maxwell_cdf, maxwell_density, mean_vb,
    meander_cross, meander_m2, meander_marginal, meander_mean,
    nonmarkov_densities, prob_above_drift, second_moment_vb,
    slope_last_segment_cdf,
)
from .experiments import (
    DEFAULT_GRID, DEFAULT_REPS, DEFAULT_SEED, EXPERIMENT_IDS,
    ExperimentReport, experiment_above_drift, experiment_biane_shift,
    experiment_decomposition, experiment_discrete_to_continuum,
    experiment_duality, experiment_meander_moments, experiment_minorant,
    experiment_moments_VB, experiment_non_markov, experiment_vervaat_limit,
    run_all, run_experiment,
)
from .gof import (
    KsResult, chi_square, correlation_z, ks_one_sample, ks_two_sample,
    moment_z, tv_discrete,
)
from .lattice import (
    BridgeEnsemble, ExactPmf, bijection_check, empirical_z_pmf,
    enumerate_bridges, factorization_check, helper_uniform_check, z_pmf,
)
from .minorant import (
    MinorantResult, convex_minorant, last_segment_slope, segment_count_stats,
)
from .paths import (
    LatticeWalk, SampledPath, dual_reverse, embed_walk, quantile_discrete,
    shift_cyclic, vervaat_discrete, vervaat_grid,
)
from .rng import RngStream, normal_quantile, uniform_block
from .samplers import (
    PROCESS_NAMES, SamplerSpec, draw, sample_bm, sample_bridge,
    sample_excursion, sample_fpb, sample_meander,
    sample_meander_pair_denisov, sample_vervaat_bridge_decomposed,
    sample_vervaat_bridge_direct,
)
from .thresholds import THRESHOLDS, Thresholds

__version__ = "0.1.0"
