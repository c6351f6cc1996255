"""Exact and Monte Carlo study of centroids of random permutation polygons."""

from .polygon import (
    CentroidSample,
    barycenter,
    centroid,
    find_zero_permutation,
    is_exact_zero,
    is_zero_solvable,
)
from .errors import BudgetExceeded, DomainError, EnumerationCapExceeded, ResourceRefusal
from .exact import (
    MomentValue,
    bernoulli,
    brute_force_moment,
    classify_composition,
    cosine_power_sum,
    distinct_cosine_sum,
    distinct_power_sum,
    exact_covariance,
    exact_moment,
    faulhaber,
    limit_moment,
    pair_moment_coefficients,
    second_moment_closed_form,
)
from .montecarlo import MomentAccumulator, SimConfig, SummaryStats, merge, run
from .perm import Permutation, RngStream, enumerate_permutations, sample_permutation
from .polynomial import IntPolynomial, cyclotomic
from .verify import (
    ConvergenceRow,
    FitReport,
    convergence_table,
    empirical_cf,
    ks_statistic,
    rayleigh_cdf,
)

__version__ = "0.1.0"
