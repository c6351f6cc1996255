"""Goodness-of-fit statistics and pass/fail gates against the limit laws.

The limit of ``(X_n, Y_n)`` is a centred Gaussian with covariance
``diag(1/24, 1/24)``; hence ``|Z_n|`` tends to Rayleigh with
``sigma^2 = 1/24`` and the characteristic function of ``X_n`` tends to
``exp(-t^2/48)``.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import polygon as cen
from . import exact
from .errors import DomainError
from .montecarlo import SimConfig, SummaryStats, run
from .perm import Permutation

LIMIT_VARIANCE = Fraction(1, 24)


@dataclass
class FitReport:
    test: str
    statistic: float
    threshold: float
    passed: bool = field(init=False)
    sample_size: int = 0
    parameters: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.passed = bool(self.statistic <= self.threshold)

    def to_dict(self) -> dict:
        return {
            "test": self.test,
            "statistic": float(self.statistic),
            "threshold": float(self.threshold),
            "pass": self.passed,
            "sample_size": self.sample_size,
            "parameters": self.parameters,
        }

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.test}: {self.statistic:.6g} <= {self.threshold:.6g}"


@dataclass
class ConvergenceRow:
    n: int
    m: int
    exact: exact.MomentValue | None
    mc_estimate: float | None
    mc_se: float | None
    limit: Fraction
    gap: Fraction | float | None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "exact": None if self.exact is None else str(self.exact),
            "mc_estimate": self.mc_estimate,
            "mc_se": self.mc_se,
            "limit": str(self.limit),
            "gap": None if self.gap is None else str(self.gap),
        }


# -- Rayleigh law ---------------------------------------------------------------


def rayleigh_cdf(x, sigma2: float = 1 / 24):
    """``1 - exp(-x^2 / (2 sigma2))``; accepts scalars or arrays."""
    if sigma2 <= 0:
        raise DomainError("sigma2 must be positive")
    arr = np.asarray(x, dtype=np.float64)
    if np.any(arr < 0):
        raise DomainError("Rayleigh cdf is defined for x >= 0")
    out = -np.expm1(-arr * arr / (2.0 * sigma2))
    return float(out) if out.ndim == 0 else out


def rayleigh_pdf(x, sigma2: float = 1 / 24):
    arr = np.asarray(x, dtype=np.float64)
    out = arr / sigma2 * np.exp(-arr * arr / (2.0 * sigma2))
    return float(out) if out.ndim == 0 else out


def rayleigh_quantile(u, sigma2: float = 1 / 24):
    arr = np.asarray(u, dtype=np.float64)
    out = np.sqrt(-2.0 * sigma2 * np.log1p(-arr))
    return float(out) if out.ndim == 0 else out


def rayleigh_sample(size: int, rng: np.random.Generator, sigma2: float = 1 / 24) -> np.ndarray:
    """Inverse-transform draws ``sigma * sqrt(-2 ln u)`` with u in (0, 1]."""
    u = 1.0 - rng.random(size)
    return np.sqrt(sigma2) * np.sqrt(-2.0 * np.log(u))


def limit_density_2d(x, y, variance: float = 1 / 24):
    """Density of the limiting centred circular Gaussian of ``(X, Y)``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return np.exp(-(x * x + y * y) / (2 * variance)) / (2 * math.pi * variance)


# -- statistics -------------------------------------------------------------------


def ks_statistic(sorted_samples: Sequence[float], cdf: Callable) -> float:
    """Two-sided Kolmogorov-Smirnov distance of the ecdf from ``cdf``.

    ``D = max_i max(|i/N - F(x_i)|, |(i-1)/N - F(x_i)|)`` over the sorted
    sample; ``cdf`` must accept a numpy array.
    """
    xs = np.asarray(sorted_samples, dtype=np.float64)
    if xs.size == 0:
        raise DomainError("KS statistic needs at least one sample")
    if np.any(np.diff(xs) < 0):
        raise DomainError("samples must be sorted ascending")
    count = xs.size
    f = np.asarray(cdf(xs), dtype=np.float64)
    i = np.arange(1, count + 1, dtype=np.float64)
    upper = np.abs(i / count - f)
    lower = np.abs((i - 1) / count - f)
    return float(max(upper.max(), lower.max()))


def empirical_cf(samples_x: Sequence[float], t: float) -> tuple[float, float]:
    xs = np.asarray(samples_x, dtype=np.float64)
    if xs.size == 0:
        raise DomainError("empirical cf needs at least one sample")
    return float(np.mean(np.cos(t * xs))), float(np.mean(np.sin(t * xs)))


def limit_cf(t: float) -> float:
    return math.exp(-t * t / 48.0)


def convergence_table(
    n_list: Iterable[int],
    m_list: Iterable[int],
    mc_results: Mapping[int, SummaryStats] | None = None,
    axis: str = "real",
) -> list[ConvergenceRow]:
    """Exact, Monte Carlo and limiting moments side by side.

    ``mc_results`` maps ``n`` to a :class:`SummaryStats`; rows whose moment
    order is beyond the exact cap are emitted with ``exact=None``.
    """
    mc_results = mc_results or {}
    rows = []
    for n in n_list:
        for m in m_list:
            limit = exact.limit_moment(m)
            try:
                value = exact.exact_moment(n, m, axis)
            except DomainError:
                value = None
            est = se = None
            stats = mc_results.get(n)
            if stats is not None and m <= stats.config.max_moment:
                mom = stats.moment("x" if axis == "real" else "y", m)
                est, se = mom.estimate, mom.se
            if value is not None and value.is_rational():
                gap = abs(value.as_fraction() - limit)
            elif value is not None:
                gap = abs(float(value) - float(limit))
            elif est is not None:
                gap = abs(est - float(limit))
            else:
                gap = None
            rows.append(ConvergenceRow(n, m, value, est, se, limit, gap))
    return rows


# -- gates ----------------------------------------------------------------------


def _equality_report(test: str, lhs, rhs, **params) -> FitReport:
    return FitReport(test, 0.0 if lhs == rhs else 1.0, 0.0, parameters=params)


def _zscore_report(test: str, estimate: float, target: float, se: float,
                   samples: int, **params) -> FitReport:
    z = abs(estimate - target) / se if se > 0 else (0.0 if estimate == target else math.inf)
    params.update(estimate=estimate, target=target, se=se)
    return FitReport(test, z, 3.0, sample_size=samples, parameters=params)


def oracle_suite(ns: Iterable[int] = range(3, 8), ms: Iterable[int] = range(1, 5)) -> list[FitReport]:
    """Composition expansion versus exhaustive cyclotomic averaging."""
    reports = []
    for n in ns:
        for m in ms:
            for axis in exact.AXES:
                lhs = exact.exact_moment(n, m, axis)
                rhs = exact.brute_force_moment(n, m, axis)
                reports.append(_equality_report(
                    f"oracle n={n} m={m} {axis}", lhs, rhs, n=n, m=m, axis=axis,
                    exact=str(lhs), brute_force=str(rhs),
                ))
    return reports


def second_moment_suite(ns: Iterable[int] = range(3, 51)) -> list[FitReport]:
    reports = []
    limit = exact.limit_moment(2)
    for n in ns:
        value = exact.exact_moment(n, 2).as_fraction()
        ok = value == Fraction(n + 1, 24 * n) and value - limit == Fraction(1, 24 * n)
        reports.append(FitReport(f"second moment n={n}", 0.0 if ok else 1.0, 0.0,
                                 parameters={"n": n, "exact": str(value)}))
    return reports


def limit_moment_suite(ms: Iterable[int] = range(1, 9)) -> list[FitReport]:
    reports = []
    for m in ms:
        if m % 2:
            expected = Fraction(0)
        else:
            k = m // 2
            double_fact = math.prod(range(1, 2 * k, 2))
            expected = Fraction(double_fact, 24**k)
        got = exact.limit_moment(m)
        reports.append(_equality_report(f"limit moment m={m}", got, expected,
                                        m=m, value=str(got)))
    return reports


def odd_moment_suite(ns: Iterable[int] = range(3, 8), ms: Iterable[int] = (1, 3, 5, 7)) -> list[FitReport]:
    reports = []
    for n in ns:
        for m in ms:
            for axis in exact.AXES:
                value = exact.exact_moment(n, m, axis)
                reports.append(_equality_report(f"odd moment n={n} m={m} {axis}",
                                                value.scaled, 0, n=n, m=m, axis=axis,
                                                exact=str(value)))
    return reports


def covariance_suite(ns: Iterable[int] = range(2, 51)) -> list[FitReport]:
    return [_equality_report(f"exact covariance n={n}", exact.exact_covariance(n), 0, n=n)
            for n in ns]


def cosine_sum_suite(n_max: int = 64, ell_max: int = 12) -> list[FitReport]:
    worst = 0.0
    mismatches = 0
    for n in range(1, n_max + 1):
        angles = 2 * np.pi * np.arange(1, n + 1) / n
        for ell in range(ell_max + 1):
            got = exact.cosine_power_sum(n, ell)
            if ell < n:
                expected = (Fraction(n * math.comb(ell, ell // 2), 2**ell)
                            if ell % 2 == 0 else Fraction(0))
                mismatches += got != expected
            else:
                worst = max(worst, abs(float(got) - float(np.sum(np.cos(angles) ** ell))))
    return [
        FitReport("cosine power sums below aliasing", float(mismatches), 0.0,
                  parameters={"n_max": n_max, "ell_max": ell_max}),
        FitReport("cosine power sums with aliasing vs float oracle", worst, 1e-9,
                  parameters={"n_max": n_max, "ell_max": ell_max}),
    ]


def leading_coefficient_suite(n: int = 256, ms: Iterable[int] = (1, 2)) -> list[FitReport]:
    reports = []
    for m in ms:
        for parts, cls in exact.classified_compositions(m):
            j = len(parts)
            rescaled = exact.distinct_cosine_sum(n, parts) / Fraction(n) ** m
            if cls is exact.CompositionClass.MINIMAL_ONES:
                target = exact.leading_cosine_coefficient(j, m)
            else:
                target = Fraction(0)
            reports.append(FitReport(
                f"rescaled cosine sum {parts} ({cls.value}) n={n}",
                abs(float(rescaled - target)), 5.0 / n,
                parameters={"m": m, "parts": list(parts), "class": cls.value,
                            "rescaled": str(rescaled), "target": str(target)},
            ))
    return reports


def zero_suite(n_exhaustive: int = 8, n_factor: int = 10**4,
               witnesses: Iterable[int] = (6, 10, 12)) -> list[FitReport]:
    reports = []
    found = [n for n in range(1, n_exhaustive + 1) if len(cen.exhaustive_zero_permutations(n))]
    solvable = [n for n in range(1, n_exhaustive + 1) if cen.is_zero_solvable(n)]
    reports.append(_equality_report(f"exhaustive zero centroids n<={n_exhaustive}",
                                    found, solvable, found=found, solvable=solvable))
    disagree = [n for n in range(1, n_factor + 1)
                if cen.is_zero_solvable(n) != (len(_factor_primes(n)) >= 2)]
    reports.append(FitReport(f"solvability vs factorisation n<={n_factor}",
                             float(len(disagree)), 0.0, parameters={"disagree": disagree[:10]}))
    for n in witnesses:
        w = cen.find_zero_permutation(n)
        ok = w is not None and cen.is_exact_zero(w)
        reports.append(FitReport(f"zero witness n={n}", 0.0 if ok else 1.0, 0.0,
                                 parameters={"n": n, "witness": None if w is None else list(w.map)}))
    return reports


def _factor_primes(n: int) -> set[int]:
    # independent of polygon.distinct_prime_factors: sieve-free repeated division
    primes, d = set(), 2
    while n > 1:
        if n % d == 0:
            primes.add(d)
            n //= d
        else:
            d += 1
    return primes


def moment_gates(stats: SummaryStats) -> list[FitReport]:
    """Odd moments at 0, second moment at (n+1)/(24n), covariance at 0, each within 3 SE."""
    n, N = stats.n, stats.samples
    reports = []
    for axis in ("x", "y"):
        for k in (1, 3):
            mom = stats.moment(axis, k)
            reports.append(_zscore_report(f"mc {axis} moment {k} n={n}", mom.estimate, 0.0,
                                          mom.se, N, n=n, axis=axis, k=k))
        mom = stats.moment(axis, 2)
        target = float(Fraction(n + 1, 24 * n))
        reports.append(_zscore_report(f"mc {axis} moment 2 n={n}", mom.estimate, target,
                                      mom.se, N, n=n, axis=axis, k=2))
    reports.append(_zscore_report(f"mc covariance n={n}", stats.covariance, 0.0,
                                  stats.covariance_se, N, n=n))
    return reports


def fourth_moment_gate(stats: SummaryStats, tolerance: float = 0.05) -> FitReport:
    est = stats.moment("x", 4).estimate
    target = float(exact.limit_moment(4))
    return FitReport(f"mc x moment 4 relative deviation n={stats.n}", abs(est - target) / target,
                     tolerance, sample_size=stats.samples,
                     parameters={"estimate": est, "target": target})


def ks_gate(stats: SummaryStats, threshold: float = 0.01) -> FitReport:
    if stats.radii is None:
        raise DomainError("KS gate needs retained radii")
    d = ks_statistic(stats.radii, lambda r: rayleigh_cdf(r, 1 / 24))
    return FitReport(f"KS |Z_n| vs Rayleigh(1/24) n={stats.n}", d, threshold,
                     sample_size=stats.samples, parameters={"n": stats.n, "seed": stats.seed})


def cf_gates(stats: SummaryStats, tolerance: float = 0.01) -> list[FitReport]:
    reports = []
    for t, re, im in stats.cf:
        target = limit_cf(t)
        reports.append(FitReport(f"cf of X_n at t={t:g} n={stats.n}",
                                 max(abs(re - target), abs(im)), tolerance,
                                 sample_size=stats.samples,
                                 parameters={"t": t, "re": re, "im": im, "target": target}))
    return reports


EXACT_SUITES: dict[str, Callable[[], list[FitReport]]] = {
    "oracle": oracle_suite,
    "second-moment": second_moment_suite,
    "limits": limit_moment_suite,
    "odd": odd_moment_suite,
    "covariance": covariance_suite,
    "cosine": cosine_sum_suite,
    "leading-coefficient": leading_coefficient_suite,
    "zero": zero_suite,
}
MC_SUITES = ("moments", "ks", "cf")
SUITES = tuple(EXACT_SUITES) + MC_SUITES


def run_suites(
    only: Sequence[str] | None = None,
    *,
    seed: int = 42,
    workers: int = 1,
    moments_n: int = 500,
    moments_samples: int = 200_000,
    law_n: int = 1000,
    law_samples: int = 1_000_000,
) -> list[FitReport]:
    """Run the named suites (all by default) and return every report."""
    names = list(only) if only else list(SUITES)
    unknown = [s for s in names if s not in SUITES]
    if unknown:
        raise DomainError(f"unknown suites {unknown}; choose from {SUITES}")
    reports: list[FitReport] = []
    for name in names:
        if name in EXACT_SUITES:
            reports.extend(EXACT_SUITES[name]())
    if "moments" in names:
        stats = run(SimConfig(n=moments_n, samples=moments_samples, seed=seed,
                              workers=workers, keep_radii=False))
        reports.extend(moment_gates(stats))
    if "ks" in names or "cf" in names:
        stats = run(SimConfig(n=law_n, samples=law_samples, seed=seed, workers=workers,
                              keep_radii="ks" in names))
        if "ks" in names:
            reports.append(ks_gate(stats))
        if "cf" in names:
            reports.extend(cf_gates(stats))
            reports.append(fourth_moment_gate(stats))
    return reports
