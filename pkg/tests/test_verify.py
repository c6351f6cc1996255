import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats as sps

from centroid_limits import verify
from centroid_limits.errors import DomainError
from centroid_limits.montecarlo import SimConfig, run


# -- Rayleigh -----------------------------------------------------------------------


def test_rayleigh_cdf_values():
    assert verify.rayleigh_cdf(0.0) == 0.0
    assert verify.rayleigh_cdf(math.sqrt(1 / 12)) == pytest.approx(1 - math.exp(-1), abs=1e-12)
    assert verify.rayleigh_cdf(math.sqrt(1 / 12)) == pytest.approx(0.63212, abs=1e-5)


def test_rayleigh_density_by_finite_difference():
    h = 1e-5
    slope = (verify.rayleigh_cdf(0.1 + h) - verify.rayleigh_cdf(0.1 - h)) / (2 * h)
    assert abs(slope - 24 * 0.1 * math.exp(-0.12)) < 1e-6
    assert verify.rayleigh_pdf(0.1) == pytest.approx(24 * 0.1 * math.exp(-0.12), rel=1e-12)


def test_rayleigh_cdf_monotone_grid():
    grid = np.linspace(0, 3, 3001)
    values = verify.rayleigh_cdf(grid)
    assert values[0] == 0
    assert np.all(np.diff(values) >= 0)
    assert values[-1] == pytest.approx(1.0, abs=1e-12)


def test_rayleigh_matches_scipy():
    grid = np.linspace(0, 1, 101)
    ref = sps.rayleigh(scale=math.sqrt(1 / 24))
    np.testing.assert_allclose(verify.rayleigh_cdf(grid), ref.cdf(grid), atol=1e-14)
    np.testing.assert_allclose(verify.rayleigh_pdf(grid), ref.pdf(grid), rtol=1e-12, atol=1e-14)
    u = np.linspace(0.01, 0.99, 50)
    np.testing.assert_allclose(verify.rayleigh_quantile(u), ref.ppf(u), rtol=1e-12)


def test_rayleigh_domain():
    with pytest.raises(DomainError):
        verify.rayleigh_cdf(-0.1)
    with pytest.raises(DomainError):
        verify.rayleigh_cdf(0.1, sigma2=0)


# -- KS -----------------------------------------------------------------------------


def test_ks_single_median():
    median = verify.rayleigh_quantile(0.5)
    assert verify.ks_statistic([median], verify.rayleigh_cdf) == pytest.approx(0.5, abs=1e-12)


def test_ks_midpoint_quantiles():
    n = 100
    xs = verify.rayleigh_quantile((np.arange(1, n + 1) - 0.5) / n)
    assert verify.ks_statistic(xs, verify.rayleigh_cdf) == pytest.approx(1 / (2 * n), abs=1e-12)


def test_ks_sampler_self_test():
    n = 100_000
    xs = np.sort(verify.rayleigh_sample(n, np.random.default_rng(2024)))
    assert verify.ks_statistic(xs, verify.rayleigh_cdf) < 1.63 / math.sqrt(n)


@pytest.mark.parametrize("seed", range(5))
def test_ks_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    xs = np.sort(rng.rayleigh(0.2, size=200))
    ref = sps.kstest(xs, verify.rayleigh_cdf).statistic
    assert verify.ks_statistic(xs, verify.rayleigh_cdf) == pytest.approx(ref, abs=1e-14)


def test_ks_with_ties_matches_scipy():
    xs = np.sort(np.repeat([0.1, 0.2, 0.25, 0.4], [3, 1, 5, 2]))
    ref = sps.kstest(xs, verify.rayleigh_cdf).statistic
    assert verify.ks_statistic(xs, verify.rayleigh_cdf) == pytest.approx(ref, abs=1e-14)
    # two sorted points at one location: the ecdf jumps 0 -> 1 there
    x = float(verify.rayleigh_quantile(0.9))
    assert verify.ks_statistic([x, x], verify.rayleigh_cdf) == pytest.approx(0.9, abs=1e-12)


def test_ks_errors():
    with pytest.raises(DomainError):
        verify.ks_statistic([], verify.rayleigh_cdf)
    with pytest.raises(DomainError):
        verify.ks_statistic([0.3, 0.1], verify.rayleigh_cdf)


# -- characteristic function -------------------------------------------------------------


def test_empirical_cf_examples():
    assert verify.empirical_cf([0.3, -1.2, 5.0], 0.0) == (1.0, 0.0)
    re, im = verify.empirical_cf([-0.7, 0.7], 1.3)
    assert im == pytest.approx(0.0, abs=1e-15)
    assert re == pytest.approx(math.cos(0.91))
    with pytest.raises(DomainError):
        verify.empirical_cf([], 1.0)


def test_limit_cf():
    assert verify.limit_cf(0) == 1.0
    assert verify.limit_cf(2) == pytest.approx(0.9200, abs=1e-4)


def test_streaming_cf_matches_empirical_cf():
    from centroid_limits.montecarlo import MomentAccumulator
    rng = np.random.default_rng(3)
    x, y = rng.normal(0, 0.2, 5000), rng.normal(0, 0.2, 5000)
    acc = MomentAccumulator()
    acc.update(x, y)
    tot = acc.totals() / acc.count
    base = 2 * acc.max_moment + 1
    for i, t in enumerate(acc.cf_points):
        re, im = verify.empirical_cf(x, t)
        assert tot[base + i] == pytest.approx(re, abs=1e-12)
        assert tot[base + len(acc.cf_points) + i] == pytest.approx(im, abs=1e-12)


# -- reports -------------------------------------------------------------------------


def test_fit_report_pass_rule():
    assert verify.FitReport("a", 0.01, 0.01).passed
    assert not verify.FitReport("a", 0.0100001, 0.01).passed
    d = verify.FitReport("b", 1.0, 2.0, sample_size=5, parameters={"n": 1}).to_dict()
    assert d == {"test": "b", "statistic": 1.0, "threshold": 2.0, "pass": True,
                 "sample_size": 5, "parameters": {"n": 1}}


def test_convergence_table_second_moment_gap():
    rows = verify.convergence_table(range(3, 8), [2])
    for row in rows:
        assert row.gap == Fraction(1, 24 * row.n)
        assert row.limit == Fraction(1, 24)


def test_convergence_table_odd_and_fourth():
    rows = verify.convergence_table(range(3, 8), [3])
    assert all(row.exact.scaled == 0 for row in rows)
    fourth = {r.n: r for r in verify.convergence_table(range(3, 8), [4])}
    assert fourth[7].gap < fourth[3].gap
    assert all(r.limit == Fraction(1, 192) for r in fourth.values())


def test_convergence_table_infeasible_and_mc():
    stats = run(SimConfig(n=20, samples=5000, seed=3, max_moment=4))
    rows = verify.convergence_table([20], [2, 12], {20: stats})
    by_m = {r.m: r for r in rows}
    assert by_m[2].mc_estimate == stats.moment("x", 2).estimate
    assert by_m[2].gap == Fraction(21, 480) - Fraction(1, 24)
    assert by_m[12].exact is None and by_m[12].mc_estimate is None and by_m[12].gap is None
    assert by_m[12].to_dict()["exact"] is None


# -- suites ------------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(verify.EXACT_SUITES))
def test_exact_suites_pass(name):
    reports = verify.EXACT_SUITES[name]()
    assert reports
    failed = [r.line() for r in reports if not r.passed]
    assert not failed


def test_unknown_suite():
    with pytest.raises(DomainError):
        verify.run_suites(["nope"])


def test_moment_gate_suite_small():
    reports = verify.run_suites(["moments"], moments_n=50, moments_samples=20_000)
    assert len(reports) == 7 and all(r.passed for r in reports)
