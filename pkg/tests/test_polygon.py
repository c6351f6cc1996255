import cmath
import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from centroid_limits.errors import BudgetExceeded, DomainError
from centroid_limits.perm import Permutation, RngStream, enumerate_permutations, permutation_table, sample_permutation
from centroid_limits.polygon import (
    barycenter,
    centroid,
    crt_zero_permutation,
    exact_zero_mask,
    exhaustive_zero_permutations,
    find_zero_permutation,
    is_exact_zero,
    is_zero_solvable,
    vertex_polynomial,
)
from centroid_limits.polynomial import IntPolynomial, cyclotomic


def test_centroid_small_cases():
    c = centroid(Permutation((1,)))
    assert (c.c_re, c.c_im) == pytest.approx((1.0, 0.0), abs=1e-15)
    c = centroid(Permutation((1, 2)))
    assert c.c_re == pytest.approx(0.5, abs=1e-15) and abs(c.c_im) < 1e-15
    c = centroid(Permutation((2, 3, 6, 1, 4, 5)))
    assert abs(c.c_re) < 1e-12 and abs(c.c_im) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 200), st.integers(0, 2**32))
def test_sample_contract(n, seed):
    p = sample_permutation(n, RngStream(seed))
    c = centroid(p)
    ref = sum(p(k) * cmath.exp(2j * math.pi * k / n) for k in range(1, n + 1)) / n
    assert c.c_re == pytest.approx(ref.real, abs=1e-9 * n)
    assert c.c_im == pytest.approx(ref.imag, abs=1e-9 * n)
    assert c.x == c.c_re / math.sqrt(n) and c.y == c.c_im / math.sqrt(n)
    assert abs(c.r**2 - (c.x**2 + c.y**2)) <= 8 * np.spacing(max(c.r**2, 1e-300))
    bx, by = barycenter(p)
    assert bx == c.c_re * (2.0 / (n + 1)) and by == c.c_im * (2.0 / (n + 1))


def test_barycenter_examples():
    assert barycenter(Permutation((1,))) == pytest.approx((1.0, 0.0))
    bx, by = barycenter(Permutation((1, 2)))
    assert bx == pytest.approx(1 / 3) and abs(by) < 1e-15


@pytest.mark.parametrize("n,expected", [(1, False), (4, False), (5, False), (6, True), (12, True), (30, True), (49, False)])
def test_solvability(n, expected):
    assert is_zero_solvable(n) is expected


def test_solvability_against_sympy():
    for n in range(1, 3000):
        assert is_zero_solvable(n) == (len(sympy.factorint(n)) >= 2)


def test_exact_zero_examples():
    assert is_exact_zero(Permutation((2, 3, 6, 1, 4, 5)))
    assert not is_exact_zero(Permutation((1,)))
    assert not any(is_exact_zero(p) for p in enumerate_permutations(5))


@pytest.mark.parametrize("n", range(1, 9))
def test_zero_exists_iff_solvable(n):
    found = exhaustive_zero_permutations(n)
    assert (len(found) > 0) == is_zero_solvable(n)
    assert (len(found) > 0) == (n == 6)


@pytest.mark.parametrize("n", range(1, 9))
def test_exact_agrees_with_float(n):
    table = permutation_table(n)
    k = np.arange(1, n + 1)
    vals = table @ np.exp(2j * np.pi * k / n) / n
    assert np.array_equal(exact_zero_mask(table), np.abs(vals) < 1e-9)


def test_batch_mask_matches_scalar_test():
    table = permutation_table(6)
    mask = exact_zero_mask(table)
    for row, flag in zip(table, mask):
        assert is_exact_zero(Permutation(tuple(row))) == flag


@pytest.mark.parametrize("n", range(2, 8))
def test_mean_centroid_is_zero(n):
    total = IntPolynomial()
    for p in enumerate_permutations(n):
        total = total + vertex_polynomial(p)
    assert (total % cyclotomic(n)).is_zero()


def test_mean_centroid_n1_is_one():
    # the only polygon of size one has its vertex at 1
    assert not (vertex_polynomial(Permutation((1,))) % cyclotomic(1)).is_zero()


@pytest.mark.parametrize("n", [6, 10, 12])
def test_witnesses(n):
    w = find_zero_permutation(n)
    assert w is not None and is_exact_zero(w)
    assert abs(centroid(w).c_re) < 1e-9 and abs(centroid(w).c_im) < 1e-9


def test_search_finds_lexicographically_smallest():
    smallest = tuple(exhaustive_zero_permutations(6)[0])
    assert find_zero_permutation(6, strategy="search").map == smallest


@pytest.mark.parametrize("n", [4, 5, 7, 8, 9, 16, 27, 49])
def test_no_witness_for_prime_powers(n):
    assert find_zero_permutation(n) is None


@pytest.mark.parametrize("n", [6, 10, 12, 14, 15, 18, 20, 21, 30, 60, 105, 210, 1001])
def test_crt_construction(n):
    w = crt_zero_permutation(n)
    assert is_exact_zero(w)
    assert find_zero_permutation(n, strategy="construct") == w


def test_budget_exceeded_is_distinct():
    with pytest.raises(BudgetExceeded):
        find_zero_permutation(14, strategy="search", budget=500)
    assert find_zero_permutation(7, strategy="search", budget=1) is None


def test_bad_arguments():
    with pytest.raises(DomainError):
        find_zero_permutation(0)
    with pytest.raises(DomainError):
        find_zero_permutation(6, strategy="guess")
