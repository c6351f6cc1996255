"""Exact finite-n moments of the rescaled centroid coordinates.

Two independent routes to ``E[X_n^m]`` (and ``E[Y_n^m]``):

* :func:`exact_moment` expands the m-th power with the multinomial theorem
  over compositions of m, reducing everything to distinct-index power sums
  of the lengths ``k`` and of ``cos(2*pi*i/n)`` (or ``sin``).  Distinct-index
  sums are turned into full-range sums by Moebius inversion on the lattice
  of set partitions, and full-range sums are closed forms (Faulhaber and
  the root-of-unity filter).
* :func:`brute_force_moment` averages over all of S_n in the cyclotomic
  field Q(zeta_L), L = lcm(n, 4), so cos and sin are exact algebraic numbers.

Both return :class:`MomentValue`, an exact rational carrying the symbolic
``n**(-1/2)`` left over by odd orders.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import DomainError
from .perm import permutation_table
from .polynomial import cyclotomic, power_reduction_table

EXACT_M_CAP = 10

AXES = ("real", "imag")


# -- Bernoulli numbers and Faulhaber ---------------------------------------


@lru_cache(maxsize=None)
def _bernoulli_plus_table(k: int) -> tuple[Fraction, ...]:
    # sum_{i<=k} C(k+1, i) B_i = k + 1 defines the B_1 = +1/2 convention
    table: list[Fraction] = []
    for m in range(k + 1):
        acc = sum((math.comb(m + 1, i) * table[i] for i in range(m)), Fraction(0))
        table.append((m + 1 - acc) / (m + 1))
    return tuple(table)


def bernoulli(k: int) -> Fraction:
    """Bernoulli number B_k with the convention B_1 = +1/2."""
    if k < 0:
        raise DomainError("k must be >= 0")
    return _bernoulli_plus_table(k)[k]


@lru_cache(maxsize=4096)
def faulhaber(n: int, alpha: int) -> Fraction:
    """``sum_{k=1}^n k**alpha`` from Faulhaber's formula."""
    if n < 1 or alpha < 1:
        raise DomainError("need n >= 1 and alpha >= 1")
    bern = _bernoulli_plus_table(alpha)
    total = sum(
        (math.comb(alpha + 1, k) * bern[k] * n ** (alpha + 1 - k) for k in range(alpha + 1)),
        Fraction(0),
    )
    return total / (alpha + 1)


# -- trigonometric power sums over the n-th roots of unity ------------------


def cosine_power_sum(n: int, ell: int) -> Fraction:
    """``sum_{v=1}^n cos(2*pi*v/n)**ell``, including aliased terms for ell >= n."""
    if n < 1 or ell < 0:
        raise DomainError("need n >= 1 and ell >= 0")
    hits = sum(math.comb(ell, r) for r in range(ell + 1) if (ell - 2 * r) % n == 0)
    return Fraction(n * hits, 2**ell)


def sine_power_sum(n: int, ell: int) -> Fraction:
    """``sum_{v=1}^n sin(2*pi*v/n)**ell``; zero for every odd ``ell``."""
    return trig_power_sum(n, 0, ell)


@lru_cache(maxsize=8192)
def trig_power_sum(n: int, a: int, b: int) -> Fraction:
    """``sum_{v=1}^n cos(t_v)**a * sin(t_v)**b`` with ``t_v = 2*pi*v/n``.

    Expanding in exponentials, only frequencies divisible by n survive the
    sum over v.  The result is real; the imaginary unit from ``sin`` only
    cancels, which is asserted.
    """
    if n < 1 or a < 0 or b < 0:
        raise DomainError("need n >= 1 and nonnegative exponents")
    acc = 0
    for r in range(a + 1):
        cr = math.comb(a, r)
        for s in range(b + 1):
            if (a - 2 * r + b - 2 * s) % n == 0:
                acc += cr * math.comb(b, s) * (-1) ** s
    if b % 2:
        if acc != 0:
            raise ArithmeticError("non-real trigonometric sum")
        return Fraction(0)
    # (2i)^(-b) = (-1)^(b/2) 2^(-b) for even b
    return Fraction((-1) ** (b // 2) * n * acc, 2 ** (a + b))


def _axis_power_sum(axis: str, n: int, ell: int) -> Fraction:
    if axis == "real":
        return cosine_power_sum(n, ell)
    if axis == "imag":
        return sine_power_sum(n, ell)
    raise DomainError(f"axis must be one of {AXES}, got {axis!r}")


# -- compositions and set partitions ----------------------------------------


def compositions(total: int, parts: int | None = None) -> list[tuple[int, ...]]:
    """Compositions of ``total`` (optionally into exactly ``parts`` parts), colex order."""
    if total < 1:
        raise DomainError("total must be >= 1")
    out: list[tuple[int, ...]] = []

    def extend(prefix: list[int], left: int) -> None:
        if left == 0:
            if parts is None or len(prefix) == parts:
                out.append(tuple(prefix))
            return
        if parts is not None and len(prefix) >= parts:
            return
        for first in range(1, left + 1):
            prefix.append(first)
            extend(prefix, left - first)
            prefix.pop()

    extend([], total)
    out.sort(key=lambda c: (len(c), c[::-1]))
    return out


@lru_cache(maxsize=None)
def set_partitions(j: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All set partitions of {0..j-1}, each a tuple of sorted blocks."""
    if j < 0:
        raise DomainError("j must be >= 0")
    if j == 0:
        return ((),)
    result = []
    for smaller in set_partitions(j - 1):
        new = j - 1
        for i in range(len(smaller)):
            blocks = list(smaller)
            blocks[i] = blocks[i] + (new,)
            result.append(tuple(blocks))
        result.append(smaller + ((new,),))
    return tuple(result)


def moebius_weight(partition: Sequence[Sequence[int]]) -> int:
    """``prod_B (-1)**(|B|-1) * (|B|-1)!``, the partition-lattice Moebius weight."""
    w = 1
    for block in partition:
        size = len(block)
        w *= (-1) ** (size - 1) * math.factorial(size - 1)
    return w


def _distinct_sum(parts: tuple[int, ...], full_sum) -> Fraction:
    total = Fraction(0)
    for partition in set_partitions(len(parts)):
        term = Fraction(moebius_weight(partition))
        for block in partition:
            term *= full_sum(sum(parts[i] for i in block))
            if not term:
                break
        total += term
    return total


def _check_parts(parts: Sequence[int]) -> tuple[int, ...]:
    parts = tuple(int(a) for a in parts)
    if not parts or any(a < 1 for a in parts):
        raise DomainError(f"parts must be a nonempty tuple of positive integers, got {parts}")
    return parts


@lru_cache(maxsize=None)
def _distinct_power_sum_sorted(n: int, parts: tuple[int, ...]) -> Fraction:
    return _distinct_sum(parts, lambda alpha: faulhaber(n, alpha))


def distinct_power_sum(n: int, parts: Sequence[int]) -> Fraction:
    """Sum of ``prod k_v**alpha_v`` over pairwise-distinct ``k in {1..n}^j``."""
    parts = _check_parts(parts)
    if n < 1:
        raise DomainError("n must be >= 1")
    if len(parts) > n:
        return Fraction(0)
    return _distinct_power_sum_sorted(n, tuple(sorted(parts)))


@lru_cache(maxsize=None)
def _distinct_trig_sum_sorted(n: int, parts: tuple[int, ...], axis: str) -> Fraction:
    return _distinct_sum(parts, lambda ell: _axis_power_sum(axis, n, ell))


def distinct_cosine_sum(n: int, parts: Sequence[int], axis: str = "real") -> Fraction:
    """Sum of ``prod cos(2*pi*i_v/n)**alpha_v`` over pairwise-distinct indices.

    ``axis="imag"`` uses ``sin`` in place of ``cos``.
    """
    parts = _check_parts(parts)
    if n < 1:
        raise DomainError("n must be >= 1")
    if axis not in AXES:
        raise DomainError(f"axis must be one of {AXES}, got {axis!r}")
    if len(parts) > n:
        return Fraction(0)
    return _distinct_trig_sum_sorted(n, tuple(sorted(parts)), axis)


# -- moments ------------------------------------------------------------------


@dataclass(frozen=True)
class MomentValue:
    """``E[X_n^m]`` held exactly as ``scaled * n**(-half_power/2)``.

    ``half_power`` is ``m % 2``: even orders are plain rationals, odd orders
    keep one symbolic factor ``1/sqrt(n)``.
    """

    n: int
    m: int
    scaled: Fraction

    @property
    def half_power(self) -> int:
        return self.m % 2

    def is_rational(self) -> bool:
        return self.half_power == 0 or self.scaled == 0 or math.isqrt(self.n) ** 2 == self.n

    def as_fraction(self) -> Fraction:
        if self.half_power == 0 or self.scaled == 0:
            return self.scaled
        root = math.isqrt(self.n)
        if root * root != self.n:
            raise ArithmeticError(f"moment carries an irrational factor 1/sqrt({self.n})")
        return self.scaled / root

    def __float__(self) -> float:
        return float(self.scaled) / math.sqrt(self.n) ** self.half_power

    def __str__(self) -> str:
        if self.is_rational():
            return str(self.as_fraction())
        return f"{self.scaled}/sqrt({self.n})"


def _normalise(n: int, m: int, raw: Fraction) -> MomentValue:
    # raw = E[S^m] with S = sum_j sigma(j) c_j and X_n = S / n^(3/2)
    # n^(m%2 / 2) * n^(-3m/2) = n^(-(3m - m%2)/2), an integer power
    return MomentValue(n, m, raw / Fraction(n) ** ((3 * m - m % 2) // 2))


def multinomial(parts: Sequence[int]) -> int:
    out = math.factorial(sum(parts))
    for a in parts:
        out //= math.factorial(a)
    return out


@lru_cache(maxsize=None)
def _moment_terms(n: int, m: int, axis: str) -> Fraction:
    total = Fraction(0)
    for j in range(1, min(m, n) + 1):
        # (1/j!) * (n-j)!/n!
        weight = Fraction(1, math.factorial(j) * math.perm(n, j))
        inner = Fraction(0)
        for parts in compositions(m, j):
            trig = distinct_cosine_sum(n, parts, axis)
            if trig:
                inner += multinomial(parts) * distinct_power_sum(n, parts) * trig
        total += weight * inner
    return total


def exact_moment(n: int, m: int, axis: str = "real") -> MomentValue:
    """``E[X_n^m]`` (``axis="imag"``: ``E[Y_n^m]``) by the composition expansion."""
    if n < 1 or m < 1:
        raise DomainError("need n >= 1 and m >= 1")
    if m > EXACT_M_CAP:
        raise DomainError(f"moment order {m} exceeds the exact cap {EXACT_M_CAP}")
    if axis not in AXES:
        raise DomainError(f"axis must be one of {AXES}, got {axis!r}")
    return _normalise(n, m, _moment_terms(n, m, axis))


def limit_moment(m: int) -> Fraction:
    """Limit of ``E[X_n^m]``: ``(2k)!/(k! 48^k)`` for ``m = 2k``, zero for odd m."""
    if m < 1:
        raise DomainError("m must be >= 1")
    if m % 2:
        return Fraction(0)
    k = m // 2
    return Fraction(math.factorial(2 * k), math.factorial(k) * 48**k)


# -- brute force over S_n in Q(zeta_L) -------------------------------------


class _CyclotomicBatch:
    """Batched arithmetic in Z[x]/Phi_L on object arrays of shape (count, phi(L))."""

    def __init__(self, order: int):
        self.order = order
        self.width = cyclotomic(order).degree
        self.table = power_reduction_table(order).astype(object)

    def monomial(self, power: int) -> np.ndarray:
        return self.table[power % self.order]

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        w = self.width
        wide = np.zeros((a.shape[0], 2 * w - 1), dtype=object)
        for i in range(w):
            wide[:, i : i + w] += a[:, i : i + 1] * b
        return wide.dot(self.table[: 2 * w - 1])


def _axis_generators(ring: _CyclotomicBatch, n: int, axis: str) -> np.ndarray:
    # twice cos(2 pi j/n) or twice sin(2 pi j/n), j = 1..n, as ring elements
    L = ring.order
    step = L // n
    rows = []
    for j in range(1, n + 1):
        e = j * step
        if axis == "real":
            rows.append(ring.monomial(e) + ring.monomial(-e))
        else:
            # (z - 1/z) / i = -i (z - 1/z), with -i = x^(3L/4)
            q = 3 * L // 4
            rows.append(ring.monomial(e + q) - ring.monomial(-e + q))
    return np.array(rows, dtype=object)


@lru_cache(maxsize=64)
def _brute_force_raw(n: int, a: int, b: int, cap: int | None) -> Fraction:
    """``E[S_cos^a * S_sin^b]`` over S_n, exactly."""
    perms = permutation_table(n, cap).astype(object)
    order = math.lcm(n, 4)
    ring = _CyclotomicBatch(order)
    acc = None
    for axis, power in (("real", a), ("imag", b)):
        if power == 0:
            continue
        gen = perms.dot(_axis_generators(ring, n, axis))
        val = gen
        for _ in range(power - 1):
            val = ring.mul(val, gen)
        acc = val if acc is None else ring.mul(acc, val)
    if acc is None:
        return Fraction(1)
    total = acc.sum(axis=0)
    if any(total[1:]):
        raise ArithmeticError("average over S_n is not rational; ring arithmetic is inconsistent")
    return Fraction(int(total[0]), math.factorial(n) * 2 ** (a + b))


def brute_force_moment(n: int, m: int, axis: str = "real", cap: int | None = None) -> MomentValue:
    """``E[X_n^m]`` (or ``E[Y_n^m]``) by exact averaging over every sigma in S_n."""
    if m < 1:
        raise DomainError("m must be >= 1")
    if axis not in AXES:
        raise DomainError(f"axis must be one of {AXES}, got {axis!r}")
    a, b = (m, 0) if axis == "real" else (0, m)
    return _normalise(n, m, _brute_force_raw(n, a, b, cap))


def brute_force_mixed_moment(n: int, a: int, b: int, cap: int | None = None) -> MomentValue:
    """``E[X_n^a Y_n^b]`` by exhaustive exact averaging."""
    if a < 0 or b < 0 or a + b < 1:
        raise DomainError("need nonnegative exponents with a + b >= 1")
    return _normalise(n, a + b, _brute_force_raw(n, a, b, cap))


# -- second-order quantities -------------------------------------------------


def pair_moment_coefficients(n: int) -> tuple[Fraction, Fraction]:
    """``(a_n, b_n)`` with ``E[sigma(j) sigma(k)] = a_n`` if j == k else ``b_n``."""
    if n < 2:
        raise DomainError("b_n needs n >= 2")
    a = Fraction((n + 1) * (2 * n + 1), 6)
    b = (Fraction(n * n * (n + 1) ** 2, 4) - Fraction(n * (n + 1) * (2 * n + 1), 6)) / (
        n * (n - 1)
    )
    return a, b


def _second_order(n: int, cc: Fraction, c_sum: Fraction, d_sum: Fraction) -> Fraction:
    # E[(sum sigma(j) c_j)(sum sigma(k) d_k)] for weights with diagonal sum cc
    a, b = pair_moment_coefficients(n)
    return a * cc + b * (c_sum * d_sum - cc)


def second_moment_closed_form(n: int) -> Fraction:
    """``E[X_n^2] = (n+1)/(24n)``, assembled from ``a_n``, ``b_n`` and exact cosine sums."""
    if n < 3:
        raise DomainError("the closed form needs n >= 3")
    c1 = cosine_power_sum(n, 1)
    c2 = cosine_power_sum(n, 2)
    return _second_order(n, c2, c1, c1) / Fraction(n) ** 3


def exact_covariance(n: int) -> Fraction:
    """``Cov(X_n, Y_n)`` from ``a_n``, ``b_n`` and exact cross sums."""
    if n < 2:
        raise DomainError("n must be >= 2")
    c1 = trig_power_sum(n, 1, 0)
    s1 = trig_power_sum(n, 0, 1)
    cs = trig_power_sum(n, 1, 1)
    mixed = _second_order(n, cs, c1, s1)
    mean = Fraction(n + 1, 2)
    return (mixed - (mean * c1) * (mean * s1)) / Fraction(n) ** 3


# -- minimal-ones classification ----------------------------------------------


class CompositionClass(str, enum.Enum):
    MINIMAL_ONES = "minimal_ones"
    EXCESS_ONES = "excess_ones"


def classify_composition(parts: Sequence[int], m: int) -> CompositionClass:
    """Whether a composition of 2m into j parts has the fewest possible ones.

    With j parts summing to 2m at least ``2(j - m)`` parts equal 1; the
    minimal ones are exactly those with ``2(j-m)`` ones and ``2m - j`` twos.
    """
    parts = _check_parts(parts)
    j = len(parts)
    if sum(parts) != 2 * m:
        raise DomainError(f"parts {parts} do not sum to 2m = {2 * m}")
    if not m <= j <= 2 * m:
        raise DomainError(f"need m <= j <= 2m, got j={j}, m={m}")
    ones = parts.count(1)
    twos = parts.count(2)
    if ones == 2 * (j - m) and twos == 2 * m - j:
        return CompositionClass.MINIMAL_ONES
    return CompositionClass.EXCESS_ONES


def leading_cosine_coefficient(j: int, m: int) -> Fraction:
    """``(-1)**(j-m) (2(j-m))! / (2**j (j-m)!)``, the limit of rescaled minimal-ones sums."""
    if not m <= j <= 2 * m:
        raise DomainError(f"need m <= j <= 2m, got j={j}, m={m}")
    d = j - m
    return Fraction((-1) ** d * math.factorial(2 * d), 2**j * math.factorial(d))


def classified_compositions(m: int) -> Iterator[tuple[tuple[int, ...], CompositionClass]]:
    """Every composition of 2m with m <= j <= 2m parts, with its class."""
    for j in range(m, 2 * m + 1):
        for parts in compositions(2 * m, j):
            yield parts, classify_composition(parts, m)
