"""Centroids of permutation polygons and exact zero-centroid decisions.

The polygon for ``sigma`` has vertices ``sigma(k) * exp(2*pi*i*k/n)``.
Exact vanishing of the vertex sum is decided in Z[x]/Phi_n, never with
floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BudgetExceeded, DomainError
from .perm import Permutation, max_enum, permutation_table
from .polynomial import IntPolynomial, cyclotomic, power_reduction_table

DEFAULT_SEARCH_BUDGET = 10**8


@dataclass(frozen=True)
class CentroidSample:
    n: int
    c_re: float
    c_im: float
    x: float
    y: float
    r: float


@lru_cache(maxsize=64)
def vertex_directions(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``(cos(2*pi*k/n), sin(2*pi*k/n))`` for k = 1..n, computed directly."""
    k = np.arange(1, n + 1, dtype=np.float64)
    angle = 2.0 * np.pi * k / n
    cos, sin = np.cos(angle), np.sin(angle)
    cos.setflags(write=False)
    sin.setflags(write=False)
    return cos, sin


def centroid(p: Permutation) -> CentroidSample:
    n = p.n
    cos, sin = vertex_directions(n)
    values = np.asarray(p.map, dtype=np.float64)
    c_re = float(values @ cos) / n
    c_im = float(values @ sin) / n
    root = math.sqrt(n)
    x, y = c_re / root, c_im / root
    return CentroidSample(n, c_re, c_im, x, y, math.hypot(x, y))


def barycenter(p: Permutation) -> tuple[float, float]:
    """Centre of mass for masses ``k`` placed by ``sigma``: ``2/(n+1) * C_n``."""
    c = centroid(p)
    scale = 2.0 / (p.n + 1)
    return c.c_re * scale, c.c_im * scale


def distinct_prime_factors(n: int) -> list[int]:
    """Distinct primes dividing ``n`` by trial division."""
    if n < 1:
        raise DomainError("n must be >= 1")
    primes = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            primes.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        primes.append(n)
    return primes


def is_zero_solvable(n: int) -> bool:
    """Whether some sigma in S_n has zero centroid (two distinct primes divide n)."""
    return len(distinct_prime_factors(n)) >= 2


def vertex_polynomial(p: Permutation) -> IntPolynomial:
    """``sum_k sigma(k) x^k``."""
    return IntPolynomial((0,) + p.map)


def is_exact_zero(p: Permutation) -> bool:
    return (vertex_polynomial(p) % cyclotomic(p.n)).is_zero()


def exact_zero_mask(perms: np.ndarray) -> np.ndarray:
    """Vectorised exact zero test for the rows of an ``(count, n)`` int array.

    Row ``k-1`` of the reduction table is ``x^k mod Phi_n`` (with ``x^n = 1``),
    so each product below is the remainder polynomial of one permutation.
    Integer arithmetic only.
    """
    perms = np.asarray(perms, dtype=np.int64)
    n = perms.shape[1]
    table = power_reduction_table(n, n + 1)[1:]
    if table.shape[1] == 0:
        return np.zeros(len(perms), dtype=bool)
    return ~np.any(perms @ table, axis=1)


def exhaustive_zero_permutations(n: int, cap: int | None = None) -> np.ndarray:
    """Every zero-centroid permutation of S_n, lexicographic, as an int array."""
    table = permutation_table(n, cap)
    return table[exact_zero_mask(table)]


def crt_zero_permutation(n: int) -> Permutation | None:
    """Closed-form witness for n = a*b with coprime a, b > 1.

    ``sigma(k) = (k mod a) + a*(k mod b) + 1`` is a bijection by the Chinese
    remainder theorem, and each of its three terms sums to zero against the
    n-th roots of unity because ``k mod a`` is constant on cosets of the
    b-th roots and vice versa.
    """
    primes = distinct_prime_factors(n)
    if len(primes) < 2:
        return None
    p = primes[0]
    a = 1
    while n % (a * p) == 0:
        a *= p
    b = n // a
    return Permutation(tuple((k % a) + a * (k % b) + 1 for k in range(1, n + 1)))


class _LexSearch:
    """Depth-first search for the lexicographically smallest zero witness.

    Positions are filled in order 1..n with the smallest unused value
    first.  A branch is cut when, along some direction u, the projection of
    the partial sum cannot be cancelled by any arrangement of the remaining
    values on the remaining positions (rearrangement inequality).  Cuts use
    a tolerance; leaves are confirmed exactly.
    """

    def __init__(self, n: int, budget: int, directions: int | None = None):
        self.n = n
        self.budget = budget
        self.nodes = 0
        cos, sin = vertex_directions(n)
        self.vertex = cos + 1j * sin
        count = directions or 2 * n
        theta = np.pi * np.arange(count) / n if directions is None else (
            2 * np.pi * np.arange(count) / count
        )
        self.u = np.exp(1j * theta)
        proj = np.real(self.vertex[None, :] * np.conj(self.u)[:, None])
        # suffix[pos] = sorted projections of positions pos..n-1, per direction
        self.suffix = [np.sort(proj[:, pos:], axis=1) for pos in range(n)]
        self.tol = 1e-9 * n * n

    def feasible(self, pos: int, partial: complex, remaining: list[int]) -> bool:
        values = np.asarray(remaining, dtype=np.float64)
        srt = self.suffix[pos]
        hi = srt @ values
        lo = srt[:, ::-1] @ values
        target = -np.real(partial * np.conj(self.u))
        return bool(np.all(target <= hi + self.tol) and np.all(target >= lo - self.tol))

    def run(self) -> Permutation | None:
        n = self.n
        chosen: list[int] = []
        remaining = list(range(1, n + 1))

        def descend(pos: int, partial: complex) -> Permutation | None:
            if pos == n:
                cand = Permutation(tuple(chosen))
                return cand if is_exact_zero(cand) else None
            for idx in range(len(remaining)):
                self.nodes += 1
                if self.nodes > self.budget:
                    raise BudgetExceeded(
                        f"zero-centroid search for n={n} exceeded {self.budget} nodes"
                    )
                v = remaining.pop(idx)
                chosen.append(v)
                nxt = partial + v * self.vertex[pos]
                if pos + 1 == n or self.feasible(pos + 1, nxt, remaining):
                    found = descend(pos + 1, nxt)
                    if found is not None:
                        return found
                chosen.pop()
                remaining.insert(idx, v)
            return None

        return descend(0, 0j)


def find_zero_permutation(
    n: int,
    *,
    strategy: str = "auto",
    budget: int = DEFAULT_SEARCH_BUDGET,
    cap: int | None = None,
) -> Permutation | None:
    """A permutation with exactly zero centroid, or ``None`` if none exists.

    ``strategy``:
      * ``"search"``: lexicographic backtracking; returns the lexicographically
        smallest witness or raises :class:`BudgetExceeded` after ``budget``
        nodes.
      * ``"construct"``: the CRT closed form.
      * ``"auto"``: search when ``n`` is within the exhaustive cap, construct
        beyond it.

    Whatever the route, a returned witness has passed :func:`is_exact_zero`.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if strategy not in ("auto", "search", "construct"):
        raise DomainError(f"unknown strategy {strategy!r}")
    if not is_zero_solvable(n):
        return None
    if strategy == "construct" or (strategy == "auto" and n > max_enum(cap)):
        witness = crt_zero_permutation(n)
    else:
        witness = _LexSearch(n, budget).run()
    if witness is None or not is_exact_zero(witness):
        raise AssertionError(f"witness search for solvable n={n} produced no valid witness")
    return witness
