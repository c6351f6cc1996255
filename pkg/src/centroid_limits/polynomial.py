"""Integer polynomials, cyclotomic polynomials and exact reduction mod Phi_n."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError


def _trim(coeffs: Iterable[int]) -> tuple[int, ...]:
    out = [int(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class IntPolynomial:
    """Polynomial with arbitrary-precision integer coefficients.

    ``coeffs[i]`` is the coefficient of ``x**i``.  Trailing zeros are
    stripped on construction, so the zero polynomial has ``coeffs == ()``.
    """

    coeffs: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @classmethod
    def monomial(cls, power: int, coeff: int = 1) -> IntPolynomial:
        return cls((0,) * power + (coeff,))

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def __add__(self, other: IntPolynomial) -> IntPolynomial:
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return IntPolynomial(tuple(out))

    def __neg__(self) -> IntPolynomial:
        return IntPolynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other: IntPolynomial) -> IntPolynomial:
        return self + (-other)

    def __mul__(self, other: IntPolynomial) -> IntPolynomial:
        if self.is_zero() or other.is_zero():
            return IntPolynomial()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return IntPolynomial(tuple(out))

    def divmod_monic(self, divisor: IntPolynomial) -> tuple[IntPolynomial, IntPolynomial]:
        """Quotient and remainder by a monic divisor, exact over the integers."""
        if divisor.is_zero() or divisor.leading != 1:
            raise DomainError("divisor must be monic")
        rem = list(self.coeffs)
        d = divisor.degree
        if len(rem) - 1 < d:
            return IntPolynomial(), self
        quot = [0] * (len(rem) - d)
        dc = divisor.coeffs
        for shift in range(len(rem) - 1 - d, -1, -1):
            c = rem[shift + d]
            if c:
                quot[shift] = c
                for i in range(d + 1):
                    rem[shift + i] -= c * dc[i]
        return IntPolynomial(tuple(quot)), IntPolynomial(tuple(rem[:d]))

    def __mod__(self, divisor: IntPolynomial) -> IntPolynomial:
        return self.divmod_monic(divisor)[1]

    def exact_div(self, divisor: IntPolynomial) -> IntPolynomial:
        quot, rem = self.divmod_monic(divisor)
        if not rem.is_zero():
            raise ArithmeticError("division is not exact")
        return quot

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __repr__(self) -> str:
        if self.is_zero():
            return "IntPolynomial(0)"
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c:
                mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
                coef = str(c) if (abs(c) != 1 or i == 0) else ("-" if c < 0 else "")
                terms.append(f"{coef}{mono}")
        return "IntPolynomial(" + " + ".join(terms).replace("+ -", "- ") + ")"


def divisors(n: int) -> list[int]:
    small = [d for d in range(1, int(n**0.5) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


@lru_cache(maxsize=None)
def cyclotomic(n: int) -> IntPolynomial:
    """Phi_n, by exact division of x^n - 1 by Phi_d for every proper divisor d."""
    if n < 1:
        raise DomainError("n must be >= 1")
    poly = IntPolynomial.monomial(n) - IntPolynomial((1,))
    for d in divisors(n)[:-1]:
        poly = poly.exact_div(cyclotomic(d))
    return poly


@lru_cache(maxsize=None)
def power_reduction_table(n: int, length: int | None = None) -> np.ndarray:
    """Row ``d`` holds the coefficients of ``x**d mod Phi_n``.

    Shape is ``(length, phi(n))`` with ``length`` defaulting to ``n``; the
    entries are small integers (int64).  Since ``x**n == 1`` mod Phi_n, row
    ``d`` equals row ``d % n``.
    """
    phi = cyclotomic(n)
    width = phi.degree
    length = n if length is None else length
    table = np.zeros((length, width), dtype=np.int64)
    base = [(IntPolynomial.monomial(d) % phi).coeffs for d in range(n)]
    for d in range(length):
        row = base[d % n]
        table[d, : len(row)] = row
    table.setflags(write=False)
    return table


def reduce_mod_cyclotomic(coeffs: Sequence[int], n: int) -> IntPolynomial:
    """Reduce a coefficient list modulo Phi_n with exact integer arithmetic."""
    return IntPolynomial(tuple(coeffs)) % cyclotomic(n)
