"""Permutations of {1..n}: validation, reproducible sampling and enumeration."""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import DomainError, EnumerationCapExceeded

DEFAULT_MAX_ENUM = 10
MAX_ENUM_ENV = "CENTROID_LIMITS_MAX_ENUM"


def max_enum(cap: int | None = None) -> int:
    """Resolve the exhaustive-enumeration cap (argument > env var > default)."""
    if cap is not None:
        return int(cap)
    env = os.environ.get(MAX_ENUM_ENV)
    if env:
        return int(env)
    return DEFAULT_MAX_ENUM


@dataclass(frozen=True)
class Permutation:
    """A bijection of {1..n}; ``map[k-1]`` is the image of ``k``."""

    map: tuple[int, ...]

    def __post_init__(self) -> None:
        values = tuple(int(v) for v in self.map)
        object.__setattr__(self, "map", values)
        if not values:
            raise DomainError("a permutation needs n >= 1")
        if sorted(values) != list(range(1, len(values) + 1)):
            raise DomainError(f"not a permutation of 1..{len(values)}: {values}")

    @property
    def n(self) -> int:
        return len(self.map)

    def __call__(self, k: int) -> int:
        return self.map[k - 1]

    def __len__(self) -> int:
        return len(self.map)


@dataclass
class RngStream:
    """A seeded substream of a Philox counter-based generator.

    The pair ``(seed, stream_id)`` is turned into a Philox key through
    numpy's ``SeedSequence`` with ``stream_id`` as the spawn key, so streams
    with distinct ids never overlap and never need coordination.  A stream
    is owned by one consumer; parallel work uses one stream per worker.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator | None = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= value < 2**64:
                raise DomainError(f"{name} must be a 64-bit unsigned integer, got {value}")

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
            self._gen = np.random.Generator(np.random.Philox(seq))
        return self._gen


def sample_permutation(n: int, rng: RngStream) -> Permutation:
    """Draw one uniform permutation of size ``n`` and advance ``rng``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    return Permutation(tuple(int(v) for v in rng.generator.permutation(n) + 1))


def sample_permutation_rows(n: int, rows: int, rng: RngStream) -> np.ndarray:
    """Draw ``rows`` independent uniform permutations as a float64 array.

    Row ``i`` holds ``sigma_i(1), ..., sigma_i(n)``.  Each row is shuffled
    in place by numpy's Fisher-Yates with unbiased bounded draws.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    base = np.broadcast_to(np.arange(1, n + 1, dtype=np.float64), (rows, n))
    return rng.generator.permuted(base, axis=1)


def enumerate_permutations(n: int, cap: int | None = None) -> Iterator[Permutation]:
    """Yield every permutation of {1..n} once, in lexicographic order."""
    _check_enumerable(n, cap)
    for values in itertools.permutations(range(1, n + 1)):
        yield Permutation(values)


def permutation_table(n: int, cap: int | None = None) -> np.ndarray:
    """All of S_n as an ``(n!, n)`` int64 array in lexicographic order."""
    _check_enumerable(n, cap)
    table = np.fromiter(
        itertools.chain.from_iterable(itertools.permutations(range(1, n + 1))),
        dtype=np.int64,
        count=math.factorial(n) * n,
    )
    return table.reshape(math.factorial(n), n)


def _check_enumerable(n: int, cap: int | None) -> None:
    if n < 1:
        raise DomainError("n must be >= 1")
    limit = max_enum(cap)
    if n > limit:
        raise EnumerationCapExceeded(
            f"refusing to enumerate S_{n} ({math.factorial(n)} permutations): "
            f"n exceeds the exhaustive cap {limit}; raise it via {MAX_ENUM_ENV}"
        )
