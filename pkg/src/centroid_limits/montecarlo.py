"""Reproducible, parallel Monte Carlo sampling of rescaled centroids.

The sample index space is cut into a fixed number of batches (the unit
for batch-means standard errors).  Batches are dealt to workers in
contiguous blocks; worker ``w`` draws from ``RngStream(seed, w)`` and
returns one :class:`MomentAccumulator`.  Accumulators are merged in worker
order, so results depend on the config only, never on scheduling.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .polygon import vertex_directions
from .errors import DomainError, ResourceRefusal
from .perm import RngStream, sample_permutation_rows

N_BATCHES = 64
MIN_SE_BATCHES = 32
KEEP_RADII_AUTO_LIMIT = 10**7
RADII_BUDGET = 5 * 10**7
DEFAULT_CF_POINTS = (0.5, 1.0, 2.0, 4.0)


@dataclass(frozen=True)
class SimConfig:
    n: int
    samples: int
    seed: int = 0
    workers: int = 1
    max_moment: int = 8
    keep_radii: bool | None = None
    cf_points: tuple[float, ...] = DEFAULT_CF_POINTS
    hist_bins: int = 0
    hist_extent: float = 1.0
    radius_bin_width: float | None = None
    chunk_rows: int = 4096
    radii_budget: int = RADII_BUDGET

    def __post_init__(self) -> None:
        if self.n < 1:
            raise DomainError("n must be >= 1")
        if self.samples < 1:
            raise DomainError("samples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if not 1 <= self.workers <= N_BATCHES:
            raise DomainError(f"workers must lie in 1..{N_BATCHES}")
        if self.max_moment < 2 or self.max_moment % 2 or self.max_moment > 16:
            raise DomainError("max_moment must be even and in 2..16")
        if self.hist_bins < 0 or self.hist_extent <= 0:
            raise DomainError("histogram settings must be positive")
        if self.radius_bin_width is not None and self.radius_bin_width <= 0:
            raise DomainError("radius_bin_width must be positive")
        if self.chunk_rows < 1:
            raise DomainError("chunk_rows must be >= 1")
        object.__setattr__(self, "cf_points", tuple(float(t) for t in self.cf_points))

    @property
    def retain_radii(self) -> bool:
        if self.keep_radii is None:
            return self.samples <= KEEP_RADII_AUTO_LIMIT
        return self.keep_radii

    @property
    def radius_edges(self) -> np.ndarray | None:
        if not self.hist_bins:
            return None
        if self.radius_bin_width is None:
            return np.linspace(0.0, self.hist_extent, self.hist_bins + 1)
        count = max(1, math.ceil(self.hist_extent / self.radius_bin_width))
        return np.arange(count + 1) * self.radius_bin_width

    def batch_sizes(self) -> list[int]:
        count = min(N_BATCHES, self.samples)
        base, extra = divmod(self.samples, count)
        return [base + (1 if b < extra else 0) for b in range(count)]

    def worker_batches(self) -> list[list[int]]:
        """Batch indices per worker, contiguous and in order."""
        count = len(self.batch_sizes())
        workers = min(self.workers, count)
        base, extra = divmod(count, workers)
        out, start = [], 0
        for w in range(workers):
            size = base + (1 if w < extra else 0)
            out.append(list(range(start, start + size)))
            start += size
        return out


class _Compensated:
    """Vector of running sums with Neumaier compensation."""

    __slots__ = ("total", "comp")

    def __init__(self, size: int):
        self.total = np.zeros(size)
        self.comp = np.zeros(size)

    def add(self, values: np.ndarray) -> None:
        t = self.total + values
        big = np.abs(self.total) >= np.abs(values)
        self.comp += np.where(big, (self.total - t) + values, (values - t) + self.total)
        self.total = t

    def merged(self, other: _Compensated) -> _Compensated:
        out = _Compensated(len(self.total))
        out.total, out.comp = self.total.copy(), self.comp.copy()
        out.add(other.total)
        out.comp += other.comp
        return out

    def value(self) -> np.ndarray:
        return self.total + self.comp


@dataclass
class MomentAccumulator:
    """Streaming raw power sums, cross sums, cf sums and histograms.

    Statistics are laid out in one vector:
    ``[x^1..x^K, y^1..y^K, xy, cos(t x).., sin(t x)..]``.  Samples pass
    through :meth:`update`; :meth:`end_batch` seals the open batch, whose
    sums feed the batch-means standard errors.
    """

    max_moment: int = 8
    keep_radii: bool = False
    cf_points: tuple[float, ...] = DEFAULT_CF_POINTS
    hist_bins: int = 0
    hist_extent: float = 1.0
    radius_edges: np.ndarray | None = None
    count: int = 0
    sums: _Compensated = field(init=False)
    batch_counts: list[int] = field(default_factory=list)
    batch_sums: list[np.ndarray] = field(default_factory=list)
    radii: list[np.ndarray] = field(default_factory=list)
    hist_xy: np.ndarray | None = None
    hist_r: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.cf_points = tuple(self.cf_points)
        self.sums = _Compensated(self.width)
        self._open = _Compensated(self.width)
        self._open_count = 0
        if self.hist_bins:
            self.hist_xy = np.zeros((self.hist_bins, self.hist_bins), dtype=np.int64)
            self.hist_r = np.zeros(len(self.radius_edges) - 1, dtype=np.int64)

    @classmethod
    def for_config(cls, cfg: SimConfig) -> MomentAccumulator:
        return cls(
            max_moment=cfg.max_moment,
            keep_radii=cfg.retain_radii,
            cf_points=cfg.cf_points,
            hist_bins=cfg.hist_bins,
            hist_extent=cfg.hist_extent,
            radius_edges=cfg.radius_edges,
        )

    @property
    def width(self) -> int:
        return 2 * self.max_moment + 1 + 2 * len(self.cf_points)

    def settings(self) -> tuple:
        edges = None if self.radius_edges is None else tuple(self.radius_edges)
        return (self.max_moment, self.keep_radii, self.cf_points, self.hist_bins,
                self.hist_extent, edges)

    def _chunk_sums(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        k = self.max_moment
        px = np.cumprod(np.broadcast_to(x, (k, x.size)), axis=0)
        py = np.cumprod(np.broadcast_to(y, (k, y.size)), axis=0)
        t = np.asarray(self.cf_points)[:, None] * x[None, :]
        return np.concatenate([
            px.sum(axis=1),
            py.sum(axis=1),
            [np.dot(x, y)],
            np.cos(t).sum(axis=1),
            np.sin(t).sum(axis=1),
        ])

    def update(self, x: np.ndarray, y: np.ndarray) -> None:
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if x.size == 0:
            return
        chunk = self._chunk_sums(x, y)
        self._open.add(chunk)
        self.sums.add(chunk)
        self._open_count += x.size
        self.count += x.size
        r = np.hypot(x, y)
        if self.keep_radii:
            self.radii.append(r)
        if self.hist_bins:
            self._bin(x, y, r)

    def _bin(self, x: np.ndarray, y: np.ndarray, r: np.ndarray) -> None:
        # edge bins absorb the tails, so counts always sum to the sample count
        b, e = self.hist_bins, self.hist_extent
        ix = np.clip(np.floor((x + e) / (2 * e) * b).astype(np.int64), 0, b - 1)
        iy = np.clip(np.floor((y + e) / (2 * e) * b).astype(np.int64), 0, b - 1)
        np.add.at(self.hist_xy, (ix, iy), 1)
        edges = self.radius_edges
        ir = np.clip(np.searchsorted(edges, r, side="right") - 1, 0, len(edges) - 2)
        self.hist_r += np.bincount(ir, minlength=len(edges) - 1)

    def end_batch(self) -> None:
        if self._open_count:
            self.batch_counts.append(self._open_count)
            self.batch_sums.append(self._open.value())
        self._open = _Compensated(self.width)
        self._open_count = 0

    def sorted_radii(self) -> np.ndarray | None:
        if not self.keep_radii:
            return None
        if not self.radii:
            return np.empty(0)
        return np.sort(np.concatenate(self.radii))

    def totals(self) -> np.ndarray:
        return self.sums.value()


def merge(a: MomentAccumulator, b: MomentAccumulator) -> MomentAccumulator:
    """Combine two accumulators; batches and radii of ``a`` come first."""
    if a.settings() != b.settings():
        raise DomainError("cannot merge accumulators with different settings")
    a.end_batch()
    b.end_batch()
    out = MomentAccumulator(
        max_moment=a.max_moment,
        keep_radii=a.keep_radii,
        cf_points=a.cf_points,
        hist_bins=a.hist_bins,
        hist_extent=a.hist_extent,
        radius_edges=a.radius_edges,
    )
    out.count = a.count + b.count
    out.sums = a.sums.merged(b.sums)
    out.batch_counts = a.batch_counts + b.batch_counts
    out.batch_sums = a.batch_sums + b.batch_sums
    out.radii = a.radii + b.radii
    if a.hist_bins:
        out.hist_xy = a.hist_xy + b.hist_xy
        out.hist_r = a.hist_r + b.hist_r
    return out


@dataclass
class MomentEstimate:
    k: int
    estimate: float
    se: float


@dataclass
class SummaryStats:
    config: SimConfig
    moments_x: list[MomentEstimate]
    moments_y: list[MomentEstimate]
    covariance: float
    covariance_se: float
    cf: list[tuple[float, float, float]]
    batches: int
    radii: np.ndarray | None = None
    hist_xy: np.ndarray | None = None
    hist_r: np.ndarray | None = None
    duration: float = 0.0

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def samples(self) -> int:
        return self.config.samples

    @property
    def seed(self) -> int:
        return self.config.seed

    def moment(self, axis: str, k: int) -> MomentEstimate:
        table = self.moments_x if axis in ("x", "real") else self.moments_y
        return table[k - 1]

    def to_dict(self, include_timing: bool = False) -> dict:
        """Deterministic payload; wall-clock time only when asked for."""
        out = {
            "n": self.n,
            "samples": self.samples,
            "seed": self.seed,
            "batches": self.batches,
            "moments": [
                {"axis": axis, "k": m.k, "estimate": m.estimate, "se": _json_float(m.se)}
                for axis, table in (("x", self.moments_x), ("y", self.moments_y))
                for m in table
            ],
            "covariance": [{"estimate": self.covariance, "se": _json_float(self.covariance_se)}],
            "cf": [{"t": t, "re": re, "im": im} for t, re, im in self.cf],
        }
        if self.hist_xy is not None:
            b, e = self.config.hist_bins, self.config.hist_extent
            edges = np.linspace(-e, e, b + 1)
            out["histogram_xy"] = [
                {"x_lo": float(edges[i]), "x_hi": float(edges[i + 1]),
                 "y_lo": float(edges[j]), "y_hi": float(edges[j + 1]),
                 "count": int(self.hist_xy[i, j])}
                for i in range(b) for j in range(b)
            ]
            redges = self.config.radius_edges
            out["histogram_r"] = [
                {"r_lo": float(redges[i]), "r_hi": float(redges[i + 1]),
                 "count": int(self.hist_r[i])}
                for i in range(len(self.hist_r))
            ]
        if include_timing:
            out["duration_seconds"] = self.duration
        return out


def _json_float(value: float) -> float | None:
    return None if math.isnan(value) else value


def _batch_means_se(batch_vals: np.ndarray) -> np.ndarray:
    count = batch_vals.shape[0]
    if count < MIN_SE_BATCHES:
        return np.full(batch_vals.shape[1:], np.nan)
    return batch_vals.std(axis=0, ddof=1) / math.sqrt(count)


def summarize(acc: MomentAccumulator, cfg: SimConfig, duration: float = 0.0) -> SummaryStats:
    acc.end_batch()
    k = acc.max_moment
    tot = acc.totals() / acc.count
    counts = np.asarray(acc.batch_counts, dtype=np.float64)[:, None]
    bmeans = np.asarray(acc.batch_sums) / counts
    se = _batch_means_se(bmeans)
    mx = [MomentEstimate(i + 1, float(tot[i]), float(se[i])) for i in range(k)]
    my = [MomentEstimate(i + 1, float(tot[k + i]), float(se[k + i])) for i in range(k)]
    cov = float(tot[2 * k] - tot[0] * tot[k])
    bcov = bmeans[:, 2 * k] - bmeans[:, 0] * bmeans[:, k]
    cov_se = float(_batch_means_se(bcov[:, None])[0])
    base = 2 * k + 1
    p = len(acc.cf_points)
    cf = [(t, float(tot[base + i]), float(tot[base + p + i])) for i, t in enumerate(acc.cf_points)]
    return SummaryStats(
        config=cfg,
        moments_x=mx,
        moments_y=my,
        covariance=cov,
        covariance_se=cov_se,
        cf=cf,
        batches=len(acc.batch_counts),
        radii=acc.sorted_radii(),
        hist_xy=acc.hist_xy,
        hist_r=acc.hist_r,
        duration=duration,
    )


def _run_worker(cfg: SimConfig, worker: int, batches: list[int]) -> MomentAccumulator:
    rng = RngStream(cfg.seed, worker)
    cos, sin = vertex_directions(cfg.n)
    basis = np.stack([cos, sin], axis=1)
    scale = 1.0 / (cfg.n * math.sqrt(cfg.n))
    acc = MomentAccumulator.for_config(cfg)
    sizes = cfg.batch_sizes()
    for b in batches:
        left = sizes[b]
        while left:
            rows = min(left, cfg.chunk_rows)
            xy = (sample_permutation_rows(cfg.n, rows, rng) @ basis) * scale
            acc.update(xy[:, 0], xy[:, 1])
            left -= rows
        acc.end_batch()
    return acc


def run(cfg: SimConfig, executor: str = "auto") -> SummaryStats:
    """Sample ``cfg.samples`` centroids and summarise them.

    ``executor`` picks how worker tasks execute: ``"process"``,
    ``"thread"``, ``"serial"`` or ``"auto"`` (processes when
    ``workers > 1``).  The output is identical for every choice.
    """
    if cfg.retain_radii and cfg.samples > cfg.radii_budget:
        raise ResourceRefusal(
            f"retaining {cfg.samples} radii exceeds the budget of {cfg.radii_budget}; "
            "rerun with keep_radii=False"
        )
    start = time.perf_counter()
    plan = cfg.worker_batches()
    if executor == "auto":
        executor = "process" if len(plan) > 1 else "serial"
    if executor == "serial":
        parts = [_run_worker(cfg, w, batches) for w, batches in enumerate(plan)]
    elif executor in ("process", "thread"):
        pool_cls = ProcessPoolExecutor if executor == "process" else ThreadPoolExecutor
        with pool_cls(max_workers=len(plan)) as pool:
            futures = [pool.submit(_run_worker, cfg, w, b) for w, b in enumerate(plan)]
            parts = [f.result() for f in futures]
    else:
        raise DomainError(f"unknown executor {executor!r}")
    acc = parts[0]
    for part in parts[1:]:
        acc = merge(acc, part)
    return summarize(acc, cfg, time.perf_counter() - start)
