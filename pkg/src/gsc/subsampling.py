"""Stationary and stratified block subsampling.

A subsample of total length L is one block per segment, each of the
proportionally scaled length (ceiling rule) and a uniform start inside
its segment; the replicate statistic is pieced together by accumulating
numerators and denominators across the blocks.  With the trivial
segmentation this reduces exactly to stationary block subsampling.

The variance estimate rescales the replicate spread by the subsample
length: sigma_hat^2 = (L / B) * sum_b (T*_b - mean T*)^2, which targets
the variance of sqrt(n) times the full statistic; divide by n for the
standard error of the statistic itself.

Replicates with a degenerate denominator (for example an empty feature-A
stretch at small L) are redrawn from the replicate's own continuation
stream up to ``max_retries`` times, then counted and excluded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.stats import norm as _norm

from . import rng as _rng
from . import stats as _stats
from ._parallel import run_chunked
from .errors import FeasibilityError, ParameterError
from .segmentation import Segmentation
from .stats import StatisticKind, StatValue
from .tracks import TrackPair

__all__ = [
    "SubsampleParams",
    "ReplicateDistribution",
    "ConfidenceInterval",
    "BlockSizeSelection",
    "LillieforsResult",
    "block_lengths",
    "draw_stationary",
    "draw_stratified",
    "subsample_replicates",
    "subsample_variance",
    "standard_error",
    "ci_gaussian",
    "ci_percentile",
    "select_block_size",
    "normality_diagnostic",
    "lilliefors",
]


def block_lengths(segmentation: Segmentation, length: int) -> np.ndarray:
    """Per-segment block length: ceil(segment_length * L / n)."""
    n = segmentation.n
    seg_len = segmentation.lengths
    return -(-(seg_len * length) // n)


@dataclass(frozen=True)
class SubsampleParams:
    """Total subsample length, replicate count, seed, and segmentation."""

    length: int
    replicates: int
    seed: int
    segmentation: Segmentation
    max_retries: int = 10

    def __post_init__(self):
        n = self.segmentation.n
        if not 0 < self.length < n:
            raise ParameterError(f"subsample length must be in (0, {n})")
        if self.replicates < 1:
            raise ParameterError("need at least one replicate")
        lam = block_lengths(self.segmentation, self.length)
        too_long = lam > self.segmentation.lengths
        if np.any(too_long):
            i = int(np.argmax(too_long))
            raise FeasibilityError(
                f"scaled block ({int(lam[i])}) exceeds segment {i} "
                f"({int(self.segmentation.lengths[i])} bases)"
            )

    @property
    def realized_length(self) -> int:
        return int(block_lengths(self.segmentation, self.length).sum())


@dataclass
class ReplicateDistribution:
    """Replicate statistic values with provenance.

    ``len(values) + degenerate_count == requested``; degenerate
    replicates are those still division-free after the retry budget.
    """

    values: np.ndarray
    subsample_length: int
    requested: int
    degenerate_count: int
    seed: int
    statistic: str
    realized_length: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.size + self.degenerate_count != self.requested:
            raise ParameterError("replicate accounting does not add up")
        if self.values.size and not np.all(np.isfinite(self.values)):
            raise ParameterError("replicate values must be finite")

    @property
    def count(self) -> int:
        return int(self.values.size)

    def mean(self) -> float:
        return float(self.values.mean())

    def sd(self) -> float:
        return float(self.values.std(ddof=0))

    def iqr(self) -> float:
        q1, q3 = np.percentile(self.values, [25.0, 75.0])
        return float(q3 - q1)

    def summary(self) -> dict:
        qs = [1, 5, 25, 50, 75, 95, 99]
        quantiles = {}
        if self.count:
            vals = np.percentile(self.values, qs)
            quantiles = {f"p{q:02d}": float(v) for q, v in zip(qs, vals)}
        return {
            "count": self.count,
            "requested": self.requested,
            "degenerate_count": self.degenerate_count,
            "mean": self.mean() if self.count else None,
            "sd": self.sd() if self.count else None,
            "iqr": self.iqr() if self.count else None,
            "quantiles": quantiles,
            "subsample_length": self.subsample_length,
            "realized_length": self.realized_length,
            "seed": self.seed,
            "statistic": self.statistic,
        }

    def save_text(self, path) -> None:
        np.savetxt(path, self.values, fmt="%.17g")


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    method: str

    def __post_init__(self):
        if self.lower > self.upper:
            raise ParameterError("interval bounds out of order")


def draw_stationary(n: int, length: int, rng: np.random.Generator) -> int:
    """Uniform block start on {0, ..., n - length}."""
    if length >= n:
        raise ParameterError(f"block length {length} must be < {n}")
    return int(_rng.scaled_int(rng.random(), n - length + 1))


def draw_stratified(
    params: SubsampleParams, rng: np.random.Generator
) -> list[tuple[int, int]]:
    """One (start, length) block per segment, uniform inside its segment."""
    seg = params.segmentation
    lam = block_lengths(seg, params.length)
    out = []
    for (lo, hi), ell in zip(seg.segments(), lam.tolist()):
        span = hi - lo - ell + 1
        out.append((lo + int(_rng.scaled_int(rng.random(), span)), int(ell)))
    return out


def _starts_from_uniforms(u: np.ndarray, seg: Segmentation, lam: np.ndarray) -> np.ndarray:
    lo = seg.bounds[:-1]
    span = seg.lengths - lam + 1
    return lo + _rng.scaled_int(u, span)


def subsample_replicates(
    pair: TrackPair,
    kind: StatisticKind,
    params: SubsampleParams,
    threads: int = 1,
) -> ReplicateDistribution:
    """Draw B stratified subsamples and evaluate the statistic on each."""
    seg = params.segmentation
    m = seg.num_regions
    B = params.replicates
    lam = block_lengths(seg, params.length)
    u = _rng.replicate_uniforms(params.seed, B, m)
    num = np.empty(B, dtype=np.float64)
    den = np.empty(B, dtype=np.float64)

    def work(b_lo: int, b_hi: int) -> None:
        nb = b_hi - b_lo
        starts = _starts_from_uniforms(u[b_lo:b_hi], seg, lam)
        group = np.repeat(np.arange(nb), m)
        nsum, dsum = _stats.window_sums(
            kind, pair, starts.ravel(), (starts + lam).ravel(), group, nb
        )
        num[b_lo:b_hi] = nsum
        den[b_lo:b_hi] = dsum

    run_chunked(B, threads, work)

    degenerate = 0
    bad = np.flatnonzero(den <= 0)
    for b in bad.tolist():
        gen = _rng.retry_generator(params.seed, b)
        for _ in range(params.max_retries):
            starts = _starts_from_uniforms(gen.random(m), seg, lam)
            nsum, dsum = _stats.window_sums(kind, pair, starts, starts + lam)
            if dsum > 0:
                num[b], den[b] = nsum, dsum
                break
        else:
            degenerate += 1
            den[b] = np.nan
    keep = np.isfinite(den) & (den > 0)
    values = num[keep] / den[keep]
    return ReplicateDistribution(
        values=values,
        subsample_length=params.length,
        requested=B,
        degenerate_count=degenerate,
        seed=params.seed,
        statistic=_stats._kind_name(kind),
        realized_length=params.realized_length,
    )


def subsample_variance(dist: ReplicateDistribution) -> float:
    """L times the population variance of the replicate values."""
    if dist.count < 2:
        raise ParameterError("variance needs at least 2 replicates")
    centered = dist.values - dist.values.mean()
    return float(dist.subsample_length * np.mean(centered**2))


def standard_error(dist: ReplicateDistribution, n: int) -> float:
    """Estimated standard error of the full-length statistic."""
    return math.sqrt(subsample_variance(dist) / n)


def ci_gaussian(
    observed: StatValue, dist: ReplicateDistribution, n: int, level: float
) -> ConfidenceInterval:
    """observed +/- z_{1-alpha/2} * sigma_hat / sqrt(n)."""
    _check_level(level)
    z = float(_norm.ppf(0.5 + level / 2.0))
    half = z * math.sqrt(subsample_variance(dist) / n)
    return ConfidenceInterval(observed.value - half, observed.value + half, level, "gaussian")


def ci_percentile(dist: ReplicateDistribution, level: float) -> ConfidenceInterval:
    """Percentile interval from the replicate order statistics.

    With B retained replicates and alpha = 1 - level, the bounds are the
    ceil(B * alpha/2)-th and ceil(B * (1 - alpha/2))-th order statistics
    (1-based, ties kept).
    """
    _check_level(level)
    alpha = 1.0 - level
    B = dist.count
    if B < 2.0 / alpha:
        raise ParameterError(
            f"percentile interval at level {level} needs >= {math.ceil(2 / alpha)} "
            f"replicates, got {B}"
        )
    ordered = np.sort(dist.values)
    lo_idx = max(1, math.ceil(B * alpha / 2.0))
    hi_idx = min(B, math.ceil(B * (1.0 - alpha / 2.0)))
    return ConfidenceInterval(
        float(ordered[lo_idx - 1]), float(ordered[hi_idx - 1]), level, "percentile"
    )


def _check_level(level: float) -> None:
    if not 0.0 < level < 1.0:
        raise ParameterError("confidence level must be in (0, 1)")


@dataclass(frozen=True)
class CandidateRow:
    step: int
    length: int
    iqr: float
    distance: float | None
    degenerate_count: int


@dataclass(frozen=True)
class BlockSizeSelection:
    chosen_length: int
    rows: tuple[CandidateRow, ...]
    observed: float
    seed: int

    def table(self) -> list[dict]:
        return [
            {
                "step": r.step,
                "length": r.length,
                "iqr": r.iqr,
                "distance": r.distance,
                "degenerate_count": r.degenerate_count,
            }
            for r in self.rows
        ]


def select_block_size(
    pair: TrackPair,
    segmentation: Segmentation,
    kind: StatisticKind,
    rho: float,
    steps: int,
    replicates: int,
    seed: int,
    threads: int = 1,
) -> BlockSizeSelection:
    """Pick the subsample length by interquartile-range stability.

    Candidates are length_v = round(rho^v * n) for v = 1..steps.  For
    each, the replicate distribution of sqrt(L_v) * (T* - T_n) is drawn
    and its IQR recorded; the distance between consecutive candidates is
    |sqrt(L_{v-1} / L_v) * IQR_v - IQR_{v-1}|, and the argmin wins (ties
    break toward the larger length).
    """
    if not 0.0 < rho < 1.0:
        raise ParameterError("rho must be in (0, 1)")
    n = pair.n
    observed = _stats.window_mean(kind, pair, [(0, n)])
    lengths: list[int] = []
    for v in range(1, steps + 1):
        cand = int(round(rho**v * n))
        if 0 < cand < n and (not lengths or cand != lengths[-1]):
            lengths.append(cand)
    if len(lengths) < 2:
        raise FeasibilityError("fewer than 2 feasible block-size candidates")

    rows: list[CandidateRow] = []
    iqrs: list[float] = []
    for v, cand in enumerate(lengths, start=1):
        dist = subsample_replicates(
            pair,
            kind,
            SubsampleParams(
                length=cand,
                replicates=replicates,
                seed=_rng.derive_seed(seed, "block-size", v),
                segmentation=segmentation,
            ),
            threads=threads,
        )
        if dist.count < 4:
            raise FeasibilityError(f"candidate length {cand}: too many degenerate replicates")
        scaled = math.sqrt(cand) * (dist.values - observed.value)
        q1, q3 = np.percentile(scaled, [25.0, 75.0])
        iqrs.append(float(q3 - q1))
        distance = None
        if v >= 2:
            distance = abs(math.sqrt(lengths[v - 2] / cand) * iqrs[-1] - iqrs[-2])
        rows.append(CandidateRow(v, cand, iqrs[-1], distance, dist.degenerate_count))

    distances = [r.distance for r in rows if r.distance is not None]
    best = int(np.argmin(distances))  # first minimum -> larger length on ties
    chosen = rows[best + 1].length
    return BlockSizeSelection(chosen, tuple(rows), observed.value, seed)


@dataclass(frozen=True)
class LillieforsResult:
    statistic: float
    p_value: float
    sample_size: int
    mc_samples: int


_LILLIEFORS_TABLE_SEED = 0x11EF0
_LILLIEFORS_MC = 2000


def _ks_normal_statistic(x: np.ndarray) -> float:
    n = x.size
    mu = x.mean()
    sd = x.std(ddof=1)
    if sd <= 0:
        raise ParameterError("Lilliefors statistic undefined for constant sample")
    cdf = _norm.cdf(np.sort((x - mu) / sd))
    grid = np.arange(1, n + 1) / n
    d_plus = np.max(grid - cdf)
    d_minus = np.max(cdf - (grid - 1.0 / n))
    return float(max(d_plus, d_minus))


@lru_cache(maxsize=32)
def _lilliefors_reference(n: int, mc_samples: int) -> np.ndarray:
    # fixed-seed Monte Carlo null table of the statistic at sample size n
    gen = _rng.generator(_LILLIEFORS_TABLE_SEED, "lilliefors", n, mc_samples)
    draws = gen.standard_normal((mc_samples, n))
    out = np.empty(mc_samples)
    for i in range(mc_samples):
        out[i] = _ks_normal_statistic(draws[i])
    return np.sort(out)


def lilliefors(x, mc_samples: int = _LILLIEFORS_MC) -> LillieforsResult:
    """Kolmogorov-Smirnov distance to a normal with estimated mean/sd.

    The p-value comes from a cached fixed-seed Monte Carlo table of the
    null statistic at the same sample size, with add-one smoothing.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size < 20:
        raise ParameterError("normality diagnostic needs >= 20 values")
    d = _ks_normal_statistic(x)
    table = _lilliefors_reference(x.size, mc_samples)
    exceed = table.size - int(np.searchsorted(table, d, side="left"))
    p = (1.0 + exceed) / (mc_samples + 1.0)
    return LillieforsResult(d, float(p), int(x.size), mc_samples)


def normality_diagnostic(dist: ReplicateDistribution) -> LillieforsResult:
    return lilliefors(dist.values)
