"""Independence tests for feature-track pairs.

The null distribution of an overlap statistic is estimated by
cross-pairing: two blocks are drawn from the observed pair and feature A
of one block is scored against feature B of the other, which preserves
each track's internal clumping while breaking any dependence between
them.  Blocks may overlap; only identical start points are excluded
(an optional strict mode enforces disjoint blocks).

Two centerings are available for the base-pair overlap test.  The
conditional formulation centers at the segment-weighted product of
within-segment coverages and draws one block pair per estimated segment;
the marginal formulation centers at the plain feature-B coverage and
draws unstratified pairs.  With a single segment the two coincide.  Note
that the stratified pieced replicate is kept in its literal form, which
for one segment is twice the unstratified replicate (the per-segment
ratio terms are summed, not averaged, and the combined block coverages
are summed); multi-segment conditional critical values are therefore
conservative by about that factor.

The region-overlap test centers by a double bootstrap: pairs of long
blocks (the outer multiplier times the block length) estimate the null
mean of the cross-pair region overlap, and segmented block-length
replicates of the same construction estimate its spread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _runs
from . import rng as _rng
from ._parallel import run_chunked
from .errors import (
    DegenerateDenominatorError,
    FeasibilityError,
    ParameterError,
)
from .segmentation import Segmentation
from .stats import OverlapStatistic, StatisticKind, _kind_name, window_mean
from .subsampling import ReplicateDistribution, block_lengths, lilliefors
from .tracks import FeatureTrack, TrackPair

__all__ = [
    "TestParams",
    "TestResult",
    "conditional_center",
    "marginal_center",
    "null_replicate_bp",
    "bp_null_replicates",
    "test_bp_overlap",
    "double_bootstrap_region_overlap",
    "shuffle_baseline",
]


@dataclass(frozen=True)
class TestParams:
    """Block length, replicate count, seed, segmentation and mode flags."""

    length: int
    replicates: int
    seed: int
    segmentation: Segmentation
    formulation: str = "conditional"  # conditional | marginal
    outer_multiplier: float = 5.0
    outer_replicates: int | None = None
    strict_disjoint: bool = False
    two_sided: bool = False
    max_retries: int = 10

    def __post_init__(self):
        n = self.segmentation.n
        if self.length < 1:
            raise ParameterError("block length must be >= 1")
        if 2 * self.length > n:
            raise FeasibilityError(f"need 2L <= n, got L={self.length}, n={n}")
        if self.replicates < 1:
            raise ParameterError("need at least one replicate")
        if self.formulation not in ("conditional", "marginal"):
            raise ParameterError(f"unknown formulation {self.formulation!r}")
        if self.outer_multiplier < 2:
            raise ParameterError("outer multiplier must be >= 2")


@dataclass
class TestResult:
    """Observed statistic against its estimated null."""

    statistic: str
    formulation: str
    observed: float
    center: float
    critical_value: float
    z_score: float
    p_value: float
    alpha: float
    two_sided: bool
    se_estimate: float
    replicates: ReplicateDistribution
    diagnostics: dict

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "formulation": self.formulation,
            "observed": self.observed,
            "center": self.center,
            "critical_value": self.critical_value,
            "z_score": self.z_score,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "two_sided": self.two_sided,
            "se_estimate": self.se_estimate,
            "replicates": self.replicates.summary(),
            "diagnostics": self.diagnostics,
        }


def conditional_center(pair: TrackPair, segmentation: Segmentation) -> float:
    """Segment-weighted null expectation of the bp-overlap fraction:
    sum_i (n_i/n) Ibar_i Jbar_i / Ibar."""
    if pair.a.total_coverage == 0:
        raise DegenerateDenominatorError("feature A has zero coverage")
    n = pair.n
    lo = segmentation.bounds[:-1]
    hi = segmentation.bounds[1:]
    seg_len = (hi - lo).astype(np.float64)
    a_cov = _runs.coverage_in(pair.a.starts, pair.a.ends, pair.a.cum, lo, hi)
    b_cov = _runs.coverage_in(pair.b.starts, pair.b.ends, pair.b.cum, lo, hi)
    num = float(np.sum(a_cov * b_cov / seg_len)) / n
    den = pair.a.total_coverage / n
    return num / den


def marginal_center(pair: TrackPair) -> float:
    """Plain feature-B coverage fraction."""
    return pair.b.total_coverage / pair.n


def _flat_ranges(i0: np.ndarray, i1: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate index ranges [i0[k], i1[k]); returns (indices, owner k)."""
    counts = i1 - i0
    total = int(counts.sum())
    owner = np.repeat(np.arange(i0.size), counts)
    if total == 0:
        return np.empty(0, dtype=np.int64), owner
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    within = np.arange(total, dtype=np.int64) - np.repeat(offsets, counts)
    return i0[owner] + within, owner


def cross_joint_lengths(pair: TrackPair, k1, k2, ell: int):
    """Per replicate: |A@[k1,k1+ell) aligned against B@[k2,k2+ell)|,
    plus the plain A and B coverages of the two blocks."""
    k1 = np.asarray(k1, dtype=np.int64)
    k2 = np.asarray(k2, dtype=np.int64)
    a, b = pair.a, pair.b
    nrep = k1.size
    i0, i1 = _runs.span_indices(a.starts, a.ends, k1, k1 + ell)
    idx, owner = _flat_ranges(i0, i1)
    lo = np.maximum(a.starts[idx], k1[owner])
    hi = np.minimum(a.ends[idx], k1[owner] + ell)
    shift = (k2 - k1)[owner]
    cov = _runs.coverage_in(b.starts, b.ends, b.cum, lo + shift, hi + shift)
    cross = np.bincount(owner, weights=cov.astype(np.float64), minlength=nrep)
    a_cov = _runs.coverage_in(a.starts, a.ends, a.cum, k1, k1 + ell)
    b_cov = _runs.coverage_in(b.starts, b.ends, b.cum, k2, k2 + ell)
    return cross, a_cov.astype(np.float64), b_cov.astype(np.float64)


def cross_region_counts(pair: TrackPair, k1, k2, ell: int):
    """Per replicate: A instances in block 1 (clipped) and how many of
    them touch B in the aligned block 2."""
    k1 = np.asarray(k1, dtype=np.int64)
    k2 = np.asarray(k2, dtype=np.int64)
    a, b = pair.a, pair.b
    nrep = k1.size
    i0, i1 = _runs.span_indices(a.starts, a.ends, k1, k1 + ell)
    counts = (i1 - i0).astype(np.float64)
    idx, owner = _flat_ranges(i0, i1)
    lo = np.maximum(a.starts[idx], k1[owner])
    hi = np.minimum(a.ends[idx], k1[owner] + ell)
    shift = (k2 - k1)[owner]
    cov = _runs.coverage_in(b.starts, b.ends, b.cum, lo + shift, hi + shift)
    hits = np.bincount(owner, weights=(cov > 0).astype(np.float64), minlength=nrep)
    return hits, counts


def _segment_pair_starts(u1, u2, seg_lo, span, ell, strict: bool):
    """Map two uniform columns to a without-replacement start pair."""
    if strict:
        a, b = _rng.disjoint_pair(u1, u2, span, ell)
    else:
        a, b = _rng.distinct_pair(u1, u2, span)
    return seg_lo + a, seg_lo + b


def _check_two_block_feasibility(seg: Segmentation, lam: np.ndarray, strict: bool):
    spans = seg.lengths - lam + 1
    if np.any(spans < 2):
        i = int(np.argmax(spans < 2))
        raise FeasibilityError(
            f"segment {i} ({int(seg.lengths[i])} bases) cannot host two "
            f"distinct blocks of length {int(lam[i])}"
        )
    if strict:
        bad = seg.lengths < 3 * lam - 2
        if np.any(bad):
            i = int(np.argmax(bad))
            raise FeasibilityError(
                f"segment {i} too short for two disjoint blocks of "
                f"length {int(lam[i])}"
            )


def _single_t_values(pair, k1, k2, ell):
    cross1, a1, b1 = cross_joint_lengths(pair, k1, k2, ell)
    cross2, a2, b2 = cross_joint_lengths(pair, k2, k1, ell)
    bad = (a1 <= 0) | (a2 <= 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = 0.5 * (cross1 / a1 + cross2 / a2)
    t = f - 0.5 * (b1 + b2) / ell
    return t, bad


def _stratified_t_values(pair, starts1, starts2, lam, seg):
    """Pieced replicate per Algorithm step: per-segment ratio terms are
    lambda-weighted and summed over both orientations; the recentering
    term uses the summed block coverages."""
    n = seg.n
    nrep = starts1.shape[0]
    weights = (seg.lengths / n).astype(np.float64)
    f = np.zeros(nrep)
    num_c = np.zeros(nrep)
    den_c = np.zeros(nrep)
    bad = np.zeros(nrep, dtype=bool)
    for i in range(seg.num_regions):
        ell = int(lam[i])
        cross1, a1, b1 = cross_joint_lengths(pair, starts1[:, i], starts2[:, i], ell)
        cross2, a2, b2 = cross_joint_lengths(pair, starts2[:, i], starts1[:, i], ell)
        bad |= (a1 <= 0) | (a2 <= 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            f += weights[i] * (cross1 / a1 + cross2 / a2)
        ibar = (a1 + a2) / ell
        jbar = (b1 + b2) / ell
        num_c += weights[i] * ibar * jbar
        den_c += weights[i] * ibar
    bad |= den_c <= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = f - num_c / den_c
    return t, bad


def bp_null_replicates(
    pair: TrackPair, params: TestParams, threads: int = 1
) -> ReplicateDistribution:
    """Cross-pair null replicates T* for the bp-overlap statistic."""
    seg = params.segmentation
    stratified = params.formulation == "conditional" and seg.num_regions > 1
    if stratified:
        lam = block_lengths(seg, params.length)
        work_seg = seg
    else:
        lam = np.asarray([params.length], dtype=np.int64)
        work_seg = Segmentation.trivial(seg.n)
    _check_two_block_feasibility(work_seg, lam, params.strict_disjoint)
    m = work_seg.num_regions
    B = params.replicates
    u = _rng.replicate_uniforms(params.seed, B, 2 * m)
    values = np.empty(B)
    bad = np.zeros(B, dtype=bool)

    def compute(sel_u):
        s1 = np.empty((sel_u.shape[0], m), dtype=np.int64)
        s2 = np.empty_like(s1)
        for i in range(m):
            lo = int(work_seg.bounds[i])
            span = int(work_seg.lengths[i] - lam[i] + 1)
            s1[:, i], s2[:, i] = _segment_pair_starts(
                sel_u[:, 2 * i], sel_u[:, 2 * i + 1], lo, span,
                int(lam[i]), params.strict_disjoint,
            )
        if stratified:
            return _stratified_t_values(pair, s1, s2, lam, work_seg)
        return _single_t_values(pair, s1[:, 0], s2[:, 0], int(lam[0]))

    def work(b_lo, b_hi):
        values[b_lo:b_hi], bad[b_lo:b_hi] = compute(u[b_lo:b_hi])

    run_chunked(B, threads, work)

    degenerate = 0
    for b in np.flatnonzero(bad).tolist():
        gen = _rng.retry_generator(params.seed, b)
        for _ in range(params.max_retries):
            t, still_bad = compute(gen.random(2 * m).reshape(1, -1))
            if not still_bad[0]:
                values[b], bad[b] = t[0], False
                break
        else:
            degenerate += 1
    return ReplicateDistribution(
        values=values[~bad],
        subsample_length=params.length,
        requested=B,
        degenerate_count=degenerate,
        seed=params.seed,
        statistic="bp-overlap-null",
        realized_length=int(lam.sum()),
    )


def null_replicate_bp(
    pair: TrackPair, params: TestParams, rng: np.random.Generator
) -> float:
    """One cross-pair null replicate drawn from an explicit generator."""
    seg = params.segmentation
    stratified = params.formulation == "conditional" and seg.num_regions > 1
    if stratified:
        lam = block_lengths(seg, params.length)
        work_seg = seg
    else:
        lam = np.asarray([params.length], dtype=np.int64)
        work_seg = Segmentation.trivial(seg.n)
    _check_two_block_feasibility(work_seg, lam, params.strict_disjoint)
    m = work_seg.num_regions
    for _ in range(params.max_retries + 1):
        u = rng.random(2 * m)
        s1 = np.empty((1, m), dtype=np.int64)
        s2 = np.empty_like(s1)
        for i in range(m):
            lo = int(work_seg.bounds[i])
            span = int(work_seg.lengths[i] - lam[i] + 1)
            s1[0, i], s2[0, i] = _segment_pair_starts(
                np.asarray([u[2 * i]]), np.asarray([u[2 * i + 1]]),
                lo, span, int(lam[i]), params.strict_disjoint,
            )
        if stratified:
            t, bad = _stratified_t_values(pair, s1, s2, lam, work_seg)
        else:
            t, bad = _single_t_values(pair, s1[:, 0], s2[:, 0], int(lam[0]))
        if not bad[0]:
            return float(t[0])
    raise DegenerateDenominatorError("replicate degenerate after retry budget")


def _order_statistic(values: np.ndarray, rank: int) -> float:
    ordered = np.sort(values)
    rank = min(max(rank, 1), ordered.size)
    return float(ordered[rank - 1])


def _finish_test(
    statistic: str,
    formulation: str,
    observed: float,
    center: float,
    dist: ReplicateDistribution,
    n: int,
    length: int,
    alpha: float,
    two_sided: bool,
) -> TestResult:
    if not 0.0 < alpha < 1.0:
        raise ParameterError("alpha must be in (0, 1)")
    if dist.count < 2:
        raise ParameterError("not enough non-degenerate replicates")
    scale = math.sqrt(2.0 * length / n)
    values = dist.values
    spread = float(values.std(ddof=0))
    crit = center + scale * _order_statistic(values, math.ceil(dist.count * (1.0 - alpha)))
    deviation = (observed - center) / scale
    if two_sided:
        exceed = int(np.sum(np.abs(values) >= abs(deviation)))
    else:
        exceed = int(np.sum(values >= deviation))
    p = (1.0 + exceed) / (dist.count + 1.0)
    if spread > 0:
        z = (observed - center) / (scale * spread)
    else:
        z = math.copysign(math.inf, observed - center) if observed != center else 0.0
    normality_p = None
    if dist.count >= 20 and spread > 0:
        normality_p = lilliefors(values).p_value
    diagnostics = {
        "degenerate_count": dist.degenerate_count,
        "normality_p": normality_p,
    }
    return TestResult(
        statistic=statistic,
        formulation=formulation,
        observed=observed,
        center=center,
        critical_value=crit,
        z_score=z,
        p_value=float(p),
        alpha=alpha,
        two_sided=two_sided,
        se_estimate=scale * spread,
        replicates=dist,
        diagnostics=diagnostics,
    )


def test_bp_overlap(
    pair: TrackPair, params: TestParams, alpha: float, threads: int = 1
) -> TestResult:
    """Test independence of A and B through the bp-overlap fraction."""
    observed = window_mean(OverlapStatistic.BP_OVERLAP, pair, [(0, pair.n)])
    if params.formulation == "conditional":
        center = conditional_center(pair, params.segmentation)
    else:
        center = marginal_center(pair)
    dist = bp_null_replicates(pair, params, threads=threads)
    return _finish_test(
        "bp-overlap", params.formulation, observed.value, center, dist,
        pair.n, params.length, alpha, params.two_sided,
    )


def _natural_starts(pair: TrackPair, block: int) -> tuple[np.ndarray, np.ndarray]:
    """Valid start offsets for blocks confined to single sequences."""
    bounds = pair.space.boundaries
    seq_lo = bounds[:-1]
    spans = np.diff(bounds) - block + 1
    keep = spans >= 1
    if not np.any(keep):
        raise FeasibilityError(f"no sequence can host a block of length {block}")
    return seq_lo[keep], spans[keep]


def _flat_to_position(flat: np.ndarray, seq_lo, spans) -> np.ndarray:
    offsets = np.concatenate([[0], np.cumsum(spans)])
    i = np.searchsorted(offsets, flat, side="right") - 1
    return seq_lo[i] + (flat - offsets[i])


def double_bootstrap_region_overlap(
    pair: TrackPair, params: TestParams, alpha: float, threads: int = 1
) -> TestResult:
    """Region-overlap test with a double bootstrap centering.

    Stage 1 draws pairs of outer blocks (outer_multiplier * length) with
    no stratification beyond sequence boundaries and averages the
    cross-pair region overlap over both orientations of every pair; that
    mean centers the observed statistic.  Stage 2 estimates the null
    spread with segmented blocks of the base length via the same
    cross-pairing, scaled as in the bp-overlap test.
    """
    n = pair.n
    observed = window_mean(OverlapStatistic.REGION_OVERLAP, pair, [(0, n)])
    outer = int(round(params.outer_multiplier * params.length))
    seq_lo, spans = _natural_starts(pair, outer)
    total_span = int(spans.sum())
    if total_span < 2:
        raise FeasibilityError(f"outer blocks of {outer} bases do not fit twice")

    b1 = params.outer_replicates or params.replicates
    u = _rng.replicate_uniforms(_rng.derive_seed(params.seed, "outer"), b1, 2)
    k1f, k2f = _rng.distinct_pair(u[:, 0], u[:, 1], total_span)
    k1 = _flat_to_position(k1f, seq_lo, spans)
    k2 = _flat_to_position(k2f, seq_lo, spans)
    h1, c1 = cross_region_counts(pair, k1, k2, outer)
    h2, c2 = cross_region_counts(pair, k2, k1, outer)
    ok = (c1 > 0) & (c2 > 0)
    if int(ok.sum()) < 2:
        raise DegenerateDenominatorError("outer blocks contain no feature-A instances")
    stage1 = 0.5 * (h1[ok] / c1[ok] + h2[ok] / c2[ok])
    center = float(stage1.mean())

    inner = _region_null_replicates(pair, params, threads)
    result = _finish_test(
        "region-overlap", "double-bootstrap", observed.value, center, inner,
        n, params.length, alpha, params.two_sided,
    )
    result.diagnostics["outer_block_length"] = outer
    result.diagnostics["outer_replicates"] = int(b1)
    result.diagnostics["outer_degenerate"] = int(b1 - ok.sum())
    result.diagnostics["stage1_sd"] = float(stage1.std(ddof=0))
    return result


def _region_null_replicates(
    pair: TrackPair, params: TestParams, threads: int = 1
) -> ReplicateDistribution:
    """Stage-2 cross-pair region-overlap replicates, centered at their mean."""
    seg = params.segmentation
    lam = block_lengths(seg, params.length)
    _check_two_block_feasibility(seg, lam, params.strict_disjoint)
    m = seg.num_regions
    B = params.replicates
    seed = _rng.derive_seed(params.seed, "inner")
    u = _rng.replicate_uniforms(seed, B, 2 * m)
    raw = np.empty(B)
    bad = np.zeros(B, dtype=bool)

    def compute(sel_u):
        nrep = sel_u.shape[0]
        hits1 = np.zeros(nrep)
        cnts1 = np.zeros(nrep)
        hits2 = np.zeros(nrep)
        cnts2 = np.zeros(nrep)
        for i in range(m):
            lo = int(seg.bounds[i])
            span = int(seg.lengths[i] - lam[i] + 1)
            s1, s2 = _segment_pair_starts(
                sel_u[:, 2 * i], sel_u[:, 2 * i + 1], lo, span,
                int(lam[i]), params.strict_disjoint,
            )
            h, c = cross_region_counts(pair, s1, s2, int(lam[i]))
            hits1 += h
            cnts1 += c
            h, c = cross_region_counts(pair, s2, s1, int(lam[i]))
            hits2 += h
            cnts2 += c
        bad_rows = (cnts1 <= 0) | (cnts2 <= 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = 0.5 * (hits1 / cnts1 + hits2 / cnts2)
        return vals, bad_rows

    def work(b_lo, b_hi):
        raw[b_lo:b_hi], bad[b_lo:b_hi] = compute(u[b_lo:b_hi])

    run_chunked(B, threads, work)

    degenerate = 0
    for b in np.flatnonzero(bad).tolist():
        gen = _rng.retry_generator(seed, b)
        for _ in range(params.max_retries):
            val, still_bad = compute(gen.random(2 * m).reshape(1, -1))
            if not still_bad[0]:
                raw[b], bad[b] = val[0], False
                break
        else:
            degenerate += 1
    kept = raw[~bad]
    return ReplicateDistribution(
        values=kept - kept.mean(),
        subsample_length=params.length,
        requested=B,
        degenerate_count=degenerate,
        seed=seed,
        statistic="region-overlap-null",
        realized_length=int(lam.sum()),
    )


def shuffle_baseline(
    pair: TrackPair, kind: StatisticKind, replicates: int, seed: int
) -> ReplicateDistribution:
    """Naive comparator: feature-B instance starts redrawn uniformly.

    Feature A stays fixed; each B instance keeps its length and lands
    uniformly inside its sequence.  Placements colliding with already
    accepted instances (or with each other) are redrawn round by round
    until all instances are pairwise disjoint.  Provided only as the
    baseline the block methods are meant to replace: it ignores clumping
    entirely.
    """
    space = pair.space
    bounds = space.boundaries
    b_track = pair.b
    seq_idx = np.searchsorted(bounds, b_track.starts, side="right") - 1
    lengths = b_track.ends - b_track.starts
    for i in range(len(bounds) - 1):
        mask = seq_idx == i
        if int(lengths[mask].sum()) >= bounds[i + 1] - bounds[i]:
            raise FeasibilityError(
                f"sequence {space.names[i]}: instances cover it entirely; cannot shuffle"
            )
    values = np.empty(replicates)
    for b in range(replicates):
        gen = _rng.indexed_generator(seed, b, "shuffle")
        new_starts = np.empty_like(b_track.starts)
        for i in range(len(bounds) - 1):
            mask = seq_idx == i
            if not mask.any():
                continue
            new_starts[mask] = _place_disjoint(
                lengths[mask], int(bounds[i]), int(bounds[i + 1]), gen
            )
        track = FeatureTrack(space, new_starts, new_starts + lengths)
        values[b] = window_mean(kind, TrackPair(pair.a, track), [(0, pair.n)]).value
    return ReplicateDistribution(
        values=values,
        subsample_length=pair.n,
        requested=replicates,
        degenerate_count=0,
        seed=seed,
        statistic=f"shuffle-{_kind_name(kind)}",
        realized_length=pair.n,
    )


class _DeadEnd(Exception):
    """A sequential packing attempt painted itself into a corner."""


def _place_disjoint(lens: np.ndarray, lo: int, hi: int, gen) -> np.ndarray:
    """Uniform starts in [lo, hi - len] for each instance, redrawing
    collisions.

    The longest few instances are placed first by sampling uniformly
    among their exact admissible starts, the bulk by vectorized
    rejection rounds, stragglers exactly again.  A packing attempt can
    still rarely dead-end through fragmentation; the whole configuration
    is then redrawn.
    """
    for _ in range(100):
        try:
            return _place_attempt(lens, lo, hi, gen)
        except _DeadEnd:
            continue
    raise FeasibilityError("shuffle failed to place instances (too dense)")


def _place_attempt(lens: np.ndarray, lo: int, hi: int, gen) -> np.ndarray:
    k = lens.size
    out = np.empty(k, dtype=np.int64)
    placed_s = np.empty(0, dtype=np.int64)
    placed_e = np.empty(0, dtype=np.int64)

    def place_exact(i: int):
        nonlocal placed_s, placed_e
        ell = int(lens[i])
        gap_lo = np.concatenate([[lo], placed_e])
        gap_hi = np.concatenate([placed_s, [hi]])
        room = np.maximum(gap_hi - gap_lo - ell + 1, 0)
        total = int(room.sum())
        if total <= 0:
            raise _DeadEnd
        r = int(_rng.scaled_int(gen.random(), total))
        g = int(np.searchsorted(np.cumsum(room), r, side="right"))
        start = int(gap_lo[g]) + (r - int(room[:g].sum()))
        out[i] = start
        j = int(np.searchsorted(placed_s, start))
        placed_s = np.insert(placed_s, j, start)
        placed_e = np.insert(placed_e, j, start + ell)

    order = np.argsort(-lens, kind="stable")
    head = min(k, max(16, k // 16))
    for i in order[:head].tolist():
        place_exact(i)
    pending = order[head:]
    for _ in range(40):
        if pending.size <= 16:
            break
        cand_len = lens[pending]
        cand_s = lo + _rng.scaled_int(gen.random(pending.size), hi - lo - cand_len + 1)
        cand_e = cand_s + cand_len
        all_s = np.concatenate([placed_s, cand_s])
        all_e = np.concatenate([placed_e, cand_e])
        # owner >= 0 marks candidate rows (position within `pending`)
        owner = np.concatenate([np.full(placed_s.size, -1), np.arange(pending.size)])
        srt = np.argsort(all_s, kind="stable")
        s, e, who = all_s[srt], all_e[srt], owner[srt]
        reach = np.maximum.accumulate(e)
        clash = np.zeros(s.size, dtype=bool)
        clash[1:] |= s[1:] < reach[:-1]
        clash[:-1] |= e[:-1] > s[1:]
        ok = ~clash & (who >= 0)
        accepted = who[ok]
        if accepted.size:
            out[pending[accepted]] = cand_s[accepted]
            placed_s = np.concatenate([placed_s, cand_s[accepted]])
            placed_e = np.concatenate([placed_e, cand_e[accepted]])
            resort = np.argsort(placed_s)
            placed_s, placed_e = placed_s[resort], placed_e[resort]
            keep = np.ones(pending.size, dtype=bool)
            keep[accepted] = False
            pending = pending[keep]
    for i in pending.tolist():
        place_exact(i)
    return out
