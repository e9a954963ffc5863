"""Dyadic change-point segmentation of 0/1 series stored as run lists.

The split criterion is the mean-shift generalized likelihood ratio
profile M(j); a region is split at the maximizer of M and recursion
continues while a (possibly normalized) split statistic clears the
threshold and no resulting region would drop below the minimum region
length.  With threshold 0 (the default) normalization is skipped and the
minimum region length is the sole stopping control.

Everything is computed from prefix sums over the run list.  M is
piecewise smooth between run boundaries, so its exact integer argmax is
found by evaluating only run boundaries and the one interior critical
point per linear piece of the centered prefix sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import stats as _scipy_stats

from . import _runs
from .errors import FeasibilityError, InputError, ParameterError
from .tracks import FeatureTrack, TrackPair

__all__ = [
    "Segmentation",
    "SegmentationParams",
    "MergeResult",
    "GlrProfile",
    "VarianceProfile",
    "glr_profile",
    "subsample_variance_profile",
    "dyadic_segment",
    "merge_segmentations",
    "segment_pair",
    "threshold_for_family_alpha",
]


@dataclass(frozen=True)
class Segmentation:
    """Ordered cut positions 0 = t_0 < t_1 < ... < t_m = n."""

    n: int
    cuts: tuple[int, ...]
    provenance: str = "manual"

    def __post_init__(self):
        cuts = tuple(int(c) for c in self.cuts)
        object.__setattr__(self, "cuts", cuts)
        if len(cuts) < 2 or cuts[0] != 0 or cuts[-1] != self.n:
            raise ParameterError("cuts must start at 0 and end at n")
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ParameterError("cuts must be strictly increasing")

    @classmethod
    def trivial(cls, n: int, provenance: str = "manual") -> "Segmentation":
        return cls(n, (0, n), provenance)

    @cached_property
    def bounds(self) -> np.ndarray:
        return np.asarray(self.cuts, dtype=np.int64)

    @property
    def num_regions(self) -> int:
        return len(self.cuts) - 1

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.bounds)

    def segments(self) -> list[tuple[int, int]]:
        return list(zip(self.cuts[:-1], self.cuts[1:]))

    def interior(self) -> tuple[int, ...]:
        return self.cuts[1:-1]

    def with_cuts(self, extra, provenance=None) -> "Segmentation":
        merged = sorted(set(self.cuts) | {int(c) for c in extra})
        return Segmentation(self.n, tuple(merged), provenance or self.provenance)

    def to_text(self, path) -> None:
        with open(path, "w") as fh:
            for lo, hi in self.segments():
                fh.write(f"{lo}\t{hi}\n")

    @classmethod
    def from_text(cls, path, provenance: str = "manual") -> "Segmentation":
        path = Path(path)
        if not path.exists():
            raise InputError(f"no such file: {path}")
        regions = []
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                cols = line.split()
                if len(cols) < 2:
                    raise InputError(f"{path}:{lineno}: expected start and end")
                regions.append((int(cols[0]), int(cols[1])))
        if not regions:
            raise InputError(f"{path}: no regions")
        cuts = [regions[0][0]]
        for lo, hi in regions:
            if lo != cuts[-1]:
                raise InputError(f"{path}: regions must be contiguous at {lo}")
            cuts.append(hi)
        if cuts[0] != 0:
            raise InputError(f"{path}: first region must start at 0")
        return cls(cuts[-1], tuple(cuts), provenance)


@dataclass(frozen=True)
class SegmentationParams:
    """Controls for dyadic segmentation.

    ``min_length`` is the smallest allowed region; ``threshold`` the
    stopping threshold on the normalized split statistic (0 disables
    normalization entirely, so recursion stops only on ``min_length``);
    ``block_hint`` the block length used to normalize when
    ``threshold > 0``; ``signal`` picks the series segmented by
    :func:`segment_pair`.
    """

    min_length: int
    threshold: float = 0.0
    block_hint: int | None = None
    signal: str = "merged"  # merged | a | b | joint

    def __post_init__(self):
        if self.min_length < 1:
            raise ParameterError("min_length must be >= 1")
        if self.threshold < 0:
            raise ParameterError("threshold must be >= 0")
        if self.threshold > 0 and self.block_hint is None:
            raise ParameterError("threshold > 0 requires block_hint")
        if self.signal not in ("merged", "a", "b", "joint"):
            raise ParameterError(f"unknown signal {self.signal!r}")


class GlrProfile:
    """Evaluator of the mean-shift profile M(j) on a window of a track.

    ``j`` is the split offset within [lo, hi): the first ``j`` positions
    against the rest.  M(j) = d(j)^2 / (n^2 j (n-j)) with
    d(j) = n S(j) - j S(n), where S is the prefix count of covered
    positions; d is exact in int64, so M matches the dense-vector
    definition to floating-point roundoff.
    """

    def __init__(self, track: FeatureTrack, lo: int, hi: int):
        if hi - lo < 2:
            raise ParameterError("profile window must have length >= 2")
        self.lo, self.hi = int(lo), int(hi)
        self.length = self.hi - self.lo
        s, e = _runs.clipped_runs(track.starts, track.ends, lo, hi)
        self._starts = s - self.lo
        self._ends = e - self.lo
        self._cum = _runs.cumulative_lengths(self._starts, self._ends)
        self.total = int(self._cum[-1])

    def prefix(self, j):
        return _runs.covered_before(self._starts, self._ends, self._cum, j)

    def __call__(self, j):
        j = np.asarray(j, dtype=np.int64)
        n = self.length
        d = n * self.prefix(j) - j * self.total
        denom = np.maximum(j * (n - j), 1).astype(np.float64)
        m = d.astype(np.float64) ** 2 / (float(n) ** 2 * denom)
        return np.where((j <= 0) | (j >= n), 0.0, m)

    def argmax(self, j_min: int, j_max: int) -> tuple[int, float]:
        """Exact integer argmax of M over [j_min, j_max]; ties -> smallest j."""
        n = self.length
        j_min = max(1, int(j_min))
        j_max = min(n - 1, int(j_max))
        if j_min > j_max:
            raise ParameterError("empty argmax range")
        if self.total == 0 or self.total == n:
            return j_min, 0.0
        cand = [np.asarray([j_min, j_max], dtype=np.int64)]
        # breakpoints of the piecewise-linear centered prefix d(j)
        bp = np.unique(np.concatenate([self._starts, self._ends]))
        bp = bp[(bp >= j_min) & (bp <= j_max)]
        cand.append(bp)
        # interior critical points of M on each linear piece of d
        pieces = np.unique(np.concatenate([[j_min], bp, [j_max]]))
        u = pieces[:-1]
        d_u = n * self.prefix(u) - u * self.total
        d_next = n * self.prefix(u + 1) - (u + 1) * self.total
        slope = (d_next - d_u).astype(np.float64)
        c = d_u.astype(np.float64) - slope * u  # d(j) = c + slope * j on the piece
        denom = slope * n + 2.0 * c
        with np.errstate(divide="ignore", invalid="ignore"):
            j_star = np.where(denom != 0, c * n / denom, -1.0)
        for shift in (np.floor, np.ceil):
            js = shift(j_star)
            ok = (js >= j_min) & (js <= j_max) & np.isfinite(js)
            cand.append(js[ok].astype(np.int64))
        js = np.unique(np.concatenate(cand))
        vals = self(js)
        best = int(np.argmax(vals))  # first max -> smallest j on ties
        return int(js[best]), float(vals[best])


class VarianceProfile:
    """Evaluator of the split-conditional block-subsampling variance V(t).

    For a candidate split at offset ``t`` of the window, each side is
    scanned with every maximal sliding block of the proportionally scaled
    length (ceiling rule), and the scaled squared deviations of block
    means around the side mean are summed.
    """

    def __init__(self, track: FeatureTrack, lo: int, hi: int, block_length: int):
        if hi - lo < 2:
            raise ParameterError("profile window must have length >= 2")
        if block_length < 1:
            raise ParameterError("block_length must be >= 1")
        self.lo, self.hi = int(lo), int(hi)
        self.length = self.hi - self.lo
        self.block_length = int(block_length)
        s, e = _runs.clipped_runs(track.starts, track.ends, lo, hi)
        self._starts = s - self.lo
        self._ends = e - self.lo
        self._cum = _runs.cumulative_lengths(self._starts, self._ends)

    def _prefix(self, j):
        return _runs.covered_before(self._starts, self._ends, self._cum, j)

    def _side(self, seg_lo: int, seg_hi: int, name: str) -> float:
        n = self.length
        seg_len = seg_hi - seg_lo
        ell = math.ceil(seg_len * self.block_length / n)
        if ell > seg_len:
            raise FeasibilityError(
                f"{name} side of split too short for scaled block "
                f"({ell} > {seg_len})"
            )
        count, s1, s2 = self._sliding_sums(seg_lo, seg_hi, ell)
        mean = (self._prefix(seg_hi) - self._prefix(seg_lo)) / seg_len
        target = ell * mean
        dev_sq = s2 - 2.0 * target * s1 + count * target * target
        return (seg_len / n**2) * dev_sq / ell**2

    def _sliding_sums(self, seg_lo: int, seg_hi: int, ell: int):
        """(count, sum W, sum W^2) over W(i) = covered in [i, i+ell),
        i = seg_lo .. seg_hi - ell."""
        last = seg_hi - ell
        pts = np.concatenate(
            [self._starts, self._ends, self._starts - ell, self._ends - ell,
             [seg_lo, last + 1]]
        )
        pts = np.unique(pts[(pts >= seg_lo) & (pts <= last + 1)])
        w = (self._prefix(pts + ell) - self._prefix(pts)).astype(np.float64)
        u, v = pts[:-1], pts[1:]
        m = (v - u).astype(np.float64)
        slope = (w[1:] - w[:-1]) / m  # exact: W is linear between breakpoints
        # half-open pieces [u, v) jointly cover every start in [seg_lo, last]
        wu = w[:-1]
        k1 = m * (m - 1.0) / 2.0
        k2 = (m - 1.0) * m * (2.0 * m - 1.0) / 6.0
        s1 = float(np.sum(m * wu + slope * k1))
        s2 = float(np.sum(m * wu**2 + 2.0 * wu * slope * k1 + slope**2 * k2))
        count = float(last - seg_lo + 1)
        return count, s1, s2

    def __call__(self, t: int) -> float:
        t = int(t)
        if not 0 < t < self.length:
            raise ParameterError("split offset must be interior")
        return self._side(0, t, "left") + self._side(t, self.length, "right")


def glr_profile(track: FeatureTrack, lo: int, hi: int) -> GlrProfile:
    return GlrProfile(track, lo, hi)


def subsample_variance_profile(
    track: FeatureTrack, lo: int, hi: int, block_length: int
) -> VarianceProfile:
    return VarianceProfile(track, lo, hi, block_length)


def dyadic_segment(track: FeatureTrack, params: SegmentationParams) -> Segmentation:
    """Recursive binary segmentation of a 0/1 track.

    Sequence boundaries are injected as mandatory cuts and each sequence
    is segmented independently; degenerate inputs return the boundary
    segmentation unchanged.
    """
    n = track.n
    cuts: set[int] = set(int(b) for b in track.space.boundaries)
    for lo, hi in zip(track.space.boundaries[:-1], track.space.boundaries[1:]):
        cuts.update(_segment_range(track, int(lo), int(hi), params, n))
    return Segmentation(n, tuple(sorted(cuts)), "dyadic")


def _segment_range(track, lo, hi, params, n_total) -> list[int]:
    ls = params.min_length
    segments = [(lo, hi)]
    candidates: dict[tuple[int, int], tuple[int, float]] = {}

    def candidate(seg):
        if seg not in candidates:
            a, b = seg
            if b - a > 2 * ls:
                prof = GlrProfile(track, a, b)
                j, best = prof.argmax(ls, (b - a) - ls)
                candidates[seg] = (a + j, best)
            else:
                candidates[seg] = (-1, 0.0)
        return candidates[seg]

    out: list[int] = []
    while True:
        stats = [candidate(seg) for seg in segments]
        best_i = -1
        best_b = 0.0
        any_pass = False
        for i, ((a, b), (cut, stat)) in enumerate(zip(segments, stats)):
            if cut < 0 or stat <= 0.0:
                continue
            if params.threshold > 0.0:
                norm = _normalized_split_stat(track, a, b, cut, stat, params, n_total)
                if norm > params.threshold:
                    any_pass = True
            else:
                any_pass = True
            if stat > best_b:
                best_b = stat
                best_i = i
        if not any_pass or best_i < 0:
            return out
        a, b = segments.pop(best_i)
        cut, _ = candidates.pop((a, b))
        out.append(cut)
        segments.insert(best_i, (cut, b))
        segments.insert(best_i, (a, cut))


def _normalized_split_stat(track, a, b, cut, stat, params, n_total) -> float:
    length = b - a
    lam = params.block_hint * length / n_total
    v = VarianceProfile(track, a, b, params.block_hint)(cut - a)
    if v <= 0.0:
        return math.inf if stat > 0 else 0.0
    return length * stat / math.sqrt(v * lam)


@dataclass(frozen=True)
class MergeResult:
    segmentation: Segmentation
    flagged: tuple[tuple[int, int], ...] = ()
    flagged_length: int = 0


def merge_segmentations(
    s1: Segmentation, s2: Segmentation, min_length: int | None = None
) -> MergeResult:
    """Union of the cut sets; regions shorter than ``min_length`` are
    flagged (kept, with the total flagged length reported) for the caller
    to drop or keep."""
    if s1.n != s2.n:
        raise ParameterError(f"segmentation lengths differ: {s1.n} != {s2.n}")
    merged = s1.with_cuts(s2.cuts, provenance="merged")
    flagged: list[tuple[int, int]] = []
    if min_length is not None:
        flagged = [(a, b) for a, b in merged.segments() if b - a < min_length]
    return MergeResult(
        merged, tuple(flagged), int(sum(b - a for a, b in flagged))
    )


def segment_pair(pair: TrackPair, params: SegmentationParams) -> MergeResult:
    """Segment a pair by the configured signal.

    The default segments the A and B indicators separately and takes the
    union of their change-points, flagging any resulting region shorter
    than the minimum length.
    """
    if params.signal == "a":
        return MergeResult(dyadic_segment(pair.a, params))
    if params.signal == "b":
        return MergeResult(dyadic_segment(pair.b, params))
    if params.signal == "joint":
        return MergeResult(dyadic_segment(pair.joint, params))
    sa = dyadic_segment(pair.a, params)
    sb = dyadic_segment(pair.b, params)
    result = merge_segmentations(sa, sb, params.min_length)
    return MergeResult(
        Segmentation(result.segmentation.n, result.segmentation.cuts, "dyadic"),
        result.flagged,
        result.flagged_length,
    )


def threshold_for_family_alpha(alpha: float, n: int, min_length: int) -> float:
    """Crude Bonferroni threshold for the normalized split statistic.

    The normalized statistic behaves like a chi-squared(1) pivot per
    candidate region; with roughly n / min_length candidate regions a
    family-wise level ``alpha`` maps to the corresponding upper quantile.
    Guidance only; the default workflow keeps threshold 0.
    """
    if not 0 < alpha < 1:
        raise ParameterError("alpha must be in (0, 1)")
    k = max(1, n // max(1, min_length))
    return float(_scipy_stats.chi2.ppf(1.0 - alpha / k, df=1))
