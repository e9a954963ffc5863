"""Overlap statistics of track pairs.

Every statistic here is a ratio whose numerator and denominator
accumulate additively over disjoint windows; engines exploit this to
piece one replicate value together from per-segment blocks before
dividing.  Consequently each result carries its numerator and
denominator alongside the value.

Window semantics: feature instances are clipped at window edges, so an
instance crossing a window boundary contributes to each side separately
(region-overlap counts are judged on the clipped extent).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _runs
from .errors import DegenerateDenominatorError, ParameterError
from .tracks import TrackPair

__all__ = [
    "OverlapStatistic",
    "WindowMeanStatistic",
    "StatValue",
    "OverlapMoments",
    "window_mean",
    "window_sums",
    "mean_overlap",
    "bp_overlap_fraction",
    "region_overlap",
    "delta_variance_bp",
    "parse_statistic",
]


class OverlapStatistic(enum.Enum):
    """Built-in ratio statistics of a track pair.

    MEAN_OVERLAP
        Jointly covered bases per window base.
    BP_OVERLAP
        Jointly covered bases per feature-A base.
    REGION_OVERLAP
        Fraction of feature-A instances sharing >= 1 base with B.
    """

    MEAN_OVERLAP = "mean-overlap"
    BP_OVERLAP = "bp-overlap"
    REGION_OVERLAP = "region-overlap"


@dataclass(frozen=True)
class WindowMeanStatistic:
    """Mean over window positions of g(I_k, J_k).

    ``coeffs[i][j]`` is the (bounded) value of g when the pair of
    indicators equals (i, j); the name labels reports.
    """

    name: str
    coeffs: tuple[tuple[float, float], tuple[float, float]]


StatisticKind = OverlapStatistic | WindowMeanStatistic


@dataclass(frozen=True)
class StatValue:
    value: float
    numerator: float
    denominator: float


def window_sums(kind: StatisticKind, pair: TrackPair, w_lo, w_hi, group=None, n_groups=None):
    """Numerator and denominator totals over windows, optionally grouped.

    ``w_lo``/``w_hi`` are arrays of half-open window bounds.  With
    ``group`` (int array) the windows are summed per group id, giving one
    (num, den) pair per replicate in the engines; otherwise a single pair
    of scalars is returned.
    """
    w_lo = np.atleast_1d(np.asarray(w_lo, dtype=np.int64))
    w_hi = np.atleast_1d(np.asarray(w_hi, dtype=np.int64))
    lengths = (w_hi - w_lo).astype(np.float64)
    if isinstance(kind, WindowMeanStatistic):
        joint = pair.joint
        cj = _runs.coverage_in(joint.starts, joint.ends, joint.cum, w_lo, w_hi)
        ca = _runs.coverage_in(pair.a.starts, pair.a.ends, pair.a.cum, w_lo, w_hi)
        cb = _runs.coverage_in(pair.b.starts, pair.b.ends, pair.b.cum, w_lo, w_hi)
        g = kind.coeffs
        num = (
            g[1][1] * cj
            + g[1][0] * (ca - cj)
            + g[0][1] * (cb - cj)
            + g[0][0] * (lengths - ca - cb + cj)
        )
        den = lengths
    elif kind is OverlapStatistic.MEAN_OVERLAP:
        joint = pair.joint
        num = _runs.coverage_in(joint.starts, joint.ends, joint.cum, w_lo, w_hi)
        den = lengths
    elif kind is OverlapStatistic.BP_OVERLAP:
        joint = pair.joint
        num = _runs.coverage_in(joint.starts, joint.ends, joint.cum, w_lo, w_hi)
        den = _runs.coverage_in(pair.a.starts, pair.a.ends, pair.a.cum, w_lo, w_hi)
    elif kind is OverlapStatistic.REGION_OVERLAP:
        den, num = _runs.instance_window_stats(
            pair.a.starts, pair.a.ends, pair.a_hits_cum, pair.a_hits,
            pair.b.starts, pair.b.ends, pair.b.cum,
            w_lo, w_hi,
        )
    else:
        raise ParameterError(f"unknown statistic kind: {kind!r}")

    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    if group is None:
        return float(num.sum()), float(den.sum())
    return (
        np.bincount(group, weights=num, minlength=n_groups),
        np.bincount(group, weights=den, minlength=n_groups),
    )


def _check_windows(pair: TrackPair, windows):
    if not windows:
        raise ParameterError("need at least one window")
    prev_hi = None
    for lo, hi in sorted(windows):
        if not 0 <= lo < hi <= pair.n:
            raise ParameterError(f"bad window [{lo}, {hi}) for length {pair.n}")
        if prev_hi is not None and lo < prev_hi:
            raise ParameterError("windows must be disjoint")
        prev_hi = hi


def window_mean(kind: StatisticKind, pair: TrackPair, windows) -> StatValue:
    """Statistic over the concatenation of disjoint windows."""
    _check_windows(pair, windows)
    w = np.asarray(windows, dtype=np.int64)
    num, den = window_sums(kind, pair, w[:, 0], w[:, 1])
    if den <= 0:
        raise DegenerateDenominatorError(
            f"{_kind_name(kind)} undefined: zero denominator over the windows"
        )
    return StatValue(num / den, num, den)


def _kind_name(kind: StatisticKind) -> str:
    return kind.name if isinstance(kind, WindowMeanStatistic) else kind.value


def mean_overlap(pair: TrackPair, lo: int, hi: int) -> StatValue:
    """Jointly covered bases in [lo, hi) divided by the window length."""
    return window_mean(OverlapStatistic.MEAN_OVERLAP, pair, [(lo, hi)])


def bp_overlap_fraction(pair: TrackPair, lo: int, hi: int) -> StatValue:
    """Jointly covered bases divided by feature-A bases in [lo, hi)."""
    return window_mean(OverlapStatistic.BP_OVERLAP, pair, [(lo, hi)])


def region_overlap(pair: TrackPair, lo: int, hi: int) -> StatValue:
    """Fraction of A instances in [lo, hi) sharing >= 1 base with B."""
    return window_mean(OverlapStatistic.REGION_OVERLAP, pair, [(lo, hi)])


@dataclass(frozen=True)
class OverlapMoments:
    """Estimated first and second moments of (mean overlap, A coverage)."""

    mean_x: float
    mean_d: float
    var_x: float
    var_d: float
    cov_xd: float


def delta_variance_bp(moments: OverlapMoments) -> float:
    """First-order (delta method) variance of the ratio X / D."""
    mx, md = moments.mean_x, moments.mean_d
    if md == 0:
        raise ParameterError("delta-method variance undefined for mean_d == 0")
    return (
        moments.var_x / md**2
        + mx**2 * moments.var_d / md**4
        - 2.0 * mx * moments.cov_xd / md**3
    )


def parse_statistic(name: str) -> OverlapStatistic:
    try:
        return OverlapStatistic(name)
    except ValueError:
        valid = ", ".join(k.value for k in OverlapStatistic)
        raise ParameterError(f"unknown statistic {name!r}; expected one of {valid}") from None
