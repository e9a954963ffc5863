"""Generative models for validating the inference machinery.

Two families: a window-Markov 0/1 sequence whose excursions clump, with
derived pattern/density feature tracks, and a piecewise Neyman-Scott
interval process (Poisson cluster centers, Poisson feature counts per
cluster, geometric offsets and lengths, overlaps merged).

All generators are pure functions of (params, generator state); callers
seed them through :func:`gsc.rng.generator`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .segmentation import Segmentation
from .tracks import CoordinateSpace, FeatureTrack, TrackPair

__all__ = [
    "MarkovParams",
    "NeymanScottRegion",
    "NeymanScottParams",
    "DerivedFeatureRule",
    "simulate_markov",
    "derive_features",
    "simulate_neyman_scott",
    "simulate_piecewise_pair",
]


@dataclass(frozen=True)
class MarkovParams:
    """Window-Markov model: P(x_k = 1) = p0/2 + (1 - p0) * (window mean).

    The dependency window covers the ``window`` previous positions; for
    k below the window order it is truncated to the available history
    and renormalized by its actual size.  Smaller ``p0`` clumps harder;
    p0 = 1 is i.i.d. Bernoulli(1/2).
    """

    n: int
    p0: float
    window: int

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("n must be >= 1")
        if not 0.0 < self.p0 <= 1.0:
            raise ParameterError("p0 must be in (0, 1]")
        if self.window < 1:
            raise ParameterError("window must be >= 1")


def simulate_markov(params: MarkovParams, rng: np.random.Generator) -> np.ndarray:
    n, p0, w = params.n, params.p0, params.window
    u = rng.random(n)
    x = np.zeros(n, dtype=np.uint8)
    half = p0 / 2.0
    dep = 1.0 - p0
    x[0] = u[0] < half
    window_sum = int(x[0])
    for k in range(1, n):
        wlen = k if k < w else w
        p = half + dep * window_sum / wlen
        xk = u[k] < p
        x[k] = xk
        window_sum += int(xk)
        if k >= w:
            window_sum -= int(x[k - w])
    return x


class DerivedFeatureRule(enum.Enum):
    """Feature definitions on a 0/1 sequence.

    PATTERN_MATCH marks every start of the motif 1,1,1,0,0; RUN_DENSITY
    marks every position followed (inclusively) by more than six ones in
    the next ten positions.
    """

    PATTERN_MATCH = "pattern-match"
    RUN_DENSITY = "run-density"


_PATTERN = np.array([1, 1, 1, 0, 0], dtype=np.uint8)
_DENSITY_WINDOW = 10
_DENSITY_THRESHOLD = 6


def derive_features(
    x: np.ndarray, rule: DerivedFeatureRule, space: CoordinateSpace | None = None
) -> FeatureTrack:
    x = np.asarray(x, dtype=np.uint8)
    n = x.size
    if space is None:
        space = CoordinateSpace.single(n, "sim")
    if space.total != n:
        raise ParameterError("coordinate space length must match the sequence")
    if rule is DerivedFeatureRule.PATTERN_MATCH:
        width = _PATTERN.size
        if n < width:
            marks = np.zeros(0, dtype=bool)
        else:
            windows = np.lib.stride_tricks.sliding_window_view(x, width)
            marks = np.all(windows == _PATTERN, axis=1)
    elif rule is DerivedFeatureRule.RUN_DENSITY:
        if n < _DENSITY_WINDOW:
            marks = np.zeros(0, dtype=bool)
        else:
            sums = np.convolve(x, np.ones(_DENSITY_WINDOW, dtype=np.int64), "valid")
            marks = sums > _DENSITY_THRESHOLD
    else:
        raise ParameterError(f"unknown rule {rule!r}")
    padded = np.concatenate([[False], marks, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    starts, ends = edges[::2], edges[1::2]
    return FeatureTrack(space, starts, ends, normalized=True)


@dataclass(frozen=True)
class NeymanScottRegion:
    """One homogeneous stretch of the cluster process.

    ``cluster_rate`` is cluster centers per base; each cluster holds a
    Poisson(``mean_cluster_size``) number of features whose starts sit a
    geometric(mean ``mean_offset``) distance from the center on a
    uniformly random side, with geometric(mean ``mean_length``) lengths
    (both supported on {1, 2, ...}).
    """

    length: int
    cluster_rate: float
    mean_cluster_size: float
    mean_offset: float
    mean_length: float

    def __post_init__(self):
        if self.length < 1:
            raise ParameterError("region length must be >= 1")
        if self.cluster_rate < 0:
            raise ParameterError("cluster rate must be >= 0")
        if self.mean_cluster_size <= 0:
            raise ParameterError("mean cluster size must be > 0")
        if self.mean_offset < 1 or self.mean_length < 1:
            raise ParameterError("geometric means must be >= 1")


@dataclass(frozen=True)
class NeymanScottParams:
    regions: tuple[NeymanScottRegion, ...]

    def __post_init__(self):
        if not self.regions:
            raise ParameterError("need at least one region")
        object.__setattr__(self, "regions", tuple(self.regions))

    @classmethod
    def from_tuples(cls, rows) -> "NeymanScottParams":
        return cls(tuple(NeymanScottRegion(*row) for row in rows))

    @property
    def total_length(self) -> int:
        return int(sum(r.length for r in self.regions))

    def true_segmentation(self) -> Segmentation:
        cuts = np.concatenate([[0], np.cumsum([r.length for r in self.regions])])
        return Segmentation(self.total_length, tuple(int(c) for c in cuts), "true")


def simulate_neyman_scott(
    params: NeymanScottParams,
    rng: np.random.Generator,
    space: CoordinateSpace | None = None,
) -> FeatureTrack:
    """Cluster-process track over the concatenated regions.

    Features are clipped to their region; overlaps merge (the union is
    kept, matching run normalization).
    """
    if space is None:
        space = CoordinateSpace.single(params.total_length, "sim")
    if space.total != params.total_length:
        raise ParameterError("coordinate space length must match the regions")
    all_starts = []
    all_ends = []
    offset = 0
    for region in params.regions:
        t = region.length
        n_clusters = rng.poisson(region.cluster_rate * t)
        if n_clusters > 0:
            centers = rng.integers(0, t, size=n_clusters)
            counts = rng.poisson(region.mean_cluster_size, size=n_clusters)
            total = int(counts.sum())
            if total > 0:
                cc = np.repeat(centers, counts)
                dist = rng.geometric(1.0 / region.mean_offset, size=total)
                sign = rng.integers(0, 2, size=total) * 2 - 1
                starts = cc + sign * dist
                ends = starts + rng.geometric(1.0 / region.mean_length, size=total)
                starts = np.clip(starts, 0, t)
                ends = np.clip(ends, 0, t)
                keep = ends > starts
                all_starts.append(starts[keep] + offset)
                all_ends.append(ends[keep] + offset)
        offset += t
    if not all_starts:
        return FeatureTrack.empty(space)
    return FeatureTrack(
        space, np.concatenate(all_starts), np.concatenate(all_ends)
    )


def simulate_piecewise_pair(
    params: NeymanScottParams, rng: np.random.Generator
) -> tuple[TrackPair, Segmentation]:
    """Two independent tracks from the same region structure, plus the
    true change-point vector."""
    space = CoordinateSpace.single(params.total_length, "sim")
    a = simulate_neyman_scott(params, rng, space)
    b = simulate_neyman_scott(params, rng, space)
    return TrackPair(a, b), params.true_segmentation()
