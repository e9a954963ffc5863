"""Binary feature tracks on a genomic coordinate system.

A track is a 0/1 indicator process over the concatenation of one or more
named sequences, stored as sorted disjoint half-open runs in global
(concatenated) coordinates.  Runs never cross sequence boundaries; the
boundary positions double as mandatory change-points for segmentation.

Boundary convention for instance counting: the indicator is zero-padded
outside the track, so the number of instances in a window equals the
number of maximal runs intersecting it (clipped at the window edges).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import _runs
from .errors import InputError, ParameterError

logger = logging.getLogger(__name__)

__all__ = [
    "CoordinateSpace",
    "FeatureTrack",
    "TrackPair",
    "load_bed",
    "parse_bed",
    "read_sequence_lengths",
    "write_bed",
    "indicator_sum",
    "instances",
]


@dataclass(frozen=True)
class CoordinateSpace:
    """Named sequences with lengths, concatenated into [0, total)."""

    names: tuple[str, ...]
    lengths: tuple[int, ...]

    def __post_init__(self):
        if len(self.names) != len(self.lengths) or not self.names:
            raise InputError("need one positive length per sequence name")
        if len(set(self.names)) != len(self.names):
            raise InputError("sequence names must be unique")
        if any(length < 1 for length in self.lengths):
            raise InputError("sequence lengths must be >= 1")
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "lengths", tuple(int(x) for x in self.lengths))

    @classmethod
    def single(cls, length: int, name: str = "seq") -> "CoordinateSpace":
        return cls((name,), (int(length),))

    @cached_property
    def boundaries(self) -> np.ndarray:
        """Positions 0 = b_0 < b_1 < ... < b_k = total of sequence joins."""
        return np.concatenate([[0], np.cumsum(self.lengths)]).astype(np.int64)

    @property
    def total(self) -> int:
        return int(sum(self.lengths))

    def offset_of(self, name: str) -> int:
        try:
            i = self.names.index(name)
        except ValueError:
            raise InputError(f"unknown sequence name: {name!r}") from None
        return int(self.boundaries[i])


class FeatureTrack:
    """Immutable normalized run list over a :class:`CoordinateSpace`."""

    def __init__(self, space: CoordinateSpace, starts, ends, *, normalized=False):
        self.space = space
        starts = np.asarray(starts, dtype=np.int64)
        ends = np.asarray(ends, dtype=np.int64)
        if not normalized:
            if starts.size and np.any(ends <= starts):
                raise InputError("runs must satisfy start < end")
            self.starts, self.ends = starts, ends
            self._validate()  # raw intervals must respect boundaries
            starts, ends = _runs.normalize_runs(starts, ends)
            # merging touching runs must not weld across a sequence join
            starts, ends = self._split_at_boundaries(starts, ends)
        self.starts = starts
        self.ends = ends
        self._validate()
        self.cum = _runs.cumulative_lengths(starts, ends)
        for arr in (self.starts, self.ends, self.cum):
            arr.setflags(write=False)

    def _split_at_boundaries(self, starts, ends):
        for b in self.space.boundaries[1:-1].tolist():
            i = int(np.searchsorted(starts, b, side="right")) - 1
            if i >= 0 and starts[i] < b < ends[i]:
                starts = np.insert(starts, i + 1, b)
                ends = np.insert(ends, i, b)
        return starts, ends

    def _validate(self):
        n = self.space.total
        if self.starts.size == 0:
            return
        if self.starts[0] < 0 or self.ends[-1] > n:
            raise InputError("runs fall outside the coordinate space")
        bounds = self.space.boundaries
        seq_of_start = np.searchsorted(bounds, self.starts, side="right")
        seq_of_last = np.searchsorted(bounds, self.ends - 1, side="right")
        if np.any(seq_of_start != seq_of_last):
            raise InputError("runs must not cross sequence boundaries")

    @classmethod
    def empty(cls, space: CoordinateSpace) -> "FeatureTrack":
        z = np.empty(0, dtype=np.int64)
        return cls(space, z, z, normalized=True)

    @classmethod
    def from_intervals(cls, space: CoordinateSpace, intervals) -> "FeatureTrack":
        starts, ends = _runs.as_run_arrays(intervals)
        return cls(space, starts, ends)

    @property
    def n(self) -> int:
        return self.space.total

    @property
    def run_count(self) -> int:
        return int(self.starts.size)

    @property
    def total_coverage(self) -> int:
        return int(self.cum[-1])

    def runs(self) -> list[tuple[int, int]]:
        return list(zip(self.starts.tolist(), self.ends.tolist()))

    def shifted(self, delta: int, space: CoordinateSpace) -> "FeatureTrack":
        """Translate all runs by ``delta`` into another space (no clipping)."""
        return FeatureTrack(space, self.starts + delta, self.ends + delta, normalized=True)

    def __eq__(self, other):
        return (
            isinstance(other, FeatureTrack)
            and self.space == other.space
            and np.array_equal(self.starts, other.starts)
            and np.array_equal(self.ends, other.ends)
        )

    def __repr__(self):
        return (
            f"FeatureTrack({self.run_count} runs, {self.total_coverage} bases "
            f"over {self.n})"
        )


class TrackPair:
    """Two tracks (A, B) on an identical coordinate space."""

    def __init__(self, a: FeatureTrack, b: FeatureTrack):
        if a.space != b.space:
            raise InputError("paired tracks must share one coordinate space")
        self.a = a
        self.b = b

    @cached_property
    def joint(self) -> FeatureTrack:
        """Track of positions covered by both A and B."""
        s, e = _runs.intersect_runs(self.a.starts, self.a.ends, self.b.starts, self.b.ends)
        return FeatureTrack(self.a.space, s, e, normalized=True)

    @cached_property
    def a_hits(self) -> np.ndarray:
        """Per A-run flag: shares >= 1 base with B (whole-run extent)."""
        return _runs.run_hits(
            self.a.starts, self.a.ends, self.b.starts, self.b.ends, self.b.cum
        )

    @cached_property
    def a_hits_cum(self) -> np.ndarray:
        out = np.zeros(self.a.run_count + 1, dtype=np.int64)
        np.cumsum(self.a_hits, out=out[1:])
        return out

    @property
    def n(self) -> int:
        return self.a.n

    @property
    def space(self) -> CoordinateSpace:
        return self.a.space


def _check_window(n: int, lo: int, hi: int):
    if not 0 <= lo <= hi <= n:
        raise ParameterError(f"window [{lo}, {hi}) out of range for length {n}")


def indicator_sum(track: FeatureTrack, lo: int, hi: int) -> int:
    """Number of covered bases in [lo, hi)."""
    _check_window(track.n, lo, hi)
    return int(_runs.coverage_in(track.starts, track.ends, track.cum, lo, hi))


def instances(track: FeatureTrack, lo: int, hi: int) -> list[tuple[int, int]]:
    """Maximal runs intersecting [lo, hi), clipped to the window."""
    _check_window(track.n, lo, hi)
    s, e = _runs.clipped_runs(track.starts, track.ends, lo, hi)
    return list(zip(s.tolist(), e.tolist()))


def parse_bed(path, space: CoordinateSpace) -> tuple[list[tuple[int, int]], int]:
    """Read a BED-like file into global-coordinate intervals.

    Returns the raw (unmerged) interval list plus the number of lines whose
    coordinates had to be clipped to their sequence.  Unknown sequence
    names and non-increasing coordinates are hard errors.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    intervals: list[tuple[int, int]] = []
    clipped = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cols = line.split()
            if len(cols) < 3:
                raise InputError(f"{path}:{lineno}: expected >= 3 columns")
            name = cols[0]
            try:
                start, end = int(cols[1]), int(cols[2])
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-integer coordinates") from None
            offset = space.offset_of(name)
            seq_len = space.lengths[space.names.index(name)]
            if end <= start:
                raise InputError(f"{path}:{lineno}: end <= start ({start}, {end})")
            lo, hi = max(start, 0), min(end, seq_len)
            if (lo, hi) != (start, end):
                clipped += 1
            if lo < hi:
                intervals.append((offset + lo, offset + hi))
    return intervals, clipped


def load_bed(path, space: CoordinateSpace) -> FeatureTrack:
    """Load and normalize a BED-like file; overlapping inputs merge."""
    intervals, clipped = parse_bed(path, space)
    if clipped:
        logger.warning("%s: clipped %d interval(s) to sequence bounds", path, clipped)
    return FeatureTrack.from_intervals(space, intervals)


def write_bed(track: FeatureTrack, path) -> None:
    bounds = track.space.boundaries
    with open(path, "w") as fh:
        for s, e in zip(track.starts.tolist(), track.ends.tolist()):
            i = int(np.searchsorted(bounds, s, side="right")) - 1
            off = int(bounds[i])
            fh.write(f"{track.space.names[i]}\t{s - off}\t{e - off}\n")


def read_sequence_lengths(path) -> CoordinateSpace:
    """Two-column text file (name, length) -> CoordinateSpace."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}")
    names, lengths = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cols = line.split()
            if len(cols) < 2:
                raise InputError(f"{path}:{lineno}: expected name and length")
            names.append(cols[0])
            try:
                lengths.append(int(cols[1]))
            except ValueError:
                raise InputError(f"{path}:{lineno}: non-integer length") from None
    return CoordinateSpace(tuple(names), tuple(lengths))
