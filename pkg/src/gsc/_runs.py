"""Vectorized kernels on sorted disjoint half-open integer runs.

A run list is a pair of equal-length ``int64`` arrays ``(starts, ends)``
with ``starts[i] < ends[i] <= starts[i+1]`` after normalization.  Most
kernels also take ``cum``, the exclusive prefix sum of run lengths
(``cum[i]`` = covered bases in runs ``0..i-1``), which makes coverage
queries O(log #runs) each and batchable.
"""

from __future__ import annotations

import numpy as np

_EMPTY = np.empty(0, dtype=np.int64)


def as_run_arrays(intervals) -> tuple[np.ndarray, np.ndarray]:
    """Convert an iterable of (start, end) pairs to int64 arrays."""
    arr = np.asarray(list(intervals), dtype=np.int64)
    if arr.size == 0:
        return _EMPTY.copy(), _EMPTY.copy()
    return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])


def normalize_runs(starts, ends) -> tuple[np.ndarray, np.ndarray]:
    """Sort and merge overlapping or touching runs."""
    starts = np.asarray(starts, dtype=np.int64)
    ends = np.asarray(ends, dtype=np.int64)
    if starts.size == 0:
        return _EMPTY.copy(), _EMPTY.copy()
    order = np.argsort(starts, kind="stable")
    s = starts[order]
    e = ends[order]
    reach = np.maximum.accumulate(e)
    new_group = np.empty(s.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = s[1:] > reach[:-1]  # strict: touching runs merge
    first = np.flatnonzero(new_group)
    last = np.append(first[1:], s.size) - 1
    return s[first].copy(), reach[last].copy()


def cumulative_lengths(starts, ends) -> np.ndarray:
    out = np.zeros(starts.size + 1, dtype=np.int64)
    np.cumsum(ends - starts, out=out[1:])
    return out


def covered_before(starts, ends, cum, x):
    """Covered bases in [0, x); ``x`` may be scalar or array."""
    if starts.size == 0:
        return np.zeros_like(np.asarray(x), dtype=np.int64)
    j = np.searchsorted(starts, x, side="right")
    tail = np.where(j > 0, np.maximum(ends[np.maximum(j, 1) - 1] - x, 0), 0)
    return cum[j] - tail


def coverage_in(starts, ends, cum, lo, hi):
    """Covered bases in [lo, hi); elementwise over arrays."""
    return covered_before(starts, ends, cum, hi) - covered_before(starts, ends, cum, lo)


def span_indices(starts, ends, lo, hi) -> tuple[np.ndarray, np.ndarray]:
    """Index range [i0, i1) of runs intersecting [lo, hi); elementwise."""
    i0 = np.searchsorted(ends, lo, side="right")
    i1 = np.searchsorted(starts, hi, side="left")
    return i0, np.maximum(i1, i0)


def clipped_runs(starts, ends, lo, hi) -> tuple[np.ndarray, np.ndarray]:
    """Runs intersecting [lo, hi), clipped to it (scalar window)."""
    i0, i1 = span_indices(starts, ends, int(lo), int(hi))
    s = np.maximum(starts[i0:i1], lo)
    e = np.minimum(ends[i0:i1], hi)
    return s, e


def intersect_runs(a_starts, a_ends, b_starts, b_ends) -> tuple[np.ndarray, np.ndarray]:
    """Run list of the intersection of two normalized run lists."""
    if a_starts.size == 0 or b_starts.size == 0:
        return _EMPTY.copy(), _EMPTY.copy()
    bounds = np.unique(np.concatenate([a_starts, a_ends, b_starts, b_ends]))
    lo = bounds[:-1]
    in_a = _covers_point(a_starts, a_ends, lo)
    in_b = _covers_point(b_starts, b_ends, lo)
    keep = in_a & in_b
    if not keep.any():
        return _EMPTY.copy(), _EMPTY.copy()
    return normalize_runs(lo[keep], bounds[1:][keep])


def _covers_point(starts, ends, x) -> np.ndarray:
    j = np.searchsorted(starts, x, side="right")
    return (j > 0) & (np.where(j > 0, ends[j - 1], 0) > x)


def instance_window_stats(
    a_starts, a_ends, hit_cum, a_hit_full,
    b_starts, b_ends, b_cum,
    w_lo, w_hi,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-window A-instance count and count of instances touching B.

    Instances are clipped at window edges (an instance crossing the edge
    counts once per window, judged on its clipped extent), so the two
    boundary instances of each window are re-tested against B explicitly
    while interior instances reuse the precomputed whole-run hit flags
    (``a_hit_full`` with exclusive prefix sum ``hit_cum``).
    """
    w_lo = np.asarray(w_lo, dtype=np.int64)
    w_hi = np.asarray(w_hi, dtype=np.int64)
    if a_starts.size == 0:
        zero = np.zeros(np.broadcast(w_lo, w_hi).shape, dtype=np.int64)
        return zero, zero.copy()
    i0, i1 = span_indices(a_starts, a_ends, w_lo, w_hi)
    counts = i1 - i0
    hits = hit_cum[i1] - hit_cum[i0]
    nonempty = counts > 0

    first = np.where(nonempty, i0, 0)
    last = np.where(nonempty, i1 - 1, 0)
    first_clipped = nonempty & (a_starts[first] < w_lo)
    last_clipped = nonempty & (a_ends[last] > w_hi)
    single = first == last

    def _retest(idx, mask):
        if not mask.any():
            return
        k = idx[mask]
        lo = np.maximum(a_starts[k], w_lo[mask])
        hi = np.minimum(a_ends[k], w_hi[mask])
        now = coverage_in(b_starts, b_ends, b_cum, lo, hi) > 0
        hits[mask] += now.astype(np.int64) - a_hit_full[k]

    # a single run clipped on either side is retested once, not twice
    _retest(first, first_clipped | (last_clipped & single))
    _retest(last, last_clipped & ~single)
    return counts, hits


def run_hits(a_starts, a_ends, b_starts, b_ends, b_cum) -> np.ndarray:
    """Boolean per A-run: does it share at least one base with B?"""
    if a_starts.size == 0:
        return np.empty(0, dtype=np.int64)
    return (coverage_in(b_starts, b_ends, b_cum, a_starts, a_ends) > 0).astype(np.int64)
