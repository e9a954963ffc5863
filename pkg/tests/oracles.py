"""Dense 0/1-vector reference implementations.

Everything here works on expanded indicator vectors with plain loops or
numpy reductions, independent of the run-list code paths it checks.
"""

from __future__ import annotations

import math

import numpy as np

from gsc.stats import OverlapStatistic, WindowMeanStatistic


def dense(track) -> np.ndarray:
    out = np.zeros(track.n, dtype=np.int64)
    for s, e in zip(track.starts.tolist(), track.ends.tolist()):
        out[s:e] = 1
    return out


def dense_from_runs(runs, n) -> np.ndarray:
    out = np.zeros(n, dtype=np.int64)
    for s, e in runs:
        out[s:e] = 1
    return out


def instances_in(vec: np.ndarray, lo: int, hi: int) -> list[tuple[int, int]]:
    """Maximal stretches of ones intersecting [lo, hi), clipped."""
    out = []
    k = lo
    window = vec[lo:hi]
    padded = np.concatenate([[0], window, [0]])
    edges = np.flatnonzero(np.diff(padded))
    for s, e in zip(edges[::2], edges[1::2]):
        out.append((lo + int(s), lo + int(e)))
    return out


def falling_edges(vec: np.ndarray) -> int:
    """Count of maximal runs via edges, with zero padding on both sides."""
    padded = np.concatenate([[0], vec, [0]])
    return int(np.sum((padded[:-1] == 1) & (padded[1:] == 0)))


def stat_sums(kind, a: np.ndarray, b: np.ndarray, windows):
    """Accumulated (numerator, denominator) over windows, brute force."""
    num = 0.0
    den = 0.0
    for lo, hi in windows:
        if kind is OverlapStatistic.MEAN_OVERLAP:
            num += float(np.sum(a[lo:hi] * b[lo:hi]))
            den += hi - lo
        elif kind is OverlapStatistic.BP_OVERLAP:
            num += float(np.sum(a[lo:hi] * b[lo:hi]))
            den += float(np.sum(a[lo:hi]))
        elif kind is OverlapStatistic.REGION_OVERLAP:
            for s, e in instances_in(a, lo, hi):
                den += 1
                num += 1 if np.any(b[s:e]) else 0
        elif isinstance(kind, WindowMeanStatistic):
            g = kind.coeffs
            for k in range(lo, hi):
                num += g[a[k]][b[k]]
            den += hi - lo
        else:
            raise AssertionError(kind)
    return num, den


def stat_value(kind, a, b, windows) -> float:
    num, den = stat_sums(kind, a, b, windows)
    return num / den


def glr_m(vec: np.ndarray, j: int) -> float:
    """Mean-shift profile at split offset j, straight from its definition."""
    n = vec.size
    xbar = vec.mean()
    left = vec[:j].mean()
    right = vec[j:].mean()
    return (j / n) * (left - xbar) ** 2 + ((n - j) / n) * (right - xbar) ** 2


def variance_profile(vec: np.ndarray, t: int, block_length: int) -> float:
    """Split-conditional block variance by exhaustive sliding windows."""
    n = vec.size
    total = 0.0
    for seg, seg_len in (((0, t), t), ((t, n), n - t)):
        lo, hi = seg
        ell = math.ceil(seg_len * block_length / n)
        assert ell <= seg_len
        seg_mean = vec[lo:hi].mean()
        acc = 0.0
        for i in range(lo, hi - ell + 1):
            acc += (vec[i : i + ell].mean() - seg_mean) ** 2
        total += (seg_len / n**2) * acc
    return total


def cross_t_value(a: np.ndarray, b: np.ndarray, k1: int, k2: int, ell: int) -> float:
    """Single-segment cross-pair replicate from dense vectors."""
    i1 = a[k1 : k1 + ell]
    j1 = b[k1 : k1 + ell]
    i2 = a[k2 : k2 + ell]
    j2 = b[k2 : k2 + ell]
    ij1 = float(np.sum(i1 * j2)) / ell
    ij2 = float(np.sum(i2 * j1)) / ell
    ibar1 = float(np.sum(i1)) / ell
    ibar2 = float(np.sum(i2)) / ell
    f = 0.5 * (ij1 / ibar1 + ij2 / ibar2)
    jbar = 0.5 * (float(np.sum(j1)) + float(np.sum(j2))) / ell
    return f - jbar


def random_track_vec(rng: np.random.Generator, n: int, density=0.3, clump=3) -> np.ndarray:
    """Clumpy random 0/1 vector for oracle comparisons."""
    vec = np.zeros(n, dtype=np.int64)
    k = max(1, int(n * density / clump))
    starts = rng.integers(0, n, size=k)
    lens = rng.integers(1, 2 * clump + 1, size=k)
    for s, ell in zip(starts.tolist(), lens.tolist()):
        vec[s : min(n, s + ell)] = 1
    return vec


def track_from_vec(vec: np.ndarray, space=None):
    from gsc.tracks import CoordinateSpace, FeatureTrack

    n = vec.size
    if space is None:
        space = CoordinateSpace.single(n, "sim")
    padded = np.concatenate([[0], vec, [0]])
    edges = np.flatnonzero(np.diff(padded))
    return FeatureTrack(space, edges[::2], edges[1::2], normalized=True)
