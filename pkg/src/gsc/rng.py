"""Deterministic random streams for replicate-parallel engines.

All randomized engines in this package draw the randomness of replicate
``b`` from a stream that is a pure function of ``(seed, b)``: replicate
``b`` consumes row ``b`` of a Philox counter-based layout, so serial,
chunked, and thread-parallel executions produce bit-identical results,
and any single replicate can be regenerated in isolation with
:func:`replicate_row`.

Uniform integers are produced by scaling uniform doubles
(``floor(u * k)``), which consumes a fixed number of counter words per
draw.  The deviation from exact uniformity is O(k / 2**53) and is
irrelevant at genomic scales.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import ParameterError

__all__ = [
    "canonical_seed",
    "derive_seed",
    "generator",
    "replicate_uniforms",
    "replicate_row",
    "indexed_generator",
    "retry_generator",
    "scaled_int",
    "distinct_pair",
    "disjoint_pair",
]

_U64 = 2**64


def canonical_seed(seed: int) -> int:
    """Validate and reduce a user seed to the 64-bit key space."""
    if not isinstance(seed, (int, np.integer)):
        raise ParameterError(f"seed must be an integer, got {type(seed).__name__}")
    return int(seed) % _U64


def derive_seed(seed: int, *tags: object) -> int:
    """Stable 64-bit seed for a named sub-stream of ``seed``.

    Distinct tag paths give independent streams; the mapping is fixed
    across processes and platforms (Python's salted ``hash`` is not used).
    """
    h = hashlib.blake2b(digest_size=8)
    h.update(canonical_seed(seed).to_bytes(8, "little"))
    for tag in tags:
        h.update(repr(tag).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


def _philox(seed: int, stream: int = 0) -> np.random.Philox:
    # key words: (seed, stream index); distinct pairs give distinct streams
    return np.random.Philox(key=canonical_seed(seed) + (int(stream) << 64))


def generator(seed: int, *tags: object) -> np.random.Generator:
    """General-purpose generator for non-replicate randomness."""
    if tags:
        seed = derive_seed(seed, *tags)
    return np.random.Generator(_philox(seed))


def replicate_uniforms(seed: int, n_replicates: int, draws: int) -> np.ndarray:
    """Uniform(0,1) matrix of shape ``(n_replicates, draws)``.

    Row ``b`` is the replicate-``b`` stream; it equals
    ``replicate_row(seed, b, draws)``.
    """
    if n_replicates < 0 or draws < 0:
        raise ParameterError("replicate and draw counts must be nonnegative")
    return np.random.Generator(_philox(seed)).random((n_replicates, draws))


def replicate_row(seed: int, b: int, draws: int) -> np.ndarray:
    """Regenerate replicate ``b``'s uniforms without producing the full matrix.

    Each double consumes one 64-bit word; ``advance`` moves whole Philox
    counter blocks of four words, so position by block plus remainder.
    """
    offset = b * draws
    bg = _philox(seed)
    if offset // 4:
        bg.advance(offset // 4)
    if offset % 4:
        bg.random_raw(offset % 4)
    return np.random.Generator(bg).random(draws)


def indexed_generator(seed: int, index: int, *tags: object) -> np.random.Generator:
    """Independent stream for unit ``index`` of a tagged family, for
    randomness whose draw count is data-dependent (retries, shuffles)."""
    return np.random.Generator(_philox(derive_seed(seed, *tags), stream=index + 1))


def retry_generator(seed: int, b: int) -> np.random.Generator:
    """Continuation stream for degenerate-replicate redraws of replicate ``b``."""
    return indexed_generator(seed, b, "retry")


def scaled_int(u, k) -> np.ndarray:
    """Map uniforms on [0,1) to integers on {0, ..., k-1}."""
    u = np.asarray(u, dtype=np.float64)
    out = np.minimum((u * k).astype(np.int64), np.asarray(k, dtype=np.int64) - 1)
    return np.maximum(out, 0)


def distinct_pair(
    u1: np.ndarray, u2: np.ndarray, k: np.ndarray | int
) -> tuple[np.ndarray, np.ndarray]:
    """Ordered pair of distinct integers from {0, ..., k-1}, uniform over
    all ordered pairs.  Requires k >= 2."""
    a = scaled_int(u1, k)
    b = scaled_int(u2, np.asarray(k, dtype=np.int64) - 1)
    b = b + (b >= a)
    return a, b


def disjoint_pair(
    u1: np.ndarray, u2: np.ndarray, k: np.ndarray | int, gap: np.ndarray | int
) -> tuple[np.ndarray, np.ndarray]:
    """Ordered pair from {0, ..., k-1} with |a - b| >= gap.

    Used by the strict-disjoint block mode; the caller must guarantee at
    least one valid partner exists for every first draw.
    """
    k = np.asarray(k, dtype=np.int64)
    gap = np.asarray(gap, dtype=np.int64)
    a = scaled_int(u1, k)
    below = np.maximum(0, a - gap + 1)  # valid partners in [0, a-gap]
    above = np.maximum(0, k - a - gap)  # valid partners in [a+gap, k-1]
    total = below + above
    if np.any(total < 1):
        raise ParameterError("no disjoint partner start available")
    j = scaled_int(u2, total)
    b = np.where(j < below, j, a + gap + (j - below))
    return a, b
