import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsc.errors import FeasibilityError, InputError, ParameterError
from gsc.segmentation import (
    GlrProfile,
    Segmentation,
    SegmentationParams,
    VarianceProfile,
    dyadic_segment,
    glr_profile,
    merge_segmentations,
    segment_pair,
    subsample_variance_profile,
    threshold_for_family_alpha,
)
from gsc.tracks import CoordinateSpace, FeatureTrack, TrackPair

from . import oracles


def track_of(vec):
    return oracles.track_from_vec(np.asarray(vec, dtype=np.int64))


class TestSegmentationType:
    def test_cuts_validated(self):
        with pytest.raises(ParameterError):
            Segmentation(10, (0, 5))
        with pytest.raises(ParameterError):
            Segmentation(10, (0, 5, 5, 10))
        with pytest.raises(ParameterError):
            Segmentation(10, (1, 10))

    def test_segments(self):
        seg = Segmentation(10, (0, 4, 10))
        assert seg.segments() == [(0, 4), (4, 10)]
        assert seg.num_regions == 2
        assert seg.interior() == (4,)

    def test_round_trip(self, tmp_path):
        seg = Segmentation(100, (0, 30, 55, 100), "dyadic")
        seg.to_text(tmp_path / "seg.txt")
        again = Segmentation.from_text(tmp_path / "seg.txt", provenance="dyadic")
        assert again == seg

    def test_from_text_rejects_gaps(self, tmp_path):
        (tmp_path / "seg.txt").write_text("0\t10\n12\t20\n")
        with pytest.raises(InputError, match="contiguous"):
            Segmentation.from_text(tmp_path / "seg.txt")


class TestGlrProfile:
    def test_constant_series_zero(self):
        prof = glr_profile(track_of([1] * 8), 0, 8)
        assert np.all(prof(np.arange(1, 8)) == 0.0)
        prof = glr_profile(track_of([0] * 8), 0, 8)
        assert np.all(prof(np.arange(1, 8)) == 0.0)

    def test_step_series_value(self):
        # series 0,0,1,1: M(2) = 0.25
        prof = glr_profile(track_of([0, 0, 1, 1]), 0, 4)
        assert prof(2) == pytest.approx(0.25)

    def test_matches_dense_definition(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            vec = oracles.random_track_vec(rng, 60)
            prof = glr_profile(oracles.track_from_vec(vec), 0, 60)
            for j in range(1, 60):
                assert prof(j) == pytest.approx(oracles.glr_m(vec, j), rel=1e-12, abs=1e-15)

    def test_windowed_profile_uses_local_offsets(self):
        rng = np.random.default_rng(8)
        vec = oracles.random_track_vec(rng, 80)
        lo, hi = 13, 57
        prof = glr_profile(oracles.track_from_vec(vec), lo, hi)
        sub = vec[lo:hi]
        for j in range(1, hi - lo):
            assert prof(j) == pytest.approx(oracles.glr_m(sub, j), rel=1e-12, abs=1e-15)

    def test_argmax_exact_random(self):
        rng = np.random.default_rng(9)
        for _ in range(60):
            n = int(rng.integers(10, 200))
            vec = oracles.random_track_vec(rng, n, density=float(rng.uniform(0.1, 0.7)))
            prof = glr_profile(oracles.track_from_vec(vec), 0, n)
            j_min, j_max = 1, n - 1
            vals = np.array([oracles.glr_m(vec, j) for j in range(j_min, j_max + 1)])
            expect = j_min + int(np.argmax(vals))  # first max = smallest j
            got_j, got_v = prof.argmax(j_min, j_max)
            assert got_j == expect
            assert got_v == pytest.approx(vals.max(), rel=1e-12, abs=1e-15)

    def test_argmax_restricted_range(self):
        rng = np.random.default_rng(10)
        vec = oracles.random_track_vec(rng, 120)
        prof = glr_profile(oracles.track_from_vec(vec), 0, 120)
        j_min, j_max = 25, 95
        vals = np.array([oracles.glr_m(vec, j) for j in range(j_min, j_max + 1)])
        got_j, _ = prof.argmax(j_min, j_max)
        assert got_j == j_min + int(np.argmax(vals))

    def test_nonnegative_everywhere(self):
        rng = np.random.default_rng(11)
        vec = oracles.random_track_vec(rng, 100)
        prof = glr_profile(oracles.track_from_vec(vec), 0, 100)
        assert np.all(prof(np.arange(1, 100)) >= 0.0)

    def test_complement_invariance(self):
        rng = np.random.default_rng(12)
        vec = oracles.random_track_vec(rng, 100)
        p1 = glr_profile(oracles.track_from_vec(vec), 0, 100)
        p2 = glr_profile(oracles.track_from_vec(1 - vec), 0, 100)
        js = np.arange(1, 100)
        np.testing.assert_allclose(p1(js), p2(js), rtol=1e-12)


class TestVarianceProfile:
    def test_constant_series_zero(self):
        prof = subsample_variance_profile(track_of([1] * 20), 0, 20, 5)
        assert prof(10) == pytest.approx(0.0, abs=1e-15)

    def test_matches_sliding_window_enumeration(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            n = int(rng.integers(12, 80))
            vec = oracles.random_track_vec(rng, n)
            block = int(rng.integers(2, max(3, n // 3)))
            prof = subsample_variance_profile(oracles.track_from_vec(vec), 0, n, block)
            for t in range(2, n - 1):
                left = -(-t * block // n)
                right = -(-(n - t) * block // n)
                if left > t or right > n - t:
                    continue
                assert prof(t) == pytest.approx(
                    oracles.variance_profile(vec, t, block), rel=1e-9, abs=1e-12
                )

    def test_complement_invariance(self):
        vec = oracles.random_track_vec(np.random.default_rng(14), 60)
        p1 = subsample_variance_profile(oracles.track_from_vec(vec), 0, 60, 6)
        p2 = subsample_variance_profile(oracles.track_from_vec(1 - vec), 0, 60, 6)
        assert p1(30) == pytest.approx(p2(30), rel=1e-12, abs=1e-15)

    def test_block_too_long_names_side(self):
        # scaled length exceeds the sub-segment once the block outgrows the window
        prof = subsample_variance_profile(track_of([0, 1] * 20), 0, 40, 50)
        with pytest.raises(FeasibilityError, match="left"):
            prof(3)


def step_track(n, tau, low, high, seed=0):
    rng = np.random.default_rng(seed)
    vec = (rng.random(n) < np.where(np.arange(n) < tau, low, high)).astype(np.int64)
    return oracles.track_from_vec(vec), vec


class TestDyadicSegment:
    def test_homogeneous_constant_trivial(self):
        track = track_of([1] * 50)
        seg = dyadic_segment(track, SegmentationParams(min_length=5))
        assert seg.cuts == (0, 50)
        assert seg.provenance == "dyadic"

    def test_large_threshold_trivial(self):
        track, _ = step_track(400, 200, 0.2, 0.8, seed=1)
        seg = dyadic_segment(
            track, SegmentationParams(min_length=50, threshold=1e9, block_hint=40)
        )
        assert seg.cuts == (0, 400)

    def test_first_cut_is_profile_argmax(self):
        track, vec = step_track(300, 140, 0.15, 0.75, seed=2)
        ls = 100  # halves below 2*ls are unsplittable, so one cut results
        seg = dyadic_segment(track, SegmentationParams(min_length=ls))
        vals = [oracles.glr_m(vec, j) for j in range(ls, 300 - ls + 1)]
        expect = ls + int(np.argmax(vals))
        assert seg.interior() == (expect,)

    def test_deterministic(self):
        track, _ = step_track(500, 230, 0.1, 0.6, seed=3)
        params = SegmentationParams(min_length=60)
        a = dyadic_segment(track, params)
        b = dyadic_segment(track, params)
        assert a == b

    def test_min_length_respected(self):
        track, _ = step_track(512, 201, 0.1, 0.7, seed=4)
        seg = dyadic_segment(track, SegmentationParams(min_length=50))
        assert np.all(seg.lengths >= 50)

    def test_multi_sequence_boundaries_mandatory(self):
        space = CoordinateSpace(("a", "b"), (60, 40))
        track = FeatureTrack.from_intervals(space, [(0, 30), (70, 90)])
        seg = dyadic_segment(track, SegmentationParams(min_length=10))
        assert 60 in seg.cuts

    def test_degenerate_input_trivial(self):
        track = FeatureTrack.empty(CoordinateSpace.single(30))
        seg = dyadic_segment(track, SegmentationParams(min_length=40))
        assert seg.cuts == (0, 30)


class TestMergeSegmentations:
    def test_identity_with_trivial(self):
        seg = Segmentation(10, (0, 4, 10))
        merged = merge_segmentations(seg, Segmentation.trivial(10))
        assert merged.segmentation.cuts == seg.cuts

    def test_union(self):
        s1 = Segmentation(10, (0, 4, 10))
        s2 = Segmentation(10, (0, 6, 10))
        assert merge_segmentations(s1, s2).segmentation.cuts == (0, 4, 6, 10)

    def test_flagged_short_regions(self):
        s1 = Segmentation(10, (0, 4, 5, 10))
        out = merge_segmentations(s1, Segmentation.trivial(10), min_length=3)
        assert out.flagged == ((4, 5),)
        assert out.flagged_length == 1

    def test_mismatched_length(self):
        with pytest.raises(ParameterError):
            merge_segmentations(Segmentation.trivial(10), Segmentation.trivial(11))


class TestSegmentPair:
    def test_merged_signal_unions_cuts(self):
        a, _ = step_track(400, 120, 0.1, 0.8, seed=5)
        b, _ = step_track(400, 280, 0.1, 0.8, seed=6)
        pair = TrackPair(a, b)
        out = segment_pair(pair, SegmentationParams(min_length=80))
        sa = dyadic_segment(a, SegmentationParams(min_length=80))
        sb = dyadic_segment(b, SegmentationParams(min_length=80))
        assert set(out.segmentation.cuts) == set(sa.cuts) | set(sb.cuts)

    def test_single_signal(self):
        a, _ = step_track(400, 120, 0.1, 0.8, seed=5)
        b, _ = step_track(400, 280, 0.1, 0.8, seed=6)
        pair = TrackPair(a, b)
        out = segment_pair(pair, SegmentationParams(min_length=80, signal="a"))
        assert out.segmentation == dyadic_segment(a, SegmentationParams(min_length=80))


class TestThresholdHelper:
    def test_monotone_in_alpha(self):
        hi = threshold_for_family_alpha(0.01, 10_000, 500)
        lo = threshold_for_family_alpha(0.2, 10_000, 500)
        assert hi > lo > 0

    def test_invalid_alpha(self):
        with pytest.raises(ParameterError):
            threshold_for_family_alpha(0.0, 1000, 10)
