import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsc.errors import DegenerateDenominatorError, ParameterError
from gsc.stats import (
    OverlapMoments,
    OverlapStatistic,
    WindowMeanStatistic,
    bp_overlap_fraction,
    delta_variance_bp,
    mean_overlap,
    parse_statistic,
    region_overlap,
    window_mean,
)
from gsc.tracks import CoordinateSpace, FeatureTrack, TrackPair

from . import oracles

SPACE10 = CoordinateSpace.single(10)


def pair_from(runs_a, runs_b, space=SPACE10):
    return TrackPair(
        FeatureTrack.from_intervals(space, runs_a),
        FeatureTrack.from_intervals(space, runs_b),
    )


class TestMeanOverlap:
    def test_identical_tracks(self):
        pair = pair_from([(0, 6)], [(0, 6)])
        assert mean_overlap(pair, 0, 10).value == pytest.approx(0.6)

    def test_disjoint_tracks(self):
        pair = pair_from([(0, 3)], [(5, 8)])
        assert mean_overlap(pair, 0, 10).value == 0.0

    def test_partial(self):
        pair = pair_from([(0, 5)], [(3, 8)])
        sv = mean_overlap(pair, 0, 10)
        assert sv.value == pytest.approx(0.2)
        assert sv.numerator == 2
        assert sv.denominator == 10

    def test_empty_window_rejected(self):
        pair = pair_from([(0, 5)], [(3, 8)])
        with pytest.raises(ParameterError):
            mean_overlap(pair, 4, 4)


class TestBpOverlapFraction:
    def test_containment(self):
        pair = pair_from([(2, 5)], [(0, 9)])
        assert bp_overlap_fraction(pair, 0, 10).value == 1.0

    def test_partial(self):
        pair = pair_from([(0, 5)], [(3, 8)])
        assert bp_overlap_fraction(pair, 0, 10).value == pytest.approx(0.4)

    def test_empty_b(self):
        pair = pair_from([(0, 5)], [])
        assert bp_overlap_fraction(pair, 0, 10).value == 0.0

    def test_zero_a_coverage_degenerate(self):
        pair = pair_from([], [(0, 5)])
        with pytest.raises(DegenerateDenominatorError):
            bp_overlap_fraction(pair, 0, 10)

    def test_numerator_symmetric_value_not(self):
        pair = pair_from([(0, 5)], [(3, 9)])
        swapped = TrackPair(pair.b, pair.a)
        fwd = bp_overlap_fraction(pair, 0, 10)
        rev = bp_overlap_fraction(swapped, 0, 10)
        assert fwd.numerator == rev.numerator
        assert fwd.value != rev.value


class TestRegionOverlap:
    def test_all_instances_touch(self):
        pair = pair_from([(1, 4), (6, 9)], [(0, 10)])
        assert region_overlap(pair, 0, 10).value == 1.0

    def test_half(self):
        pair = pair_from([(1, 4), (6, 9)], [(2, 3)])
        assert region_overlap(pair, 0, 10).value == pytest.approx(0.5)

    def test_no_instances_degenerate(self):
        pair = pair_from([], [(2, 3)])
        with pytest.raises(DegenerateDenominatorError):
            region_overlap(pair, 0, 10)

    def test_instance_clipped_at_window_edge(self):
        # instance [1,6) hits B only outside the window; clipped extent misses
        pair = pair_from([(1, 6)], [(4, 6)])
        assert region_overlap(pair, 0, 4).value == 0.0
        assert region_overlap(pair, 0, 10).value == 1.0


class TestDeltaVariance:
    def test_denominator_constant(self):
        m = OverlapMoments(mean_x=0.2, mean_d=0.5, var_x=0.04, var_d=0.0, cov_xd=0.0)
        assert delta_variance_bp(m) == pytest.approx(0.04 / 0.25)

    def test_full_formula_against_direct_evaluation(self):
        m = OverlapMoments(mean_x=0.3, mean_d=0.6, var_x=0.02, var_d=0.05, cov_xd=0.01)
        expected = 0.02 / 0.6**2 + 0.3**2 * 0.05 / 0.6**4 - 2 * 0.3 * 0.01 / 0.6**3
        assert delta_variance_bp(m) == pytest.approx(expected, rel=1e-12)

    def test_zero_mean_x(self):
        m = OverlapMoments(mean_x=0.0, mean_d=0.5, var_x=0.04, var_d=0.05, cov_xd=0.01)
        assert delta_variance_bp(m) == pytest.approx(0.04 / 0.25)

    def test_zero_mean_d_rejected(self):
        m = OverlapMoments(0.1, 0.0, 0.1, 0.1, 0.0)
        with pytest.raises(ParameterError):
            delta_variance_bp(m)


class TestWindowMean:
    def test_single_window_consistency(self):
        pair = pair_from([(0, 5)], [(3, 8)])
        via_op = bp_overlap_fraction(pair, 0, 10)
        via_windows = window_mean(OverlapStatistic.BP_OVERLAP, pair, [(0, 10)])
        assert via_windows == via_op

    def test_two_window_accumulation(self):
        # numerators 1 and 3 over two length-5 windows -> 4/10
        pair = pair_from([(0, 10)], [(2, 3), (5, 8)])
        sv = window_mean(OverlapStatistic.MEAN_OVERLAP, pair, [(0, 5), (5, 10)])
        assert sv.value == pytest.approx(0.4)

    def test_empty_window_list_rejected(self):
        pair = pair_from([(0, 5)], [(3, 8)])
        with pytest.raises(ParameterError):
            window_mean(OverlapStatistic.MEAN_OVERLAP, pair, [])

    def test_overlapping_windows_rejected(self):
        pair = pair_from([(0, 5)], [(3, 8)])
        with pytest.raises(ParameterError):
            window_mean(OverlapStatistic.MEAN_OVERLAP, pair, [(0, 5), (4, 9)])

    def test_split_invariance(self):
        pair = pair_from([(1, 4), (6, 9)], [(2, 7)])
        whole = window_mean(OverlapStatistic.REGION_OVERLAP, pair, [(0, 10)])
        for cut in range(1, 10):
            split = window_mean(
                OverlapStatistic.REGION_OVERLAP, pair, [(0, cut), (cut, 10)]
            )
            # numerator/denominator accumulate; instances split at the cut
            assert split.denominator >= whole.denominator

    def test_mean_overlap_split_exact(self):
        pair = pair_from([(1, 4), (6, 9)], [(2, 7)])
        whole = window_mean(OverlapStatistic.MEAN_OVERLAP, pair, [(0, 10)])
        for cut in range(1, 10):
            split = window_mean(OverlapStatistic.MEAN_OVERLAP, pair, [(0, cut), (cut, 10)])
            assert split.value == pytest.approx(whole.value, rel=1e-12)

    def test_custom_window_function(self):
        xor = WindowMeanStatistic("xor", ((0.0, 1.0), (1.0, 0.0)))
        pair = pair_from([(0, 5)], [(3, 8)])
        sv = window_mean(xor, pair, [(0, 10)])
        # xor covered: [0,3) and [5,8) -> 6 of 10
        assert sv.value == pytest.approx(0.6)

    def test_translation_invariance(self):
        space_a = CoordinateSpace.single(40)
        runs_a = [(3, 9), (14, 20)]
        runs_b = [(5, 12)]
        shift = 13
        pair1 = pair_from(runs_a, runs_b, space_a)
        pair2 = pair_from(
            [(s + shift, e + shift) for s, e in runs_a],
            [(s + shift, e + shift) for s, e in runs_b],
            space_a,
        )
        for kind in OverlapStatistic:
            v1 = window_mean(kind, pair1, [(0, 27)]).value
            v2 = window_mean(kind, pair2, [(shift, 27 + shift)]).value
            assert v1 == pytest.approx(v2, rel=1e-12)


class TestParseStatistic:
    def test_known(self):
        assert parse_statistic("region-overlap") is OverlapStatistic.REGION_OVERLAP

    def test_unknown(self):
        with pytest.raises(ParameterError, match="unknown statistic"):
            parse_statistic("nope")


@st.composite
def track_pair_vectors(draw, n=200):
    k = draw(st.integers(0, 12))
    m = draw(st.integers(0, 12))
    def runs(count):
        out = []
        for _ in range(count):
            s = draw(st.integers(0, n - 1))
            ell = draw(st.integers(1, 25))
            out.append((s, min(n, s + ell)))
        return out
    return runs(k), runs(m)


class TestOracleEquivalence:
    @given(track_pair_vectors(), st.integers(0, 199), st.integers(1, 200))
    @settings(max_examples=80, deadline=None)
    def test_all_statistics_match_dense(self, runs_ab, lo, width):
        runs_a, runs_b = runs_ab
        hi = min(200, lo + width)
        if hi <= lo:
            hi = lo + 1
        space = CoordinateSpace.single(200)
        pair = pair_from(runs_a, runs_b, space)
        a = oracles.dense(pair.a)
        b = oracles.dense(pair.b)
        for kind in (
            OverlapStatistic.MEAN_OVERLAP,
            OverlapStatistic.BP_OVERLAP,
            OverlapStatistic.REGION_OVERLAP,
            WindowMeanStatistic("mix", ((0.25, -1.0), (2.0, 0.5))),
        ):
            num, den = oracles.stat_sums(kind, a, b, [(lo, hi)])
            if den == 0:
                with pytest.raises(DegenerateDenominatorError):
                    window_mean(kind, pair, [(lo, hi)])
            else:
                sv = window_mean(kind, pair, [(lo, hi)])
                assert sv.numerator == pytest.approx(num, rel=1e-12, abs=1e-12)
                assert sv.denominator == pytest.approx(den, rel=1e-12, abs=1e-12)
