import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsc.errors import InputError, ParameterError
from gsc.tracks import (
    CoordinateSpace,
    FeatureTrack,
    TrackPair,
    indicator_sum,
    instances,
    load_bed,
    parse_bed,
    read_sequence_lengths,
    write_bed,
)

from .oracles import dense, falling_edges


@pytest.fixture
def chr1_10():
    return CoordinateSpace(("chr1",), (10,))


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestCoordinateSpace:
    def test_duplicate_names_rejected(self):
        with pytest.raises(InputError):
            CoordinateSpace(("a", "a"), (5, 5))

    def test_zero_length_rejected(self):
        with pytest.raises(InputError):
            CoordinateSpace(("a",), (0,))

    def test_boundaries(self):
        space = CoordinateSpace(("a", "b", "c"), (5, 3, 7))
        assert space.boundaries.tolist() == [0, 5, 8, 15]
        assert space.total == 15
        assert space.offset_of("b") == 5

    def test_unknown_name(self):
        with pytest.raises(InputError, match="nope"):
            CoordinateSpace(("a",), (5,)).offset_of("nope")


class TestLoadBed:
    def test_overlapping_lines_merge(self, tmp_path, chr1_10):
        path = write(tmp_path, "t.bed", "chr1 2 5\nchr1 4 8\n")
        track = load_bed(path, chr1_10)
        assert track.runs() == [(2, 8)]

    def test_empty_file(self, tmp_path, chr1_10):
        path = write(tmp_path, "t.bed", "")
        track = load_bed(path, chr1_10)
        assert track.run_count == 0
        assert track.total_coverage == 0

    def test_clipping_counted(self, tmp_path, chr1_10):
        path = write(tmp_path, "t.bed", "chr1\t5\t20\n")
        intervals, clipped = parse_bed(path, chr1_10)
        assert intervals == [(5, 10)]
        assert clipped == 1
        assert load_bed(path, chr1_10).runs() == [(5, 10)]

    def test_unknown_sequence_is_hard_error(self, tmp_path, chr1_10):
        path = write(tmp_path, "t.bed", "chrX 1 2\n")
        with pytest.raises(InputError, match="chrX"):
            load_bed(path, chr1_10)

    def test_reversed_interval_names_line(self, tmp_path, chr1_10):
        path = write(tmp_path, "t.bed", "chr1 2 5\nchr1 7 3\n")
        with pytest.raises(InputError, match=":2"):
            load_bed(path, chr1_10)

    def test_missing_file(self, chr1_10, tmp_path):
        with pytest.raises(InputError, match="missing.bed"):
            load_bed(tmp_path / "missing.bed", chr1_10)

    def test_comments_and_blanks_skipped(self, tmp_path, chr1_10):
        path = write(tmp_path, "t.bed", "# header\n\nchr1 0 3\n")
        assert load_bed(path, chr1_10).runs() == [(0, 3)]

    def test_multi_sequence_offsets(self, tmp_path):
        space = CoordinateSpace(("chr1", "chr2"), (10, 10))
        path = write(tmp_path, "t.bed", "chr2 0 4\nchr1 8 10\n")
        assert load_bed(path, space).runs() == [(8, 10), (10, 14)]

    def test_round_trip(self, tmp_path):
        space = CoordinateSpace(("chr1", "chr2"), (50, 30))
        track = FeatureTrack.from_intervals(space, [(3, 9), (20, 25), (55, 60)])
        write_bed(track, tmp_path / "out.bed")
        again = load_bed(tmp_path / "out.bed", space)
        assert again == track


class TestSequenceLengths:
    def test_read(self, tmp_path):
        path = write(tmp_path, "lens.txt", "chr1\t100\nchr2\t50\n")
        space = read_sequence_lengths(path)
        assert space.names == ("chr1", "chr2")
        assert space.lengths == (100, 50)

    def test_bad_length(self, tmp_path):
        path = write(tmp_path, "lens.txt", "chr1\tx\n")
        with pytest.raises(InputError):
            read_sequence_lengths(path)


class TestIndicatorSum:
    def test_full_window(self, chr1_10):
        track = FeatureTrack.from_intervals(chr1_10, [(2, 8)])
        assert indicator_sum(track, 0, 10) == 6

    def test_partial_window(self, chr1_10):
        track = FeatureTrack.from_intervals(chr1_10, [(2, 8)])
        assert indicator_sum(track, 4, 6) == 2

    def test_empty_track(self, chr1_10):
        assert indicator_sum(FeatureTrack.empty(chr1_10), 3, 9) == 0

    def test_out_of_range(self, chr1_10):
        track = FeatureTrack.empty(chr1_10)
        with pytest.raises(ParameterError):
            indicator_sum(track, 0, 11)
        with pytest.raises(ParameterError):
            indicator_sum(track, -1, 5)


class TestInstances:
    def test_two_runs(self, chr1_10):
        track = FeatureTrack.from_intervals(chr1_10, [(1, 4), (6, 9)])
        assert instances(track, 0, 10) == [(1, 4), (6, 9)]

    def test_clipping(self, chr1_10):
        track = FeatureTrack.from_intervals(chr1_10, [(1, 4)])
        assert instances(track, 2, 3) == [(2, 3)]

    def test_empty(self, chr1_10):
        assert instances(FeatureTrack.empty(chr1_10), 0, 10) == []


class TestTrackInvariants:
    def test_touching_runs_merge(self, chr1_10):
        track = FeatureTrack.from_intervals(chr1_10, [(1, 3), (3, 5)])
        assert track.runs() == [(1, 5)]

    def test_boundary_crossing_rejected(self):
        space = CoordinateSpace(("a", "b"), (5, 5))
        with pytest.raises(InputError):
            FeatureTrack.from_intervals(space, [(4, 6)])

    def test_pair_requires_same_space(self):
        a = FeatureTrack.empty(CoordinateSpace.single(10))
        b = FeatureTrack.empty(CoordinateSpace.single(11))
        with pytest.raises(InputError):
            TrackPair(a, b)

    def test_pair_equal_value_spaces_ok(self):
        a = FeatureTrack.empty(CoordinateSpace.single(10))
        b = FeatureTrack.empty(CoordinateSpace.single(10))
        TrackPair(a, b)


intervals_strategy = st.lists(
    st.tuples(st.integers(0, 199), st.integers(1, 30)).map(
        lambda t: (t[0], min(200, t[0] + t[1]))
    ),
    max_size=25,
)


class TestProperties:
    @given(intervals_strategy)
    @settings(max_examples=60, deadline=None)
    def test_normalization_idempotent(self, intervals):
        space = CoordinateSpace.single(200)
        once = FeatureTrack.from_intervals(space, intervals)
        twice = FeatureTrack(space, once.starts, once.ends)
        assert once == twice

    @given(intervals_strategy)
    @settings(max_examples=60, deadline=None)
    def test_total_equals_sum_of_runs(self, intervals):
        track = FeatureTrack.from_intervals(CoordinateSpace.single(200), intervals)
        assert indicator_sum(track, 0, 200) == int(np.sum(track.ends - track.starts))

    @given(intervals_strategy, st.lists(st.integers(0, 200), min_size=1, max_size=6))
    @settings(max_examples=60, deadline=None)
    def test_partition_additivity(self, intervals, cuts):
        track = FeatureTrack.from_intervals(CoordinateSpace.single(200), intervals)
        points = sorted(set([0, 200] + cuts))
        parts = sum(
            indicator_sum(track, lo, hi) for lo, hi in zip(points, points[1:])
        )
        assert parts == indicator_sum(track, 0, 200)

    @given(intervals_strategy)
    @settings(max_examples=60, deadline=None)
    def test_instance_count_matches_falling_edges(self, intervals):
        track = FeatureTrack.from_intervals(CoordinateSpace.single(200), intervals)
        assert len(instances(track, 0, 200)) == falling_edges(dense(track))

    @given(intervals_strategy, st.integers(0, 199), st.integers(1, 200))
    @settings(max_examples=60, deadline=None)
    def test_window_queries_match_dense(self, intervals, lo, width):
        hi = min(200, lo + width)
        track = FeatureTrack.from_intervals(CoordinateSpace.single(200), intervals)
        vec = dense(track)
        assert indicator_sum(track, lo, hi) == int(vec[lo:hi].sum())
