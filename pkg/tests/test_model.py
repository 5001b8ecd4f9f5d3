import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from trajedi.errors import ParseError, UsageError
from trajedi.model import (
    Dataset,
    Point,
    Trajectory,
    euclidean_distance,
    load_csv,
    save_csv,
    slice_trajectory,
    splice,
)

from .conftest import traj

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
points = st.tuples(finite, finite)
# dyadic grid values: no underflow, so zero distance means equal points
dyadic = st.integers(-(10**6), 10**6).map(lambda v: v / 64)
grid_points = st.tuples(dyadic, dyadic)


class TestEuclidean:
    @pytest.mark.parametrize(
        "p, q, expected",
        [((0, 0), (3, 4), 5.0), ((1, 1), (1, 1), 0.0), ((0, 0), (1, 1), math.sqrt(2))],
    )
    def test_examples(self, p, q, expected):
        assert euclidean_distance(Point(*p), Point(*q)) == pytest.approx(expected, abs=1e-12)

    @given(grid_points, grid_points)
    def test_symmetric_nonnegative(self, p, q):
        d = euclidean_distance(p, q)
        assert d >= 0
        assert d == euclidean_distance(q, p)
        assert (d == 0) == (p == q)

    @given(points, points, points)
    def test_triangle_inequality(self, p, q, r):
        assert euclidean_distance(p, r) <= euclidean_distance(p, q) + euclidean_distance(q, r) + 1e-6


class TestTrajectory:
    def test_rejects_empty(self):
        with pytest.raises(UsageError):
            Trajectory("t", [])

    def test_rejects_non_finite(self):
        with pytest.raises(UsageError):
            Trajectory("t", [(0.0, float("nan"))])

    def test_immutable_coords(self):
        t = traj("t", [(0, 0), (1, 1)])
        with pytest.raises(ValueError):
            t.coords[0, 0] = 5.0

    def test_points_round_trip(self):
        t = traj("t", [(0, 0), (1, 2)])
        assert t.points == (Point(0.0, 0.0), Point(1.0, 2.0))
        assert t[1] == Point(1.0, 2.0)


ABC = traj("t", [(0, 0), (1, 0), (2, 0)])


class TestSlice:
    def test_full_range(self):
        s = slice_trajectory(ABC, 1, 3)
        assert s.points == ABC.points
        assert s.id == "t" and s.segment == (1, 3)

    def test_single_point(self):
        assert slice_trajectory(ABC, 2, 2).points == (Point(1.0, 0.0),)

    @pytest.mark.parametrize("lo, hi", [(2, 4), (0, 1), (3, 2)])
    def test_out_of_range(self, lo, hi):
        with pytest.raises(UsageError):
            slice_trajectory(ABC, lo, hi)


class TestSplice:
    def test_replace_middle(self):
        t = traj("t", [(0, 0), (1, 0), (2, 0), (3, 0)])
        out, degenerate = splice(t, 2, 3, [(9, 9)])
        assert out.points == (Point(0, 0), Point(9, 9), Point(3, 0))
        assert not degenerate

    def test_identity_replacement(self):
        t = traj("t", [(0, 0), (1, 0)])
        out, degenerate = splice(t, 1, 2, t.coords)
        assert out == t and not degenerate

    def test_empty_result_keeps_original(self):
        out, degenerate = splice(ABC, 1, 3, [])
        assert out == ABC
        assert degenerate

    def test_empty_replacement_of_part(self):
        out, degenerate = splice(ABC, 2, 2, [])
        assert out.points == (Point(0, 0), Point(2, 0)) and not degenerate

    def test_out_of_range(self):
        with pytest.raises(UsageError):
            splice(ABC, 2, 4, [])

    @given(
        st.lists(points, min_size=1, max_size=20),
        st.lists(points, min_size=1, max_size=10),
        st.data(),
    )
    def test_slice_after_splice_returns_replacement(self, base, rep, data):
        t = Trajectory("t", base)
        lo = data.draw(st.integers(1, len(base)))
        hi = data.draw(st.integers(lo, len(base)))
        out, _ = splice(t, lo, hi, rep)
        assert len(out) == len(t) - (hi - lo + 1) + len(rep)
        got = slice_trajectory(out, lo, lo + len(rep) - 1)
        assert np.array_equal(got.coords, np.array(rep, dtype=float))


class TestDataset:
    def test_duplicate_ids(self):
        with pytest.raises(UsageError):
            Dataset([traj("a", [(0, 0)]), traj("a", [(1, 1)])])

    def test_lookup(self):
        ds = Dataset([traj("a", [(0, 0)]), traj("b", [(1, 1)])])
        assert ds["b"].id == "b" and ds.index_of("b") == 1
        with pytest.raises(UsageError):
            ds["zz"]


class TestCsv:
    def test_direct_parse(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("t1,0,0.0,0.0\nt1,1,1.0,0.0\n")
        ds = load_csv(p)
        assert ds.ids == ["t1"]
        assert ds["t1"].points == (Point(0.0, 0.0), Point(1.0, 0.0))

    def test_header_and_ignored_timestamp(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("traj_id,seq,x,y,ts\nt1,1,1.0,0.0,5\nt1,0,0.0,0.0,4\n")
        assert load_csv(p)["t1"].points == (Point(0.0, 0.0), Point(1.0, 0.0))

    def test_empty_file(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("")
        assert len(load_csv(p)) == 0

    def test_non_numeric_names_line(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("t1,0,abc,0\n")
        with pytest.raises(ParseError, match="line 1") as exc:
            load_csv(p)
        assert exc.value.line == 1

    def test_duplicate_seq(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("traj_id,seq,x,y\nt1,0,0,0\nt1,0,1,1\n")
        with pytest.raises(ParseError, match="line 3"):
            load_csv(p)

    @pytest.mark.parametrize("row", ["t1,0,1", "t1,x,1,1", "t1,0,1,inf", ",0,1,1"])
    def test_malformed_rows(self, tmp_path, row):
        p = tmp_path / "d.csv"
        p.write_text(row + "\n")
        with pytest.raises(ParseError):
            load_csv(p)

    @given(
        st.lists(
            st.lists(points, min_size=1, max_size=6),
            min_size=0,
            max_size=5,
        )
    )
    def test_round_trip(self, tmp_path_factory, groups):
        ds = Dataset(Trajectory(f"t{i:02d}", pts) for i, pts in enumerate(groups))
        p = tmp_path_factory.mktemp("rt") / "d.csv"
        save_csv(ds, p)
        assert load_csv(p) == ds

    def test_lf_line_endings(self, tmp_path):
        p = tmp_path / "d.csv"
        save_csv(Dataset([traj("a", [(0.1, 0.2)])]), p)
        assert p.read_bytes() == b"traj_id,seq,x,y\na,0,0.1,0.2\n"
