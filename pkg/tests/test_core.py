"""Domain types, projection, grouping, and interpolation."""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from roadside_eval.core import (
    DataFrame,
    GeoPoint,
    LocalPoint,
    build_trajectory_set,
    filter_category,
    from_frames,
    interpolate_position,
    make_projection,
    project,
    slice_trajectory,
    trajectory_arrays,
    unproject,
    validate_geo,
)
from roadside_eval.errors import (
    ExtrapolationError,
    IntegrityError,
    ProjectionRangeError,
)

from conftest import ORIGIN, dp, haversine_m, line_points


class TestProjection:
    def test_equator_scales_equal(self):
        c = make_projection(GeoPoint(0.0, 0.0))
        assert c.meters_per_deg_lon == pytest.approx(c.meters_per_deg_lat)

    def test_lat60_halves_lon_scale(self):
        c = make_projection(GeoPoint(60.0, 0.0))
        assert c.meters_per_deg_lon == pytest.approx(0.5 * c.meters_per_deg_lat)

    def test_small_north_step_matches_haversine(self, ctx):
        p = GeoPoint(ORIGIN.lat_deg + 0.001, ORIGIN.lon_deg)
        local = project(p, ctx)
        assert local.x_m == 0.0
        assert local.y_m == pytest.approx(111.13, abs=0.2)
        assert local.y_m == pytest.approx(haversine_m(ORIGIN, p), abs=0.2)

    def test_origin_projects_to_zero(self, ctx):
        assert project(ORIGIN, ctx) == LocalPoint(0.0, 0.0)

    def test_east_west_mirror(self, ctx):
        east = GeoPoint(ORIGIN.lat_deg, ORIGIN.lon_deg + 0.002)
        west = GeoPoint(ORIGIN.lat_deg, ORIGIN.lon_deg - 0.002)
        pe, pw = project(east, ctx), project(west, ctx)
        assert pe.x_m == -pw.x_m
        assert pe.y_m == pw.y_m

    def test_random_points_match_haversine(self, ctx):
        rng = random.Random(42)
        for _ in range(500):
            # within ~1 km of the origin
            p = GeoPoint(
                ORIGIN.lat_deg + rng.uniform(-0.008, 0.008),
                ORIGIN.lon_deg + rng.uniform(-0.011, 0.011),
            )
            local = project(p, ctx)
            planar = math.hypot(local.x_m, local.y_m)
            great_circle = haversine_m(ORIGIN, p)
            if great_circle > 1.0:
                assert planar == pytest.approx(great_circle, rel=1e-3)

    def test_out_of_range_rejected(self, ctx):
        with pytest.raises(ProjectionRangeError):
            project(GeoPoint(ORIGIN.lat_deg + 0.5, ORIGIN.lon_deg), ctx)

    def test_round_trip_within_micrometer(self, ctx):
        rng = random.Random(7)
        for _ in range(200):
            p = LocalPoint(rng.uniform(-2000, 2000), rng.uniform(-2000, 2000))
            q = project(unproject(p, ctx), ctx)
            assert abs(q.x_m - p.x_m) < 1e-6
            assert abs(q.y_m - p.y_m) < 1e-6

    def test_validate_geo_bounds(self):
        with pytest.raises(ValueError):
            validate_geo(GeoPoint(91.0, 0.0))
        with pytest.raises(ValueError):
            validate_geo(GeoPoint(0.0, -181.0))
        validate_geo(GeoPoint(-90.0, 180.0))


class TestBuildTrajectorySet:
    def test_empty_input(self):
        ts = build_trajectory_set([])
        assert ts.frames == () and ts.trajectories == ()

    def test_two_by_two(self, ctx):
        pts = [
            dp(10.0, 0, 0, ctx, object_id="a"),
            dp(10.0, 5, 0, ctx, object_id="b"),
            dp(10.1, 1, 0, ctx, object_id="a"),
            dp(10.1, 6, 0, ctx, object_id="b"),
        ]
        ts = build_trajectory_set(pts)
        assert len(ts.frames) == 2
        assert len(ts.trajectories) == 2
        assert all(len(t.points) == 2 for t in ts.trajectories)

    def test_duplicate_id_in_bin_rejected(self, ctx):
        pts = [dp(10.0, 0, 0, ctx), dp(10.0, 1, 0, ctx)]
        with pytest.raises(IntegrityError) as exc:
            build_trajectory_set(pts)
        assert "veh-01" in str(exc.value)

    @given(seed=st.integers(0, 2**32 - 1))
    def test_permutation_invariant(self, seed):
        ctx = make_projection(ORIGIN)
        base = []
        for oid in ("a", "b", "c"):
            base.extend(
                line_points(ctx, t0=100.0, n=20, object_id=oid,
                            y=10.0 * ord(oid[0]) % 7)
            )
        shuffled = list(base)
        random.Random(seed).shuffle(shuffled)
        assert build_trajectory_set(shuffled) == build_trajectory_set(base)

    def test_frame_trajectory_duality(self, ctx):
        pts = line_points(ctx, n=30) + line_points(ctx, n=20, object_id="x", y=4)
        ts = build_trajectory_set(pts)
        via_frames = sum(len(f.points) for f in ts.frames)
        via_trajs = sum(len(t.points) for t in ts.trajectories)
        assert via_frames == via_trajs == 50


class TestFromFrames:
    def test_preserves_empty_frames(self, ctx):
        frames = [
            DataFrame(1.0, (dp(1.0, 0, 0, ctx),)),
            DataFrame(2.0, ()),
            DataFrame(3.0, (dp(3.0, 2, 0, ctx),)),
        ]
        ts = from_frames(frames, "detection")
        assert len(ts.frames) == 3
        assert ts.frames[1].points == ()

    def test_sorts_frames(self, ctx):
        frames = [DataFrame(3.0, ()), DataFrame(1.0, (dp(1.0, 0, 0, ctx),))]
        ts = from_frames(frames, "ground_truth")
        assert [f.timestamp_s for f in ts.frames] == [1.0, 3.0]


class TestFilterCategory:
    def test_keeps_emptied_frames(self, ctx):
        frames = [
            DataFrame(1.0, (dp(1.0, 0, 0, ctx, category="vehicle"),)),
            DataFrame(2.0, (dp(2.0, 0, 0, ctx, category="pedestrian",
                               object_id="p1"),)),
        ]
        ts = filter_category(from_frames(frames, "detection"), "vehicle")
        assert len(ts.frames) == 2
        assert ts.frames[1].points == ()
        assert [t.category for t in ts.trajectories] == ["vehicle"]


class TestInterpolation:
    def test_exact_at_sample(self, ctx):
        pts = line_points(ctx, n=10)
        ts = build_trajectory_set(pts)
        traj = ts.trajectories[0]
        got = interpolate_position(traj, pts[3].timestamp_s, ctx)
        want = project(pts[3].position, ctx)
        assert got == pytest.approx(want)

    def test_midpoint_is_arithmetic_mean(self, ctx):
        pts = [dp(1.0, 0, 0, ctx), dp(2.0, 4, 2, ctx)]
        traj = build_trajectory_set(pts).trajectories[0]
        mid = interpolate_position(traj, 1.5, ctx)
        assert mid.x_m == pytest.approx(2.0, abs=1e-9)
        assert mid.y_m == pytest.approx(1.0, abs=1e-9)

    def test_constant_velocity_closed_form(self, ctx):
        # 100 Hz, exact kinematics: x(t) = 3 + 7 (t - t0)
        pts = line_points(ctx, t0=50.0, n=200, dt=0.01, x0=3.0, vx=7.0, y=-2.0)
        traj = build_trajectory_set(pts).trajectories[0]
        rng = random.Random(3)
        for _ in range(100):
            t = rng.uniform(50.0, 50.0 + 1.99)
            got = interpolate_position(traj, t, ctx)
            assert abs(got.x_m - (3.0 + 7.0 * (t - 50.0))) < 1e-9
            assert abs(got.y_m - (-2.0)) < 1e-9

    def test_extrapolation_rejected(self, ctx):
        traj = build_trajectory_set(line_points(ctx, t0=10.0, n=5)).trajectories[0]
        with pytest.raises(ExtrapolationError):
            interpolate_position(traj, 9.9, ctx)
        with pytest.raises(ExtrapolationError):
            interpolate_position(traj, 10.0 + 0.4 + 1e-6, ctx)


class TestArraysAndSlicing:
    def test_trajectory_arrays_match_pointwise_projection(self, ctx):
        pts = line_points(ctx, n=40, vx=3.3, y=5.5)
        traj = build_trajectory_set(pts).trajectories[0]
        times, xy = trajectory_arrays(traj, ctx)
        assert times.shape == (40,) and xy.shape == (40, 2)
        for i, p in enumerate(traj.points):
            local = project(p.position, ctx)
            assert times[i] == p.timestamp_s
            assert xy[i, 0] == pytest.approx(local.x_m, abs=1e-9)
            assert xy[i, 1] == pytest.approx(local.y_m, abs=1e-9)

    def test_slice_trajectory_bounds_inclusive(self, ctx):
        traj = build_trajectory_set(line_points(ctx, t0=0.0, n=10, dt=1.0)).trajectories[0]
        part = slice_trajectory(traj, 2.0, 5.0)
        assert [p.timestamp_s for p in part.points] == [2.0, 3.0, 4.0, 5.0]
        assert slice_trajectory(traj, 100.0, 200.0) is None

    def test_all_points_matches_frame_contents(self, ctx):
        pts = line_points(ctx, n=12) + line_points(ctx, n=12, object_id="z", y=3)
        ts = build_trajectory_set(pts)
        assert sorted(ts.all_points(), key=lambda p: (p.timestamp_s, p.object_id)) == sorted(
            pts, key=lambda p: (p.timestamp_s, p.object_id)
        )
