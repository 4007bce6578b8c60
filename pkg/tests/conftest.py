"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the library's own code paths:
distances come from a haversine great-circle formula, assignments from
exhaustive permutation search, and kinematics from closed forms, so a bug
in the implementation cannot hide in its own test harness.
"""

from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import settings

from roadside_eval.core import (
    DataPoint,
    GeoPoint,
    LocalPoint,
    ProjectionContext,
    make_projection,
    unproject,
)

settings.register_profile("suite", deadline=None, max_examples=50)
settings.load_profile("suite")

# IUGG mean earth radius, meters; independent of the projection constants.
EARTH_RADIUS_M = 6371008.8

ORIGIN = GeoPoint(42.3, -83.7)


@pytest.fixture(scope="session")
def ctx() -> ProjectionContext:
    return make_projection(ORIGIN)


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance oracle."""
    phi1, phi2 = math.radians(a.lat_deg), math.radians(b.lat_deg)
    dphi = phi2 - phi1
    dlam = math.radians(b.lon_deg - a.lon_deg)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(h))


def brute_force_assignment(cost) -> float:
    """Minimum total cost over every one-to-one pairing, via fsum.

    Enumerates all placements of min(rows, cols) pairs; exact for the
    small matrices used in tests.
    """
    n_rows = len(cost)
    n_cols = len(cost[0]) if n_rows else 0
    if n_rows == 0 or n_cols == 0:
        return 0.0
    best = math.inf
    if n_rows <= n_cols:
        for cols in itertools.permutations(range(n_cols), n_rows):
            total = math.fsum(cost[r][c] for r, c in enumerate(cols))
            if total < best:
                best = total
    else:
        for rows in itertools.permutations(range(n_rows), n_cols):
            total = math.fsum(cost[r][c] for c, r in enumerate(rows))
            if total < best:
                best = total
    return best


def dp(
    t: float,
    x: float,
    y: float,
    ctx: ProjectionContext,
    category: str = "vehicle",
    object_id: str = "veh-01",
) -> DataPoint:
    """DataPoint at local plane coordinates (x, y) meters."""
    return DataPoint(t, unproject(LocalPoint(x, y), ctx), category, object_id)


def line_points(
    ctx: ProjectionContext,
    t0: float = 1000.0,
    n: int = 50,
    dt: float = 0.1,
    x0: float = 0.0,
    vx: float = 10.0,
    y: float = 0.0,
    category: str = "vehicle",
    object_id: str = "veh-01",
) -> list[DataPoint]:
    """Constant-velocity sample train along x, an exact kinematic input."""
    return [
        dp(t0 + k * dt, x0 + vx * k * dt, y, ctx, category, object_id)
        for k in range(n)
    ]
