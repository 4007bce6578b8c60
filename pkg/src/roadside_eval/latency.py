"""Latency and positioning-error estimation from paired constant-speed runs.

A test vehicle drives back and forth along a straight route at nominal
speed v0. Detection and ground-truth crossings of fixed test points along
the route yield per-crossing time differences tau whose mean in one travel
direction is biased by the detector's constant along-track offset (by
-offset/v0 one way, +offset/v0 the other). Averaging the two directions
cancels the offset and leaves the expected latency; re-projecting
detections back by that latency then exposes the constant offset itself.

Crossing timing: the ground-truth crossing of a test point is linearly
interpolated between bracketing samples (the gt trace is smooth and
effectively noise-free). The detection crossing is anchored on a single
detection sample (the one nearest in time to the crossing of the pass's
fitted arc-vs-time line) and back-projected through that sample at the
fitted speed. Interpolating between two detection samples instead would
average their independent latency/noise draws and visibly shrink the tau
spread (by ~2/3 for i.i.d. per-frame errors), so variance-prediction
checks would be impossible to satisfy; the anchored rule keeps each tau a
single-sample observation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .core import (
    LocalPoint,
    ProjectionContext,
    Trajectory,
    TrajectorySet,
    slice_trajectory,
    trajectory_arrays,
)
from .errors import (
    EvalError,
    InsufficientDataError,
    PairingError,
    WindowExtractionError,
)


@dataclass(frozen=True)
class RouteLine:
    """Straight test route with its constant-speed arc window.

    Arc length is measured along ``direction`` from ``anchor``; the window
    bounds delimit where the driver holds nominal_speed_mps.
    """

    anchor: LocalPoint
    direction: tuple[float, float]
    window_start_m: float
    window_end_m: float
    nominal_speed_mps: float

    def __post_init__(self) -> None:
        if self.window_start_m >= self.window_end_m:
            raise ValueError("window_start_m must be below window_end_m")
        if self.nominal_speed_mps <= 0:
            raise ValueError("nominal_speed_mps must be positive")
        norm = math.hypot(*self.direction)
        if not math.isclose(norm, 1.0, rel_tol=0, abs_tol=1e-9):
            raise ValueError(f"direction must be a unit vector, |d| = {norm}")


def make_route_line(
    p0: LocalPoint,
    p1: LocalPoint,
    window_start_m: float,
    window_end_m: float,
    nominal_speed_mps: float,
) -> RouteLine:
    """RouteLine through two plane points, direction normalized p0 -> p1."""
    dx, dy = p1.x_m - p0.x_m, p1.y_m - p0.y_m
    norm = math.hypot(dx, dy)
    if norm == 0:
        raise ValueError("route endpoints coincide")
    return RouteLine(p0, (dx / norm, dy / norm), window_start_m, window_end_m, nominal_speed_mps)


class SpeedWindow(NamedTuple):
    t_start_s: float
    t_end_s: float
    direction_sign: int


@dataclass(frozen=True)
class TauSample:
    """One detection-vs-gt crossing time difference at one test point."""

    test_point_m: float
    t1_s: float
    t2_s: float
    tau_s: float
    direction_sign: int

    def __post_init__(self) -> None:
        if self.tau_s != self.t2_s - self.t1_s:
            raise ValueError("tau_s must equal t2_s - t1_s exactly")
        if self.direction_sign not in (-1, 1):
            raise ValueError("direction_sign must be +1 or -1")


@dataclass(frozen=True)
class LatencyEstimate:
    """Direction-averaged latency with the spread of the tau samples.

    std_s pools the per-direction spreads (each direction demeaned first,
    N-2 dof): the two directions sit at offset-shifted means, and folding
    that deterministic split into the spread would overstate the noise.
    """

    mean_s: float
    std_s: float
    n_samples: int
    per_direction_mean_s: Mapping[int, float]

    def __post_init__(self) -> None:
        if self.n_samples < 2:
            raise ValueError("need at least one tau sample per direction")
        if not (1 in self.per_direction_mean_s and -1 in self.per_direction_mean_s):
            raise ValueError("both travel directions must be represented")
        if self.std_s < 0:
            raise ValueError("std_s must be non-negative")


@dataclass(frozen=True)
class PositionErrorEstimate:
    """Constant-offset estimate: mean residual (x, y) in the local plane."""

    mean_offset_m: tuple[float, float]
    residual_rms_m: float
    n_samples: int


def route_arc_coordinates(xy: np.ndarray, route: RouteLine) -> np.ndarray:
    """Signed arc-length coordinate of plane points along the route."""
    ux, uy = route.direction
    return (xy[:, 0] - route.anchor.x_m) * ux + (xy[:, 1] - route.anchor.y_m) * uy


def default_test_points(route: RouteLine, n: int = 11) -> np.ndarray:
    """n test points evenly spread strictly inside the constant window."""
    if n < 1:
        raise ValueError("need at least one test point")
    return np.linspace(route.window_start_m, route.window_end_m, n + 2)[1:-1]


def find_constant_speed_windows(
    traj: Trajectory,
    route: RouteLine,
    ctx: ProjectionContext,
    speed_tol_frac: float = 0.1,
) -> list[SpeedWindow]:
    """All maximal intervals holding nominal speed inside the arc window.

    A qualifying step keeps |speed| within ±speed_tol_frac·v0 and both arc
    endpoints inside [window_start, window_end]; runs are split where the
    travel direction flips.
    """
    if not (0 < speed_tol_frac <= 0.5):
        raise ValueError("speed_tol_frac must be in (0, 0.5]")
    times, xy = trajectory_arrays(traj, ctx)
    if len(times) < 2:
        return []
    s = route_arc_coordinates(xy, route)
    dt = np.diff(times)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where(dt > 0, np.diff(s) / dt, np.inf)
    v0 = route.nominal_speed_mps
    in_bounds = (s >= route.window_start_m) & (s <= route.window_end_m)
    ok = (
        (np.abs(np.abs(v) - v0) <= speed_tol_frac * v0)
        & in_bounds[:-1]
        & in_bounds[1:]
    )

    windows: list[SpeedWindow] = []
    i = 0
    n = len(ok)
    while i < n:
        if not ok[i]:
            i += 1
            continue
        sign = 1 if v[i] > 0 else -1
        j = i
        while j + 1 < n and ok[j + 1] and (v[j + 1] > 0) == (sign > 0):
            j += 1
        windows.append(SpeedWindow(float(times[i]), float(times[j + 1]), sign))
        i = j + 1
    return windows


def extract_constant_speed_window(
    traj: Trajectory,
    route: RouteLine,
    ctx: ProjectionContext,
    speed_tol_frac: float = 0.1,
) -> SpeedWindow:
    """The longest constant-speed interval; error when none qualifies."""
    windows = find_constant_speed_windows(traj, route, ctx, speed_tol_frac)
    if not windows:
        raise WindowExtractionError(
            "no interval holds nominal speed within tolerance inside the route window"
        )
    return max(windows, key=lambda w: (w.t_end_s - w.t_start_s, -w.t_start_s))


def _crossing_time(times: np.ndarray, s: np.ndarray, x: float) -> float | None:
    """Linearly interpolated time at which monotone arc data crosses x."""
    lo, hi = (s[0], s[-1]) if s[0] <= s[-1] else (s[-1], s[0])
    if not (lo <= x <= hi):
        return None
    if s[0] <= s[-1]:
        t = np.interp(x, s, times)
    else:
        t = np.interp(x, s[::-1], times[::-1])
    return float(t)


def _pass_cluster(t: np.ndarray, t_center: float) -> np.ndarray:
    """Indices of the contiguous time cluster of samples nearest t_center.

    Arc-window masking can pull in samples from neighboring passes of a
    back-and-forth run; those sit seconds away while one pass's samples are
    one detection tick apart, so splitting at large time gaps separates
    them cleanly.
    """
    order = np.argsort(t, kind="stable")
    ts = t[order]
    if len(ts) == 1:
        return order
    tick = float(np.median(np.diff(ts)))
    gap = max(5.0 * tick, 0.5)
    breaks = np.nonzero(np.diff(ts) > gap)[0]
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks + 1, [len(ts)]))
    centers = [(ts[a] + ts[b - 1]) / 2 for a, b in zip(starts, ends)]
    k = int(np.argmin([abs(c - t_center) for c in centers]))
    return order[starts[k] : ends[k]]


def sample_tau(
    gt: Trajectory,
    det: Trajectory,
    route: RouteLine,
    test_points_m: Sequence[float],
    ctx: ProjectionContext,
) -> list[TauSample]:
    """Tau samples for one pass: detection minus gt crossing time per point.

    ``gt`` must be sliced to a single constant-speed pass; ``det`` may be
    sliced generously in time (neighboring passes are filtered out by arc
    and time clustering). Test points not crossed by both trajectories are
    skipped; raises InsufficientDataError when nothing can be sampled.
    """
    t_gt, xy_gt = trajectory_arrays(gt, ctx)
    if len(t_gt) < 2:
        raise InsufficientDataError("ground-truth pass has fewer than 2 samples")
    s_gt = route_arc_coordinates(xy_gt, route)
    sign = 1 if s_gt[-1] >= s_gt[0] else -1

    t_det, xy_det = trajectory_arrays(det, ctx)
    s_det = route_arc_coordinates(xy_det, route)
    mask = (s_det >= route.window_start_m) & (s_det <= route.window_end_m)
    if int(mask.sum()) < 2:
        raise InsufficientDataError(
            "fewer than 2 detection samples inside the route window"
        )
    idx = np.nonzero(mask)[0]
    idx = idx[_pass_cluster(t_det[idx], (t_gt[0] + t_gt[-1]) / 2)]
    if len(idx) < 2:
        raise InsufficientDataError("detection pass cluster too small to fit")
    td, sd = t_det[idx], s_det[idx]

    slope, intercept = np.polyfit(td, sd, 1)
    v0 = route.nominal_speed_mps
    if (slope > 0) != (sign > 0) or not (0.5 * v0 <= abs(slope) <= 2.0 * v0):
        raise InsufficientDataError(
            f"detection arc trend ({slope:.2f} m/s) inconsistent with the "
            f"route traversal at {sign * v0:.2f} m/s"
        )

    samples: list[TauSample] = []
    for x in test_points_m:
        t1 = _crossing_time(t_gt, s_gt, float(x))
        if t1 is None:
            continue
        t_fit = (float(x) - intercept) / slope
        k = int(np.argmin(np.abs(td - t_fit)))
        t2 = float(td[k] - (sd[k] - float(x)) / slope)
        samples.append(
            TauSample(
                test_point_m=float(x),
                t1_s=t1,
                t2_s=t2,
                tau_s=t2 - t1,
                direction_sign=sign,
            )
        )
    if not samples:
        raise InsufficientDataError("no test point was crossed by both trajectories")
    return samples


def estimate_latency(samples: Sequence[TauSample]) -> LatencyEstimate:
    """Direction-averaged latency per the paired-run cancellation.

    mean_s = (mean of +direction taus + mean of -direction taus) / 2, which
    cancels any constant along-track offset. Raises PairingError when only
    one direction is present (the cancellation then cannot happen).
    """
    pos = [s.tau_s for s in samples if s.direction_sign > 0]
    neg = [s.tau_s for s in samples if s.direction_sign < 0]
    if not pos or not neg:
        raise PairingError(
            "latency estimation needs runs in both travel directions; "
            f"got {len(pos)} forward and {len(neg)} reverse samples"
        )
    m_pos = math.fsum(pos) / len(pos)
    m_neg = math.fsum(neg) / len(neg)
    ss = math.fsum((x - m_pos) ** 2 for x in pos) + math.fsum(
        (x - m_neg) ** 2 for x in neg
    )
    n = len(pos) + len(neg)
    std = math.sqrt(ss / (n - 2)) if n > 2 else 0.0
    return LatencyEstimate(
        mean_s=(m_pos + m_neg) / 2.0,
        std_s=std,
        n_samples=n,
        per_direction_mean_s={1: m_pos, -1: m_neg},
    )


def combine_trials(estimates: Sequence[LatencyEstimate]) -> LatencyEstimate:
    """Merge per-trial estimates: count-weighted mean, dof-pooled std."""
    if not estimates:
        raise EvalError("no latency estimates to combine")
    n = sum(e.n_samples for e in estimates)
    mean = math.fsum(e.mean_s * e.n_samples for e in estimates) / n
    dof = sum(max(e.n_samples - 2, 0) for e in estimates)
    if dof > 0:
        var = math.fsum(max(e.n_samples - 2, 0) * e.std_s**2 for e in estimates) / dof
    else:
        var = 0.0
    per_dir = {}
    for d in (1, -1):
        w = [(e.per_direction_mean_s[d], e.n_samples) for e in estimates]
        per_dir[d] = math.fsum(m * k for m, k in w) / sum(k for _, k in w)
    return LatencyEstimate(
        mean_s=mean, std_s=math.sqrt(var), n_samples=n, per_direction_mean_s=per_dir
    )


def estimate_position_error(
    det: Trajectory,
    gt: Trajectory,
    latency: LatencyEstimate,
    ctx: ProjectionContext,
    min_speed_mps: float = 0.5,
) -> PositionErrorEstimate:
    """Constant-offset estimate: detection minus latency-shifted gt.

    Each detection at time t is compared against the gt position
    interpolated at (t - latency); mean_offset_m is the plain vector mean
    of the residuals in local plane coordinates, which converges to the
    system's constant offset (latency-jitter displacements flip sign with
    travel direction and average out over paired runs). residual_rms_m is
    the spread of the along-track residual component about per-direction
    means, so a constant offset contributes to the mean and never to the
    spread; it compounds measurement noise with speed-scaled latency
    jitter. Near-stationary stretches are skipped: the along direction is
    undefined without motion.
    """
    t_gt, xy_gt = trajectory_arrays(gt, ctx)
    if len(t_gt) < 2:
        raise InsufficientDataError("ground truth too short to interpolate")
    t_det, xy_det = trajectory_arrays(det, ctx)
    query = t_det - latency.mean_s

    dt = np.diff(t_gt)
    vx = np.diff(xy_gt[:, 0]) / dt
    vy = np.diff(xy_gt[:, 1]) / dt
    seg = np.clip(np.searchsorted(t_gt, query, side="right") - 1, 0, len(dt) - 1)
    speed = np.hypot(vx[seg], vy[seg])
    usable = (query >= t_gt[0]) & (query <= t_gt[-1]) & (speed >= min_speed_mps)
    n = int(usable.sum())
    if n < 10:
        raise InsufficientDataError(
            f"only {n} usable samples for the offset estimate (need 10)"
        )

    gx = np.interp(query[usable], t_gt, xy_gt[:, 0])
    gy = np.interp(query[usable], t_gt, xy_gt[:, 1])
    rx = xy_det[usable, 0] - gx
    ry = xy_det[usable, 1] - gy
    sp = speed[usable]
    ux, uy = vx[seg[usable]] / sp, vy[seg[usable]] / sp
    along = rx * ux + ry * uy

    # group by heading relative to the first sample; passes on a line fall
    # into exactly two groups and each is demeaned separately
    forward = ux * ux[0] + uy * uy[0] >= 0.0
    sq_sum = 0.0
    dof = 0
    for grp in (along[forward], along[~forward]):
        if len(grp) >= 2:
            sq_sum += float(np.sum((grp - grp.mean()) ** 2))
            dof += len(grp) - 1
    rms = math.sqrt(sq_sum / dof) if dof > 0 else 0.0
    return PositionErrorEstimate(
        mean_offset_m=(float(np.mean(rx)), float(np.mean(ry))),
        residual_rms_m=rms,
        n_samples=n,
    )


def predict_tau_variance(var_l_s2: float, var_e2_m2: float, v0_mps: float) -> float:
    """Var(tau) from latency jitter plus noise scaled by 1/v0^2."""
    if var_l_s2 < 0 or var_e2_m2 < 0:
        raise ValueError("variances must be non-negative")
    if v0_mps <= 0:
        raise ValueError("v0 must be positive")
    return var_l_s2 + var_e2_m2 / v0_mps**2


def predict_position_error_variance(
    var_l_s2: float, var_e2_m2: float, v0_mps: float
) -> float:
    """Var of the offset-estimator residual: noise plus v0^2-scaled jitter."""
    if var_l_s2 < 0 or var_e2_m2 < 0:
        raise ValueError("variances must be non-negative")
    return var_e2_m2 + v0_mps**2 * var_l_s2


def collect_tau_samples(
    det: TrajectorySet,
    gt: TrajectorySet,
    route: RouteLine,
    ctx: ProjectionContext,
    n_test_points: int = 11,
    speed_tol_frac: float = 0.1,
    det_slack_s: float = 5.0,
) -> list[TauSample]:
    """Tau samples pooled over every constant-speed pass in a trial.

    Detections may fragment into several ids; every detection trajectory is
    tried per pass and, when more than one yields a crossing for the same
    test point, the crossing nearest in time to the gt crossing wins.
    """
    pts = default_test_points(route, n_test_points)
    out: list[TauSample] = []
    for gt_traj in gt.trajectories:
        windows = find_constant_speed_windows(gt_traj, route, ctx, speed_tol_frac)
        det_candidates = [
            t for t in det.trajectories if t.category == gt_traj.category
        ]
        for w in windows:
            gt_slice = slice_trajectory(gt_traj, w.t_start_s, w.t_end_s)
            if gt_slice is None or len(gt_slice.points) < 2:
                continue
            best: dict[float, TauSample] = {}
            for det_traj in det_candidates:
                det_slice = slice_trajectory(
                    det_traj, w.t_start_s - det_slack_s, w.t_end_s + det_slack_s
                )
                if det_slice is None:
                    continue
                try:
                    samples = sample_tau(gt_slice, det_slice, route, pts, ctx)
                except InsufficientDataError:
                    continue
                for s in samples:
                    cur = best.get(s.test_point_m)
                    if cur is None or abs(s.tau_s) < abs(cur.tau_s):
                        best[s.test_point_m] = s
            out.extend(best[x] for x in sorted(best))
    return out


def estimate_latency_for_trial(
    det: TrajectorySet,
    gt: TrajectorySet,
    route: RouteLine,
    ctx: ProjectionContext,
    n_test_points: int = 11,
    speed_tol_frac: float = 0.1,
    det_slack_s: float = 5.0,
) -> LatencyEstimate:
    """End-to-end latency estimate for one trial's file pair."""
    samples = collect_tau_samples(
        det, gt, route, ctx, n_test_points, speed_tol_frac, det_slack_s
    )
    if not samples:
        raise InsufficientDataError(
            "no samples: no detection crossings line up with any "
            "constant-speed ground-truth pass"
        )
    return estimate_latency(samples)
