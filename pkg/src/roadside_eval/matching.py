"""Frame alignment, optimal point assignment, and identity bookkeeping.

The evaluation clock is the detection stream: every detection frame is
aligned to the ground-truth frame nearest in time after latency
compensation, points inside each aligned pair are matched one-to-one by
minimum total planar distance, and matched pairs beyond the distance
threshold count against both sides. Trajectory-level association fixes a
single global detection-id to gt-id mapping (the one maximizing true
positives) and re-counts points under it; ID switches are counted from the
chronological per-frame matches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import DataFrame, DataPoint, ProjectionContext, TrajectorySet, project
from .errors import EvalError

# Cost for forbidden (cross-category) pairs: large, finite, and far above any
# feasible sum of real planar distances (bounded by the projection range).
UNMATCHABLE_COST = 1e12

# Absolute tolerance for "equal total cost" during tie-break refinement.
# Costs are meter-scale distances; totals are compared via math.fsum, so
# genuinely tied assignments compare exactly and this only absorbs rounding
# introduced upstream of the solver.
_TIE_TOL = 1e-6


@dataclass(frozen=True)
class Assignment:
    """One-to-one row/column pairing with its summed cost."""

    pairs: tuple[tuple[int, int], ...]
    total_cost: float


@dataclass(frozen=True)
class MatchPair:
    det_point: DataPoint
    gt_point: DataPoint
    distance_m: float


@dataclass(frozen=True)
class FrameMatchResult:
    """Classified outcome of matching one detection frame against gt.

    tp + fp covers every detection point in the frame; tp + fn covers every
    gt point (gt_count). A matched pair beyond the threshold appears in both
    fp and fn, never in tp.
    """

    frame_time_s: float
    tp: tuple[MatchPair, ...]
    fp: tuple[DataPoint, ...]
    fn: tuple[DataPoint, ...]
    gt_count: int


@dataclass(frozen=True)
class AssociationResult:
    """Point counts under the best fixed trajectory-level id mapping."""

    trajectory_pairs: tuple[tuple[str, str], ...]
    tpa: int
    fpa: int
    fna: int


@dataclass(frozen=True)
class FramePairing:
    """Detection frames aligned to gt frames, plus the leftovers.

    fp_only holds detection frames with no gt frame within max_gap but one
    within 2x max_gap (scored as all false positives); n_dropped counts
    detection frames outside gt coverage entirely.
    """

    pairs: tuple[tuple[DataFrame, DataFrame], ...]
    fp_only: tuple[DataFrame, ...]
    n_dropped: int


def _sub_total(cost: np.ndarray, rows: Sequence[int], cols: Sequence[int]) -> float:
    """Optimal assignment total on a submatrix, summed exactly."""
    sub = cost[np.ix_(rows, cols)]
    rr, cc = linear_sum_assignment(sub)
    return math.fsum(sub[i, j] for i, j in zip(rr, cc))


def solve_assignment(cost) -> Assignment:
    """Minimum-total-cost one-to-one assignment of min(rows, cols) pairs.

    Among equal-cost optima the lexicographically smallest pair list is
    returned, so output is deterministic and order-stable for tests and
    re-runs. Raises ValueError on non-finite costs.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2:
        raise ValueError(f"cost matrix must be 2-D, got shape {cost.shape}")
    if cost.size == 0:
        return Assignment((), 0.0)
    if not np.isfinite(cost).all():
        raise ValueError("cost matrix contains non-finite values")

    n_rows, n_cols = cost.shape
    rows = list(range(n_rows))
    cols = list(range(n_cols))
    pairs: list[tuple[int, int]] = []

    while rows and cols:
        best = _sub_total(cost, rows, cols)
        placed = False
        for ci in range(len(cols)):
            rest_rows = rows[1:]
            rest_cols = cols[:ci] + cols[ci + 1 :]
            if rest_rows and rest_cols:
                tail = _sub_total(cost, rest_rows, rest_cols)
            else:
                tail = 0.0
            if math.fsum([cost[rows[0], cols[ci]], tail]) <= best + _TIE_TOL:
                pairs.append((rows[0], cols[ci]))
                rows.pop(0)
                cols.pop(ci)
                placed = True
                break
        if not placed:
            if len(rows) > len(cols):
                # this row is not part of any minimum-cost assignment
                rows.pop(0)
            else:
                # float corner: fall back to the engine's optimum outright
                sub = cost[np.ix_(rows, cols)]
                rr, cc = linear_sum_assignment(sub)
                pairs.extend((rows[i], cols[j]) for i, j in zip(rr, cc))
                break

    pairs.sort()
    total = math.fsum(cost[r, c] for r, c in pairs)
    return Assignment(tuple(pairs), total)


def match_frames_by_time(
    det: TrajectorySet,
    gt: TrajectorySet,
    latency_s: float,
    max_gap_s: float | None = None,
) -> FramePairing:
    """Align each detection frame with the gt frame nearest (t − latency).

    max_gap_s defaults to half the median detection frame interval. A
    detection frame whose nearest gt frame is farther than max_gap but
    within twice of it is kept as an all-FP frame (boundary raggedness);
    anything farther lies outside the trial window and is dropped.
    """
    if not gt.frames:
        raise EvalError("ground truth contains no frames")
    if max_gap_s is None:
        max_gap_s = _default_max_gap(det, gt)
    if max_gap_s <= 0:
        raise ValueError(f"max_gap_s must be positive, got {max_gap_s}")

    gt_times = np.array([f.timestamp_s for f in gt.frames])
    pairs: list[tuple[DataFrame, DataFrame]] = []
    fp_only: list[DataFrame] = []
    n_dropped = 0
    for df in det.frames:
        target = df.timestamp_s - latency_s
        i = int(np.searchsorted(gt_times, target))
        if i > 0 and (
            i == len(gt_times) or target - gt_times[i - 1] <= gt_times[i] - target
        ):
            i -= 1
        gap = abs(gt_times[i] - target)
        if gap <= max_gap_s:
            pairs.append((df, gt.frames[i]))
        elif gap <= 2.0 * max_gap_s:
            fp_only.append(df)
        else:
            n_dropped += 1
    return FramePairing(tuple(pairs), tuple(fp_only), n_dropped)


def _default_max_gap(det: TrajectorySet, gt: TrajectorySet) -> float:
    for ts in (det, gt):
        times = [f.timestamp_s for f in ts.frames]
        if len(times) >= 2:
            return 0.5 * float(np.median(np.diff(times)))
    return 0.5


def _frame_distances(
    det_frame: DataFrame,
    gt_frame: DataFrame,
    ctx: ProjectionContext,
    same_category_only: bool,
) -> tuple[list[tuple[int, int, float]], int, int]:
    """Assign detections to gt points; return real (i, j, distance) triples.

    Cross-category cells are encoded with a large finite sentinel and
    filtered out of the result, so forbidden pairs never surface even when
    the matrix shape forces the solver to use them.
    """
    det = det_frame.points
    gt = gt_frame.points
    if not det or not gt:
        return [], len(det), len(gt)

    dxy = np.array([project(p.position, ctx) for p in det])
    gxy = np.array([project(p.position, ctx) for p in gt])
    cost = np.hypot(
        dxy[:, 0:1] - gxy[None, :, 0], dxy[:, 1:2] - gxy[None, :, 1]
    )
    if same_category_only:
        det_cat = np.array([p.category for p in det])
        gt_cat = np.array([p.category for p in gt])
        cost[det_cat[:, None] != gt_cat[None, :]] = UNMATCHABLE_COST

    asn = solve_assignment(cost)
    triples = [
        (i, j, float(cost[i, j]))
        for i, j in asn.pairs
        if cost[i, j] < UNMATCHABLE_COST / 2
    ]
    return triples, len(det), len(gt)


def point_match(
    det_frame: DataFrame,
    gt_frame: DataFrame,
    threshold_m: float,
    ctx: ProjectionContext,
    same_category_only: bool = True,
) -> FrameMatchResult:
    """Optimal one-to-one point matching within one aligned frame pair.

    The assignment minimizes total distance without regard to the
    threshold; the threshold only classifies afterwards. An assigned pair
    beyond the threshold contributes a FP and a FN (the detection placed
    nothing within range of that gt point, and vice versa).
    """
    if threshold_m <= 0:
        raise ValueError(f"threshold_m must be positive, got {threshold_m}")
    triples, _, _ = _frame_distances(det_frame, gt_frame, ctx, same_category_only)

    matched_det = set()
    matched_gt = set()
    tp: list[MatchPair] = []
    for i, j, d in triples:
        if d <= threshold_m:
            tp.append(MatchPair(det_frame.points[i], gt_frame.points[j], d))
            matched_det.add(i)
            matched_gt.add(j)
    fp = tuple(p for i, p in enumerate(det_frame.points) if i not in matched_det)
    fn = tuple(p for j, p in enumerate(gt_frame.points) if j not in matched_gt)
    return FrameMatchResult(
        frame_time_s=det_frame.timestamp_s,
        tp=tuple(tp),
        fp=fp,
        fn=fn,
        gt_count=len(gt_frame.points),
    )


def count_id_switches(frame_results: Sequence[FrameMatchResult]) -> int:
    """Count changes of the matched detection id per gt object over time.

    Re-acquiring a previously used id after a switch counts again (A,B,A
    is two switches). Input must be in ascending frame-time order.
    """
    last_id: dict[str, str] = {}
    switches = 0
    for fr in frame_results:
        for mp in fr.tp:
            g = mp.gt_point.object_id
            d = mp.det_point.object_id
            if g in last_id and last_id[g] != d:
                switches += 1
            last_id[g] = d
    return switches


def association_match(
    det: TrajectorySet,
    gt: TrajectorySet,
    latency_s: float,
    threshold_m: float,
    ctx: ProjectionContext,
    max_gap_s: float | None = None,
) -> AssociationResult:
    """Count points under the best fixed det-id to gt-id mapping.

    Per frame pair, each (det id, gt id) combination scores a candidate TP
    when both are present, same-category, and within threshold; the global
    one-to-one id association maximizing total candidate TPs is fixed by
    the assignment solver, and tpa/fpa/fna are counted under it.
    """
    pairing = match_frames_by_time(det, gt, latency_s, max_gap_s)

    co_counts: dict[tuple[str, str], int] = {}
    det_total = 0
    gt_total = 0
    for df, gf in pairing.pairs:
        det_total += len(df.points)
        gt_total += len(gf.points)
        if not df.points or not gf.points:
            continue
        dxy = np.array([project(p.position, ctx) for p in df.points])
        gxy = np.array([project(p.position, ctx) for p in gf.points])
        dist = np.hypot(
            dxy[:, 0:1] - gxy[None, :, 0], dxy[:, 1:2] - gxy[None, :, 1]
        )
        for i, dp in enumerate(df.points):
            for j, gp in enumerate(gf.points):
                if dp.category == gp.category and dist[i, j] <= threshold_m:
                    key = (dp.object_id, gp.object_id)
                    co_counts[key] = co_counts.get(key, 0) + 1
    for df in pairing.fp_only:
        det_total += len(df.points)
    if not pairing.pairs:
        # no temporal overlap at all: every gt point goes unexplained
        gt_total = sum(len(f.points) for f in gt.frames)

    det_ids = sorted({d for d, _ in co_counts})
    gt_ids = sorted({g for _, g in co_counts})
    tpa = 0
    chosen: list[tuple[str, str]] = []
    if det_ids and gt_ids:
        neg = np.zeros((len(det_ids), len(gt_ids)))
        for (d, g), n in co_counts.items():
            neg[det_ids.index(d), gt_ids.index(g)] = -n
        asn = solve_assignment(neg)
        for i, j in asn.pairs:
            n = co_counts.get((det_ids[i], gt_ids[j]), 0)
            if n > 0:
                chosen.append((det_ids[i], gt_ids[j]))
                tpa += n
    return AssociationResult(
        trajectory_pairs=tuple(sorted(chosen)),
        tpa=tpa,
        fpa=det_total - tpa,
        fna=gt_total - tpa,
    )
