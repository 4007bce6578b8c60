"""Evaluation toolkit for roadside perception systems against RTK-GPS truth.

Layers, bottom up: core (geometry and trajectory containers), ingest (CSV
wire format), matching (frame alignment and optimal assignment), latency
(paired-run delay and position-error estimation), metrics (MOTA/MOTP/IDF1/
HOTA report assembly), synth (scenario generation and error models), cli
(the `roadside-eval` command).
"""

__version__ = "0.1.0"

from .core import (
    CATEGORIES,
    DataFrame,
    DataPoint,
    GeoPoint,
    LocalPoint,
    PEDESTRIAN,
    ProjectionContext,
    Trajectory,
    TrajectorySet,
    VEHICLE,
    build_trajectory_set,
    filter_category,
    from_frames,
    interpolate_position,
    make_projection,
    project,
    slice_trajectory,
    unproject,
)
from .errors import (
    CategoryError,
    ConsistencyError,
    EvalError,
    ExtrapolationError,
    InsufficientDataError,
    IntegrityError,
    PairingError,
    ProjectionRangeError,
    ScenarioError,
    SchemaError,
    WindowExtractionError,
)
from .ingest import (
    IngestReport,
    apply_clock_offset,
    parse_csv,
    read_points,
    write_points,
)
from .latency import (
    LatencyEstimate,
    PositionErrorEstimate,
    RouteLine,
    TauSample,
    collect_tau_samples,
    combine_trials,
    estimate_latency,
    estimate_latency_for_trial,
    estimate_position_error,
    find_constant_speed_windows,
    make_route_line,
    predict_position_error_variance,
    predict_tau_variance,
    sample_tau,
)
from .matching import (
    Assignment,
    AssociationResult,
    FrameMatchResult,
    FramePairing,
    MatchPair,
    association_match,
    count_id_switches,
    match_frames_by_time,
    point_match,
    solve_assignment,
)
from .metrics import (
    CountSummary,
    MetricsReport,
    ThresholdSweep,
    compute_hota,
    compute_idf1,
    compute_mota,
    compute_motp,
    compute_report,
    threshold_sweep,
)
from .synth import (
    ErrorModel,
    MonteCarloComparison,
    ScenarioSpec,
    TEMPLATES,
    default_latency_route,
    degrade,
    generate_scenario,
    monte_carlo_validate,
    swap_object_ids,
)

__all__ = [
    "__version__",
    "CATEGORIES",
    "PEDESTRIAN",
    "VEHICLE",
    "TEMPLATES",
    "Assignment",
    "AssociationResult",
    "CategoryError",
    "ConsistencyError",
    "CountSummary",
    "DataFrame",
    "DataPoint",
    "ErrorModel",
    "EvalError",
    "ExtrapolationError",
    "FrameMatchResult",
    "FramePairing",
    "GeoPoint",
    "IngestReport",
    "InsufficientDataError",
    "IntegrityError",
    "LatencyEstimate",
    "LocalPoint",
    "MatchPair",
    "MetricsReport",
    "MonteCarloComparison",
    "PairingError",
    "PositionErrorEstimate",
    "ProjectionContext",
    "ProjectionRangeError",
    "RouteLine",
    "ScenarioError",
    "ScenarioSpec",
    "SchemaError",
    "TauSample",
    "ThresholdSweep",
    "Trajectory",
    "TrajectorySet",
    "WindowExtractionError",
    "apply_clock_offset",
    "association_match",
    "build_trajectory_set",
    "collect_tau_samples",
    "combine_trials",
    "compute_hota",
    "compute_idf1",
    "compute_mota",
    "compute_motp",
    "compute_report",
    "count_id_switches",
    "default_latency_route",
    "degrade",
    "estimate_latency",
    "estimate_latency_for_trial",
    "estimate_position_error",
    "filter_category",
    "find_constant_speed_windows",
    "from_frames",
    "generate_scenario",
    "interpolate_position",
    "make_projection",
    "make_route_line",
    "match_frames_by_time",
    "monte_carlo_validate",
    "parse_csv",
    "point_match",
    "predict_position_error_variance",
    "predict_tau_variance",
    "project",
    "read_points",
    "sample_tau",
    "slice_trajectory",
    "solve_assignment",
    "swap_object_ids",
    "threshold_sweep",
    "unproject",
    "write_points",
]
