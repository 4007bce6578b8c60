"""Exception types shared across the evaluation pipeline.

The CLI maps EvalError (and subclasses) to exit code 1 and
ConsistencyError to exit code 2; everything else is a genuine crash.
"""


class EvalError(Exception):
    """Base class for input, configuration, and data problems."""


class SchemaError(EvalError):
    """Input file header does not match the expected column schema."""


class IntegrityError(EvalError):
    """Structurally inconsistent data, e.g. duplicate (id, frame) records."""


class ProjectionRangeError(EvalError):
    """Point too far from the projection origin for a flat-earth plane."""


class ExtrapolationError(EvalError):
    """Interpolation query outside the trajectory's time span."""


class WindowExtractionError(EvalError):
    """No qualifying constant-speed interval found in a run."""


class PairingError(EvalError):
    """Latency samples cover only one travel direction."""


class InsufficientDataError(EvalError):
    """Too few usable samples for a statistically meaningful estimate."""


class ScenarioError(EvalError):
    """Requested synthetic scenario is infeasible."""


class CategoryError(EvalError):
    """Requested object category is absent from the ground truth."""


class ConsistencyError(Exception):
    """Internal invariant violated (indicates a bug, not bad input)."""
