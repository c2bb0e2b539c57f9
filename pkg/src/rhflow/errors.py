"""Exception taxonomy for rhflow.

Every failure mode that callers are expected to branch on gets its own class;
anything else is a plain ValueError/RuntimeError bug.
"""


class RhflowError(Exception):
    """Base class for all rhflow-specific errors."""


class InvalidDimensions(RhflowError):
    """Grid node counts below the supported minimum or inconsistent shapes."""


class InvalidParam(RhflowError):
    """Chart or run parameter outside its admissible range."""


class NotSPD(RhflowError):
    """Metric constructor or step produced a non positive-definite tensor."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class NoBoundary(RhflowError):
    """Boundary geometry requested on a chart with no boundary nodes."""


class IncompatibleRHS(RhflowError):
    """Neumann solvability violated: the right-hand side has nonzero mean."""


class NoConvergence(RhflowError):
    """Iterative solver hit its iteration cap before reaching tolerance."""


class NonPositiveS(RhflowError):
    """Entropy evaluated where S <= 0; carries the offending node."""

    def __init__(self, message, node=None, value=None):
        super().__init__(message)
        self.node = node
        self.value = value


class NonPositiveTau(RhflowError):
    """A W-functional was evaluated with tau <= 0."""


class MetricDegenerate(RhflowError):
    """det g <= 0 encountered during a step or perturbation."""


class CFLViolation(RhflowError):
    """Requested step size cannot be stabilised within the substep cap."""


class TauUnderflow(RhflowError):
    """Reverse time would cross zero (or the configured floor) mid-run."""


class HypothesisViolation(RhflowError):
    """A monitored flow hypothesis (tension, boundary curvature) drifted
    past its declared tolerance in strict mode."""


class ParseError(RhflowError):
    """Config file syntax error; carries (line, column)."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(RhflowError):
    """Config or preset violates a named precondition."""
