"""Coupled curvature/harmonic-map flow simulator and entropy-identity
verification harness on compact surfaces with boundary."""

__version__ = "0.1.0"

from .chart import (Chart, FlowState, MapField, MetricField, ScalarField,
                    SymTensorField, VectorField, constant_field, constant_map,
                    constant_metric, identity_metric, make_chart)
from .errors import (CFLViolation, HypothesisViolation, IncompatibleRHS,
                     InvalidDimensions, InvalidParam, MetricDegenerate,
                     NoBoundary, NoConvergence, NonPositiveS, NonPositiveTau,
                     NotSPD, ParseError, RhflowError, TauUnderflow,
                     ValidationError)
from .config import RunConfig, load_config
from .harness import run_scenario, verify

__all__ = [
    "Chart", "FlowState", "MapField", "MetricField", "ScalarField",
    "SymTensorField", "VectorField", "constant_field", "constant_map",
    "constant_metric", "identity_metric", "make_chart",
    "CFLViolation", "HypothesisViolation", "IncompatibleRHS",
    "InvalidDimensions", "InvalidParam", "MetricDegenerate", "NoBoundary",
    "NoConvergence", "NonPositiveS", "NonPositiveTau", "NotSPD", "ParseError",
    "RhflowError", "TauUnderflow", "ValidationError",
    "RunConfig", "load_config", "run_scenario", "verify",
    "__version__",
]
