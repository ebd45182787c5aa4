"""Poisson pulse trains, packet traffic synthesis and their power spectra."""

from . import distributions, pulse_model, specfun, spectral, traffic_sim
from .distributions import ExponentialLaw, LogUniformScale, PositiveCauchy, TruncatedPowerLaw
from .errors import (
    AccuracyError,
    ConditionViolatedError,
    DomainError,
    EmptyTraceError,
    GridMismatchError,
    InsufficientPointsError,
    InvalidParameterError,
    PulseNoiseError,
    QuadratureError,
    ResourceLimitError,
    TraceFormatError,
)
from .pulse_model import PulseEnsemble, PulseKind, PulseShape, SampledSignal
from .specfun import exp_integral_e1, upper_incomplete_gamma
from .spectral import SlopeFit, SpectrumEstimate
from .traffic_sim import FileRequest, FixedGap, PacketTrace, TrafficConfig

__version__ = "0.1.0"

__all__ = [
    "distributions",
    "pulse_model",
    "specfun",
    "spectral",
    "traffic_sim",
    "TruncatedPowerLaw",
    "PositiveCauchy",
    "LogUniformScale",
    "ExponentialLaw",
    "PulseKind",
    "PulseShape",
    "PulseEnsemble",
    "SampledSignal",
    "TrafficConfig",
    "FixedGap",
    "FileRequest",
    "PacketTrace",
    "SpectrumEstimate",
    "SlopeFit",
    "upper_incomplete_gamma",
    "exp_integral_e1",
    "PulseNoiseError",
    "InvalidParameterError",
    "DomainError",
    "ConditionViolatedError",
    "QuadratureError",
    "AccuracyError",
    "ResourceLimitError",
    "EmptyTraceError",
    "GridMismatchError",
    "InsufficientPointsError",
    "TraceFormatError",
    "__version__",
]
