"""Meta-distribution analysis of two-user downlink NOMA with CC/CE user ranking."""
from .errors import (
    ClassMismatch,
    ConfigError,
    DegenerateDistribution,
    DegenerateRealization,
    DomainError,
    EmptySampleSet,
    InfeasiblePowerSplit,
    NomaMetaError,
    NonConvergent,
)
from .model import NetworkParams, NomaConfig, UserClass, chi_c, chi_e
from .analytic import Scheme

__version__ = "0.1.0"
