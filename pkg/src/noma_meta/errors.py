"""Exception hierarchy shared by all modules."""


class NomaMetaError(Exception):
    """Base class for every error raised by this package."""


class DomainError(NomaMetaError, ValueError):
    """An argument lies outside the domain of the operation."""


class NonConvergent(NomaMetaError, ArithmeticError):
    """A numerical procedure did not reach its tolerance within its budget."""


class InfeasiblePowerSplit(DomainError):
    """theta >= 1/(1+beta_e): the L_E layer cannot be decoded at all."""


class DegenerateDistribution(DomainError):
    """Moments do not describe a non-degenerate beta distribution."""


class ClassMismatch(NomaMetaError, ValueError):
    """A CC-only (or CE-only) quantity was requested for the other class."""


class DegenerateRealization(NomaMetaError, RuntimeError):
    """Fewer than two base stations fell inside the simulation window."""


class EmptySampleSet(NomaMetaError, ValueError):
    """An empirical statistic was requested from zero samples."""


class ConfigError(NomaMetaError, ValueError):
    """Invalid run configuration; carries the offending key."""

    def __init__(self, key, reason):
        self.key = key
        self.reason = reason
        super().__init__(f"{key}: {reason}")
