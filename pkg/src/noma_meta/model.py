"""Network/NOMA parameters, CC/CE ranking and the serving/dominant distance law.

With pure path loss the strongest BS is the nearest one, so R_o is the nearest
and R_d the second-nearest distance of the BS process to the typical user.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InfeasiblePowerSplit

__all__ = [
    "NetworkParams",
    "NomaConfig",
    "UserClass",
    "DistancePair",
    "db_to_linear",
    "chi_c",
    "chi_e",
    "classify",
    "class_probabilities",
    "joint_pdf",
    "joint_pdf_unconditional",
    "serving_distance_cdf",
    "sample_distance_pair",
    "sample_distance_pairs",
]


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class NetworkParams:
    lambda_b: float = 1.0
    alpha: float = 4.0
    tau: float = 0.7

    def __post_init__(self):
        if not (self.lambda_b > 0 and math.isfinite(self.lambda_b)):
            raise DomainError(f"lambda_b must be finite and > 0, got {self.lambda_b}")
        if not (self.alpha > 2 and math.isfinite(self.alpha)):
            raise DomainError(f"alpha must be > 2, got {self.alpha}")
        if not (0.0 < self.tau < 1.0):
            raise DomainError(f"tau must lie in (0, 1), got {self.tau}")

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha


@dataclass(frozen=True)
class NomaConfig:
    """Power split theta (CC layer share) and linear-scale SIR thresholds."""

    theta: float
    beta_c: float
    beta_e: float

    def __post_init__(self):
        if not (0.0 < self.theta < 1.0):
            raise DomainError(f"theta must lie in (0, 1), got {self.theta}")
        if not (self.beta_c > 0 and math.isfinite(self.beta_c)):
            raise DomainError(f"beta_c must be > 0, got {self.beta_c}")
        if not (self.beta_e > 0 and math.isfinite(self.beta_e)):
            raise DomainError(f"beta_e must be > 0, got {self.beta_e}")

    @classmethod
    def from_db(cls, theta: float, beta_c_db: float, beta_e_db: float) -> "NomaConfig":
        return cls(theta, db_to_linear(beta_c_db), db_to_linear(beta_e_db))

    @property
    def feasible(self) -> bool:
        return 1.0 - self.theta * (1.0 + self.beta_e) > 0.0


class UserClass(enum.Enum):
    CC = "cc"
    CE = "ce"


@dataclass(frozen=True)
class DistancePair:
    r_o: float
    r_d: float

    def __post_init__(self):
        if not (0.0 <= self.r_o <= self.r_d):
            raise DomainError(f"need 0 <= r_o <= r_d, got r_o={self.r_o}, r_d={self.r_d}")


def _chi_e_raw(theta, beta_e):
    denom = 1.0 - theta * (1.0 + beta_e)
    if not denom > 0.0:
        raise InfeasiblePowerSplit(
            f"theta={theta} >= 1/(1+beta_e)={1.0 / (1.0 + beta_e):.6g}: L_E layer undecodable"
        )
    return beta_e / denom


def chi_c(cfg: NomaConfig) -> float:
    """Effective threshold of the CC user: it must decode L_E and then L_C."""
    return max(cfg.beta_c / cfg.theta, _chi_e_raw(cfg.theta, cfg.beta_e))


def chi_e(cfg: NomaConfig) -> float:
    return _chi_e_raw(cfg.theta, cfg.beta_e)


def classify(d: DistancePair, tau: float) -> UserClass:
    # inclusive boundary: R_o/R_d == tau is a CC user
    if d.r_o <= tau * d.r_d:
        return UserClass.CC
    return UserClass.CE


def class_probabilities(tau: float) -> tuple[float, float]:
    if not (0.0 < tau <= 1.0):
        raise DomainError(f"tau must lie in (0, 1], got {tau}")
    return tau * tau, 1.0 - tau * tau


def joint_pdf_unconditional(r_o, r_d, params: NetworkParams):
    """Joint density of nearest and second-nearest BS distances (r_d >= r_o >= 0)."""
    r_o = np.asarray(r_o, dtype=float)
    r_d = np.asarray(r_d, dtype=float)
    lam = params.lambda_b
    dens = (2 * math.pi * lam) ** 2 * r_o * r_d * np.exp(-math.pi * lam * r_d ** 2)
    return np.where((r_o >= 0) & (r_d >= r_o), dens, 0.0)


def joint_pdf(r_o, r_d, params: NetworkParams, user_class: UserClass):
    """Joint density of (R_o, R_d) given the user class; zero off its support."""
    tau = params.tau
    r_o = np.asarray(r_o, dtype=float)
    r_d = np.asarray(r_d, dtype=float)
    base = joint_pdf_unconditional(r_o, r_d, params)
    if user_class is UserClass.CC:
        return np.where(r_o <= tau * r_d, base / (tau * tau), 0.0)
    return np.where(r_o > tau * r_d, base / (1.0 - tau * tau), 0.0)


def serving_distance_cdf(r, params: NetworkParams, user_class: UserClass):
    """Marginal CDF of R_o for the typical CC or CE user."""
    tau2 = params.tau ** 2
    s = math.pi * params.lambda_b * np.asarray(r, dtype=float) ** 2
    if user_class is UserClass.CC:
        out = -np.expm1(-s / tau2)
    else:
        out = (-np.expm1(-s) - tau2 * -np.expm1(-s / tau2)) / (1.0 - tau2)
    return np.where(s > 0, out, 0.0)


def sample_distance_pairs(params: NetworkParams, user_class: UserClass | None,
                          rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Exact draws of (R_o, R_d); `user_class=None` samples the unconditional law.

    pi*lambda*R_d**2 is Gamma(2, 1) for both classes (and unconditionally), and
    R_o**2 given R_d is uniform on the class-specific slice of [0, R_d**2].
    """
    lam = params.lambda_b
    r_d2 = rng.standard_gamma(2.0, size) / (math.pi * lam)
    u = rng.random(size)
    if user_class is None:
        lo, hi = 0.0, 1.0
    elif user_class is UserClass.CC:
        lo, hi = 0.0, params.tau ** 2
    else:
        lo, hi = params.tau ** 2, 1.0
    # CE draws land in (tau^2 r_d^2, r_d^2] so none sits on the CC boundary
    frac = lo + (hi - lo) * u if user_class is not UserClass.CE else hi - (hi - lo) * u
    r_o2 = r_d2 * frac
    return np.sqrt(r_o2), np.sqrt(r_d2)


def sample_distance_pair(params: NetworkParams, user_class: UserClass | None,
                         rng: np.random.Generator) -> DistancePair:
    r_o, r_d = sample_distance_pairs(params, user_class, rng, 1)
    return DistancePair(float(r_o[0]), float(r_d[0]))
