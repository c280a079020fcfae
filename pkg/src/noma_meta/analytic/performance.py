"""Mean local delay (the -1st moment) and cell throughput for NOMA and OMA."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..model import NetworkParams, NomaConfig, UserClass, chi_c, chi_e
from .moments import Scheme, cc_moments, ce_moments, moment_ce_bounds, moment_ce_bounds_oma

__all__ = [
    "cc_delay_closed_form",
    "cc_delay_printed",
    "mean_local_delay",
    "mean_local_delay_bounds",
    "ThroughputResult",
    "cell_throughput",
    "ce_rate",
    "matched_oma_rho",
    "throughput_comparison",
]


def cc_delay_closed_form(chi: float, params: NetworkParams) -> float:
    """1 / (1 - delta/(1-delta) * chi * tau^alpha), or +inf when that is not positive."""
    d = params.delta
    denom = 1.0 - d / (1.0 - d) * chi * params.tau ** params.alpha
    return 1.0 / denom if denom > 0 else math.inf


def cc_delay_printed(chi: float, params: NetworkParams) -> float:
    """The same expression with chi^(1-delta) in place of chi.

    Kept only for comparison: it disagrees with the b = -1 moment computed
    by quadrature except at chi = 1.
    """
    d = params.delta
    denom = 1.0 - d / (1.0 - d) * chi ** (1.0 - d) * params.tau ** params.alpha
    return 1.0 / denom if denom > 0 else math.inf


def _chi(user_class, scheme, cfg):
    if scheme is Scheme.OMA:
        return cfg.beta_c if user_class is UserClass.CC else cfg.beta_e
    return chi_c(cfg) if user_class is UserClass.CC else chi_e(cfg)


def mean_local_delay(user_class: UserClass, scheme: Scheme, cfg: NomaConfig,
                     params: NetworkParams, *, method: str = "closed") -> float:
    """Mean number of transmissions until first success; +inf when it diverges.

    `method="closed"` uses the closed form for CC users and `"quadrature"`
    the b = -1 moment integral.  CE users always go through quadrature.
    """
    if method not in ("closed", "quadrature"):
        raise DomainError(f"unknown method {method!r}")
    chi = _chi(user_class, scheme, cfg)
    if user_class is UserClass.CC:
        if method == "closed":
            return cc_delay_closed_form(chi, params)
        return float(cc_moments([-1.0], chi, params)[0])
    return float(ce_moments([-1.0], chi, params)[0])


def mean_local_delay_bounds(scheme: Scheme, cfg: NomaConfig,
                            params: NetworkParams) -> tuple[float, float]:
    """(lower, upper) bounds on the CE user's mean local delay."""
    if scheme is Scheme.OMA:
        return moment_ce_bounds_oma(-1.0, cfg.beta_e, params)
    return moment_ce_bounds(-1.0, cfg, params)


@dataclass(frozen=True)
class ThroughputResult:
    total: float
    cc_term: float
    ce_term: float
    feasible: bool = True


def _m1(user_class, chi, params):
    fn = cc_moments if user_class is UserClass.CC else ce_moments
    return float(np.real(fn([1.0], chi, params)[0]))


def cell_throughput(scheme: Scheme, cfg: NomaConfig, params: NetworkParams,
                    rho: float | None = None) -> ThroughputResult:
    """Cell throughput in bit/s/Hz.

    NOMA: log2(1+beta_c) M1_cc(chi_c) + log2(1+beta_e) M1_ce(chi_e).  When
    the power split cannot carry the L_E layer both users fail, so both terms
    are 0 and `feasible` is False.
    OMA: rho log2(1+beta_c) M1_cc(beta_c) + (1-rho) log2(1+beta_e) M1_ce(beta_e).
    """
    rate_c = math.log2(1.0 + cfg.beta_c)
    rate_e = math.log2(1.0 + cfg.beta_e)
    if scheme is Scheme.OMA:
        if rho is None or not (0.0 <= rho <= 1.0):
            raise DomainError(f"OMA needs rho in [0, 1], got {rho}")
        cc = rho * rate_c * _m1(UserClass.CC, cfg.beta_c, params) if rho > 0 else 0.0
        ce = (1.0 - rho) * rate_e * _m1(UserClass.CE, cfg.beta_e, params) if rho < 1 else 0.0
        return ThroughputResult(cc + ce, cc, ce)
    if not cfg.feasible:
        return ThroughputResult(0.0, 0.0, 0.0, feasible=False)
    cc = rate_c * _m1(UserClass.CC, chi_c(cfg), params)
    ce = rate_e * _m1(UserClass.CE, chi_e(cfg), params)
    return ThroughputResult(cc + ce, cc, ce)


def ce_rate(scheme: Scheme, cfg: NomaConfig, params: NetworkParams,
            rho: float | None = None) -> float:
    return cell_throughput(scheme, cfg, params, rho).ce_term


def matched_oma_rho(cfg: NomaConfig, params: NetworkParams) -> float:
    """CC time share under OMA that gives the CE user its NOMA rate.

    Clipped to [0, 1]; it is 0 when even full-time OMA cannot reach the NOMA
    CE rate.
    """
    target = ce_rate(Scheme.NOMA, cfg, params)
    full = math.log2(1.0 + cfg.beta_e) * _m1(UserClass.CE, cfg.beta_e, params)
    return min(max(1.0 - target / full, 0.0), 1.0)


def throughput_comparison(cfg: NomaConfig, params: NetworkParams) -> dict:
    """NOMA against OMA at the same CE-user rate."""
    noma = cell_throughput(Scheme.NOMA, cfg, params)
    rho = matched_oma_rho(cfg, params)
    oma = cell_throughput(Scheme.OMA, cfg, params, rho)
    return {
        "rho": rho,
        "noma_total": noma.total,
        "oma_total": oma.total,
        "noma_ce_rate": noma.ce_term,
        "oma_ce_rate": oma.ce_term,
        "gain": noma.total - oma.total,
    }
