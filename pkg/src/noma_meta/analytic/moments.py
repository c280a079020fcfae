"""Moments of the conditional success probability for CC and CE users.

The batched helpers (`cc_moments`, `ce_moments`) take an array of (possibly
complex) orders and an effective threshold chi; the public per-scheme entry
points only decide which chi to use, so NOMA and OMA share one code path.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ..model import NetworkParams, NomaConfig, UserClass, chi_c, chi_e
from ..specfun import QuadratureSpec, integrate, z_kernel_array
from ..errors import DomainError

__all__ = [
    "Scheme",
    "MomentResult",
    "INNER_SPEC",
    "OUTER_SPEC",
    "cc_moments",
    "ce_moments",
    "ce_moments_fixed_z",
    "moment_cc_noma",
    "moment_ce_noma",
    "moment_ce_bounds",
    "moment_ce_bounds_oma",
    "moment_oma",
    "moment",
]

# Inner kernel tighter than the outer integral so the outer error dominates.
INNER_SPEC = QuadratureSpec(relative_tolerance=1e-9, absolute_tolerance=1e-12, max_subdivisions=4000)
OUTER_SPEC = QuadratureSpec(relative_tolerance=1e-7, absolute_tolerance=1e-12, max_subdivisions=2000)


class Scheme(enum.Enum):
    NOMA = "noma"
    OMA = "oma"


@dataclass(frozen=True)
class MomentResult:
    value: complex | float
    order: complex | float
    user_class: UserClass
    scheme: Scheme

    def __float__(self):
        return float(np.real(self.value))


def _orders(b):
    arr = np.atleast_1d(np.asarray(b))
    if np.iscomplexobj(arr) and np.all(arr.imag == 0):
        arr = arr.real
    return arr.astype(complex if np.iscomplexobj(arr) else float)


ORDER_CHUNK = 48


def _chunked(fn):
    """Evaluate a batched moment function in chunks of orders of similar size.

    Chunks are formed after sorting by |b|, so the panel counts that the
    largest order forces on the quadrature are not paid by small orders.
    """

    def wrapper(orders, *args, **kwargs):
        b = _orders(orders)
        if len(b) <= ORDER_CHUNK:
            return fn(b, *args, **kwargs)
        order = np.argsort(np.abs(b), kind="stable")
        out = np.empty(b.shape, dtype=b.dtype)
        for start in range(0, len(b), ORDER_CHUNK):
            sel = order[start:start + ORDER_CHUNK]
            out[sel] = fn(b[sel], *args, **kwargs)
        return out

    wrapper.__doc__ = fn.__doc__
    wrapper.__name__ = fn.__name__
    return wrapper


def _oscillation_panels(orders, span):
    # roughly one initial panel per period of exp(-i t w) over a w-range `span`
    top = float(np.max(np.abs(np.imag(orders)))) if np.iscomplexobj(orders) else 0.0
    return max(1, int(math.ceil(top * span / (2 * math.pi))))


@_chunked
def cc_moments(orders, chi: float, params: NetworkParams, spec: QuadratureSpec = INNER_SPEC):
    """M_b = 1 / (1 + tau^2 Z_b(chi, tau^-2)) for each order; +inf where it diverges."""
    b = _orders(orders)
    tau, delta = params.tau, params.delta
    z = z_kernel_array(b, chi, [tau ** -2], delta, spec)[0]
    denom = 1.0 + tau * tau * z
    out = np.empty_like(denom)
    real_neg = (np.imag(b) == 0) & (np.real(b) < 0)
    diverged = real_neg & ~(np.real(denom) > 0)
    out[diverged] = np.inf
    out[~diverged] = 1.0 / denom[~diverged]
    out[b == 0] = 1.0
    return out


def _ce_outer(b, chi, params, z_of_v, outer_spec, min_panels):
    tau2 = params.tau ** 2
    inv_delta = 1.0 / params.delta

    def integrand(v):
        z = z_of_v(v)
        own = np.exp(-np.log1p(chi * v ** inv_delta)[:, None] * b[None, :])
        return own / (1.0 + v[:, None] * z) ** 2

    val = integrate(integrand, tau2, 1.0, outer_spec, min_panels=min_panels)
    return np.atleast_1d(val) / (1.0 - tau2)


def _ce_divergent(b, chi, params, spec):
    # for real b < 0, 1 + v Z_b(chi, 1/v) decreases in v, so its minimum over
    # [tau^2, 1] is 1 + Z_b(chi, 1)
    neg = (np.imag(b) == 0) & (np.real(b) < 0)
    out = np.zeros(b.shape, dtype=bool)
    if np.any(neg):
        z_end = z_kernel_array(np.real(b[neg]), chi, [1.0], params.delta, spec)[0]
        out[neg] = ~(1.0 + z_end > 0)
    return out


@_chunked
def ce_moments(orders, chi: float, params: NetworkParams,
               inner_spec: QuadratureSpec = INNER_SPEC, outer_spec: QuadratureSpec = OUTER_SPEC):
    """CE moments by nested quadrature: outer v in [tau^2, 1], inner Z_b(chi, 1/v)."""
    b = _orders(orders)
    out = np.ones(b.shape, dtype=b.dtype)
    diverged = _ce_divergent(b, chi, params, inner_spec)
    live = (b != 0) & ~diverged
    out[diverged] = np.inf
    if not np.any(live):
        return out
    bl = b[live]
    alpha, tau = params.alpha, params.tau
    outer_panels = _oscillation_panels(bl, math.log1p(chi) - math.log1p(chi * tau ** alpha))

    def z_of_v(v):
        return z_kernel_array(bl, chi, 1.0 / v, params.delta, inner_spec)

    out[live] = _ce_outer(bl, chi, params, z_of_v, outer_spec, outer_panels)
    return out


def ce_moments_fixed_z(orders, chi: float, params: NetworkParams, a: float,
                       inner_spec: QuadratureSpec = INNER_SPEC,
                       outer_spec: QuadratureSpec = OUTER_SPEC):
    """The CE moment integral with Z_b(chi, 1/v) frozen at Z_b(chi, a)."""
    b = _orders(orders)
    out = np.ones(b.shape, dtype=b.dtype)
    live = b != 0
    if not np.any(live):
        return out
    bl = b[live]
    z = z_kernel_array(bl, chi, [a], params.delta, inner_spec)[0]
    res = np.empty(bl.shape, dtype=bl.dtype)
    # 1 + v z is smallest at v = 1 when z < 0
    bad = ~(np.real(1.0 + z) > 0)
    res[bad] = np.inf
    good = ~bad
    if np.any(good):
        zg = z[good]
        res[good] = _ce_outer(bl[good], chi, params, lambda v: zg[None, :], outer_spec, 1)
    out[live] = res
    return out


def _scalar(arr):
    v = arr[0]
    return complex(v) if np.iscomplexobj(arr) else float(v)


def moment_cc_noma(b, cfg: NomaConfig, params: NetworkParams) -> MomentResult:
    value = _scalar(cc_moments([b], chi_c(cfg), params))
    return MomentResult(value, b, UserClass.CC, Scheme.NOMA)


def moment_ce_noma(b, cfg: NomaConfig, params: NetworkParams) -> MomentResult:
    value = _scalar(ce_moments([b], chi_e(cfg), params))
    return MomentResult(value, b, UserClass.CE, Scheme.NOMA)


def _bounds(b, chi, params):
    if np.iscomplexobj(b) or b == 0:
        raise DomainError("CE moment bounds need a real, nonzero order")
    at_one = _scalar(ce_moments_fixed_z([b], chi, params, 1.0))
    at_edge = _scalar(ce_moments_fixed_z([b], chi, params, params.tau ** -2))
    # the moment falls as Z grows; Z(chi, 1) is the largest Z for b > 0 and
    # the most negative one for b < 0, so the two substitutions swap roles
    if b > 0:
        return at_one, at_edge
    return at_edge, at_one


def moment_ce_bounds(b: float, cfg: NomaConfig, params: NetworkParams) -> tuple[float, float]:
    """(lower, upper) bounds on the CE moment with Z frozen at its extreme values."""
    return _bounds(b, chi_e(cfg), params)


def moment_ce_bounds_oma(b: float, beta_e: float, params: NetworkParams) -> tuple[float, float]:
    return _bounds(b, beta_e, params)


def moment_oma(b, user_class: UserClass, beta: float, params: NetworkParams) -> MomentResult:
    """OMA moments: the NOMA expressions with chi replaced by the plain threshold."""
    if not beta > 0:
        raise DomainError(f"beta must be > 0, got {beta}")
    if user_class is UserClass.CC:
        value = _scalar(cc_moments([b], beta, params))
    else:
        value = _scalar(ce_moments([b], beta, params))
    return MomentResult(value, b, user_class, Scheme.OMA)


def moment(b, user_class: UserClass, scheme: Scheme, cfg: NomaConfig,
           params: NetworkParams) -> MomentResult:
    """Dispatch on (class, scheme); OMA uses beta_c / beta_e from `cfg`."""
    if scheme is Scheme.OMA:
        beta = cfg.beta_c if user_class is UserClass.CC else cfg.beta_e
        return moment_oma(b, user_class, beta, params)
    if user_class is UserClass.CC:
        return moment_cc_noma(b, cfg, params)
    return moment_ce_noma(b, cfg, params)
