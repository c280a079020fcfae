"""Numerical kernels: adaptive quadrature, the interference kernel Z, I_x(p, q).

All integrands are *batched*: a callable receives a 1-D array of abscissae and
returns an array whose first axis matches it.  Extra trailing axes are
integrated component-wise, which lets a single adaptive run serve many
moment orders (or many reliability levels) at once.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NonConvergent

__all__ = [
    "QuadratureSpec",
    "integrate",
    "integrate_semi_infinite",
    "z_kernel",
    "z_kernel_array",
    "z_kernel_minus_one",
    "reg_inc_beta",
    "reg_inc_beta_array",
    "complex_pow_principal",
]

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureSpec:
    relative_tolerance: float = 1e-9
    absolute_tolerance: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (self.relative_tolerance > 0 and self.absolute_tolerance > 0):
            raise DomainError("quadrature tolerances must be strictly positive")
        if int(self.max_subdivisions) < 1:
            raise DomainError("max_subdivisions must be >= 1")


DEFAULT_SPEC = QuadratureSpec()

# Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
_XK_HALF = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WK_HALF = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG_HALF = np.array([
    0.0, 0.129484966168869693270611432679082,
    0.0, 0.279705391489276667901467771423780,
    0.0, 0.381830050505118944950369775488975,
    0.0, 0.417959183673469387755102040816327,
])
XK = np.concatenate([-_XK_HALF[:-1], _XK_HALF[::-1]])
WK = np.concatenate([_WK_HALF[:-1], _WK_HALF[::-1]])
WG = np.concatenate([_WG_HALF[:-1], _WG_HALF[::-1]])
_EPS = np.finfo(float).eps


def _evaluate_panels(f, a, b):
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = center[:, None] + half[:, None] * XK[None, :]
    values = np.asarray(f(nodes.ravel()))
    values = values.reshape(nodes.shape + values.shape[1:])
    kronrod = np.tensordot(WK, values, axes=(0, 1))
    gauss = np.tensordot(WG, values, axes=(0, 1))
    # tensordot moves the panel axis first; rescale by the half-width
    scale = half.reshape(half.shape + (1,) * (kronrod.ndim - 1))
    kronrod = kronrod * scale
    gauss = gauss * scale
    diff = np.abs(kronrod - gauss)
    err = diff.reshape(len(a), -1).max(axis=1) if diff.ndim > 1 else diff
    # a panel whose rule pair agrees to rounding carries no usable error signal
    mag = np.abs(kronrod).reshape(len(a), -1).max(axis=1) if kronrod.ndim > 1 else np.abs(kronrod)
    err = np.where(err < 50 * _EPS * mag, 0.0, err)
    return kronrod, err


def _adaptive(f: Integrand, edges, spec: QuadratureSpec, min_panels: int = 1):
    """Adaptive GK15 over consecutive segments; returns per-segment integrals.

    Bisection is breadth-first and depends only on the integrand values, so
    the panel decomposition (and the result) is reproducible bit for bit.
    """
    edges = np.asarray(edges, dtype=float)
    n_seg = len(edges) - 1
    counts = np.maximum(np.broadcast_to(np.asarray(min_panels, dtype=int), (n_seg,)), 1)
    seg = np.repeat(np.arange(n_seg), counts)
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    idx = np.arange(len(seg)) - np.repeat(starts, counts)
    lo, width, n = edges[seg], (edges[1:] - edges[:-1])[seg], counts[seg]
    a = lo + width * (idx / n)
    b = np.where(idx + 1 == n, edges[seg + 1], lo + width * ((idx + 1) / n))
    val, err = _evaluate_panels(f, a, b)
    limit = max(int(spec.max_subdivisions), len(a))
    while True:
        total = val.sum(axis=0)
        norm = float(np.max(np.abs(total))) if np.ndim(total) else abs(total)
        tol = max(spec.absolute_tolerance, spec.relative_tolerance * norm)
        total_err = float(err.sum())
        if total_err <= tol:
            break
        room = limit - len(a)
        if room <= 0 or not np.isfinite(total_err):
            raise NonConvergent(
                f"quadrature error {total_err:.3g} above tolerance {tol:.3g} "
                f"after {len(a)} panels"
            )
        order = np.argsort(-err, kind="stable")
        remaining = total_err - np.cumsum(err[order])
        n_split = int(np.searchsorted(-remaining, -0.5 * tol)) + 1
        n_split = min(n_split, room, len(a))
        split = np.zeros(len(a), dtype=bool)
        split[order[:n_split]] = True
        mid = 0.5 * (a[split] + b[split])
        new_a = np.concatenate([a[split], mid])
        new_b = np.concatenate([mid, b[split]])
        new_seg = np.concatenate([seg[split], seg[split]])
        new_val, new_err = _evaluate_panels(f, new_a, new_b)
        keep = ~split
        a = np.concatenate([a[keep], new_a])
        b = np.concatenate([b[keep], new_b])
        seg = np.concatenate([seg[keep], new_seg])
        val = np.concatenate([val[keep], new_val])
        err = np.concatenate([err[keep], new_err])
    out = np.zeros((n_seg,) + val.shape[1:], dtype=val.dtype)
    np.add.at(out, seg, val)
    return out


def _scalarize(x):
    return x.item() if np.ndim(x) == 0 else x


def integrate(f: Integrand, lower: float, upper: float,
              spec: QuadratureSpec = DEFAULT_SPEC, *, points=(), min_panels: int = 1):
    """Integrate a batched integrand over the finite interval [lower, upper]."""
    if not (np.isfinite(lower) and np.isfinite(upper)):
        raise DomainError("finite limits required; use integrate_semi_infinite")
    if upper == lower:
        probe = np.asarray(f(np.array([lower])))
        return _scalarize(np.zeros(probe.shape[1:], dtype=probe.dtype))
    sign = 1.0
    if upper < lower:
        lower, upper, sign = upper, lower, -1.0
    inner = sorted(p for p in points if lower < p < upper)
    edges = [lower, *inner, upper]
    return _scalarize(sign * _adaptive(f, edges, spec, min_panels).sum(axis=0))


def _tail_map(decay):
    if not decay > 1.0:
        raise DomainError("tail decay exponent must exceed 1")
    return 1.0 / (decay - 1.0)


def _integrate_mapped(f: Integrand, edges, spec, decay, min_panels):
    """Per-segment integrals over [e0, e1], ..., [e_{m-2}, e_{m-1}], [e_{m-1}, inf).

    The tail uses t = A * w**(-p) with A = e_{m-1} and p = 1/(decay - 1); for an
    integrand decaying like t**(-decay) this leaves a bounded integrand in w.
    With the default decay 2 the map is exactly u = 1/t.
    """
    edges = np.asarray(edges, dtype=float)
    m = len(edges)
    p = _tail_map(decay)
    start = edges[-1]

    def mapped(s):
        k = np.minimum(np.floor(s).astype(int), m - 1)
        frac = s - k
        tail = k == m - 1
        kk = np.minimum(k, m - 2) if m > 1 else k
        if m > 1:
            lo = edges[kk]
            width = edges[kk + 1] - edges[kk]
            t_fin = lo + frac * width
        else:
            width = np.zeros_like(s)
            t_fin = np.zeros_like(s)
        w = 1.0 - frac
        with np.errstate(over="ignore", divide="ignore"):
            t_tail = start * w ** (-p)
            jac_tail = start * p * w ** (-p - 1.0)
        t = np.where(tail, t_tail, t_fin)
        jac = np.where(tail, jac_tail, width)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            vals = np.asarray(f(t))
            jac_b = jac.reshape(jac.shape + (1,) * (vals.ndim - 1))
            out = vals * jac_b
        # deep in the tail the jacobian overflows while f underflows
        bad = ~np.isfinite(jac_b) & np.ones(out.shape, dtype=bool)
        if np.any(bad):
            out = np.where(bad, 0.0, out)
        return out

    return _adaptive(mapped, np.arange(m + 1, dtype=float), spec, min_panels)


def integrate_semi_infinite(f: Integrand, lower: float, spec: QuadratureSpec = DEFAULT_SPEC,
                            *, decay: float = 2.0, min_panels: int = 1):
    """Integrate a batched integrand over [lower, inf).

    [lower, 1] (when lower < 1) is handled directly and [max(lower, 1), inf)
    through the substitution u = 1/t (generalised to a power map when `decay`
    says the integrand falls off like t**(-decay) with decay != 2).

    Raises NonConvergent if the tolerance is not met within
    `spec.max_subdivisions` panels.
    """
    if not (lower >= 0 and np.isfinite(lower)):
        raise DomainError("lower limit must be finite and >= 0")
    edges = [lower, 1.0] if lower < 1.0 else [lower]
    return _scalarize(_integrate_mapped(f, edges, spec, decay, min_panels).sum(axis=0))


def _check_kernel_args(chi, delta):
    if not (np.isfinite(chi) and chi > 0):
        raise DomainError(f"chi must be finite and > 0, got {chi}")
    if not (0.0 < delta < 1.0):
        raise DomainError(f"delta must lie in (0, 1), got {delta}")


def z_kernel_array(orders, chi: float, a, delta: float,
                   spec: QuadratureSpec = DEFAULT_SPEC, *, min_panels: int = 1):
    """Z_b(chi, a) for every order b in `orders` and every a in `a`.

    Returns an array of shape (len(a), len(orders)); float when all orders are
    real, complex otherwise.  The lower limits chi**-delta * a are sorted and the
    integrals between consecutive limits are accumulated from the right, so the
    whole table costs a single adaptive run.
    """
    _check_kernel_args(chi, delta)
    b = np.atleast_1d(np.asarray(orders))
    if np.iscomplexobj(b) and np.all(b.imag == 0):
        b = b.real
    b = b.astype(complex if np.iscomplexobj(b) else float)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if np.any(~np.isfinite(a)) or np.any(a < 1.0):
        raise DomainError("a must be finite and >= 1")
    out = np.zeros((len(a), len(b)), dtype=b.dtype)
    live = b != 0
    if not np.any(live):
        return out
    bl = b[live]
    inv_delta = 1.0 / delta
    scale = chi ** delta

    def integrand(t):
        with np.errstate(over="ignore", divide="ignore"):
            lg = np.log1p(t ** (-inv_delta))
        return -np.expm1(-lg[:, None] * bl[None, :])

    limits = a * chi ** (-delta)
    uniq, inverse = np.unique(limits, return_inverse=True)
    edges = list(uniq)
    if edges[-1] < 1.0:
        edges.append(1.0)
    panels = np.full(len(edges), max(int(min_panels), 1))
    freq = float(np.max(np.abs(bl.imag))) if np.iscomplexobj(bl) else 0.0
    if freq > 0:
        # exp(-i t w) with w = log(1 + u**(-1/delta)): seed about one panel per period
        with np.errstate(over="ignore", divide="ignore"):
            w = np.log1p(np.asarray(edges) ** (-inv_delta))
        spans = np.append(-np.diff(w), w[-1])
        panels = np.maximum(panels, np.ceil(freq * spans / (2 * np.pi)).astype(int))
    seg = _integrate_mapped(integrand, edges, spec, inv_delta, panels)
    # seg[k] = integral over [edges[k], edges[k+1]] (last entry: the tail)
    from_right = np.cumsum(seg[::-1], axis=0)[::-1]
    out[:, live] = scale * from_right[inverse]
    return out


def z_kernel(b, chi: float, a: float, delta: float, spec: QuadratureSpec = DEFAULT_SPEC):
    """Z_b(chi, a) = chi**delta * int_{chi**-delta * a}^inf [1 - (1 + t**(-1/delta))**(-b)] dt.

    Real for real b (positive for b > 0, negative for b < 0) and exactly zero
    for b = 0.
    """
    _check_kernel_args(chi, delta)
    if not a >= 1.0:
        raise DomainError(f"a must be >= 1, got {a}")
    if b == 0:
        return 0.0
    val = z_kernel_array([b], chi, [a], delta, spec)[0, 0]
    return complex(val) if np.iscomplexobj(val) else float(val)


def z_kernel_minus_one(chi: float, a: float, delta: float) -> float:
    """Closed form of Z at order b = -1: -(delta/(1-delta)) * chi * a**(1 - 1/delta)."""
    _check_kernel_args(chi, delta)
    return -(delta / (1.0 - delta)) * chi * a ** (1.0 - 1.0 / delta)


# -- regularized incomplete beta ------------------------------------------------

_FPMIN = 1e-300


def _beta_cf(x, p, q, eps=1e-16, max_iter=20000):
    # modified Lentz evaluation of the I_x continued fraction
    qab, qap, qam = p + q, p + 1.0, p - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (q - m) * x / ((qam + m2) * (p + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(p + m) * (qab + m) * x / ((p + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise NonConvergent(f"incomplete beta continued fraction stalled at x={x}, p={p}, q={q}")


def reg_inc_beta(x: float, p: float, q: float) -> float:
    """Regularized incomplete beta function I_x(p, q)."""
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if not (p > 0 and q > 0 and math.isfinite(p) and math.isfinite(q)):
        raise DomainError(f"shape parameters must be finite and > 0, got p={p}, q={q}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (p * math.log(x) + q * math.log1p(-x)
                 - (math.lgamma(p) + math.lgamma(q) - math.lgamma(p + q)))
    if x < (p + 1.0) / (p + q + 2.0):
        val = math.exp(log_front) * _beta_cf(x, p, q) / p
    else:
        val = 1.0 - math.exp(log_front) * _beta_cf(1.0 - x, q, p) / q
    return min(max(val, 0.0), 1.0)


def reg_inc_beta_array(x, p: float, q: float) -> np.ndarray:
    return np.array([reg_inc_beta(float(v), p, q) for v in np.atleast_1d(x)])


def complex_pow_principal(base: float, exponent: complex) -> complex:
    """base**exponent through the principal real logarithm of base > 0."""
    if not base > 0:
        raise DomainError(f"base must be > 0, got {base}")
    return cmath.exp(exponent * math.log(base))
