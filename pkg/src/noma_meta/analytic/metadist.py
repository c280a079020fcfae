"""Meta-distribution curves: beta moment matching and Gil-Pelaez inversion."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import DegenerateDistribution, DomainError, NonConvergent
from ..specfun import QuadratureSpec, integrate, integrate_semi_infinite, reg_inc_beta

__all__ = [
    "CurveMethod",
    "MetaCurve",
    "BetaParams",
    "GP_SPEC",
    "beta_approx_params",
    "meta_ccdf_beta",
    "meta_ccdf_gilpelaez",
    "power_tail_integral",
]


class CurveMethod(enum.Enum):
    BETA = "beta"
    GIL_PELAEZ = "gil_pelaez"
    EMPIRICAL = "empirical"


@dataclass(frozen=True)
class MetaCurve:
    x_grid: np.ndarray
    ccdf: np.ndarray
    method: CurveMethod

    def __post_init__(self):
        if np.shape(self.x_grid) != np.shape(self.ccdf):
            raise DomainError("x_grid and ccdf must have the same shape")

    def sup_distance(self, other: "MetaCurve") -> float:
        if not np.array_equal(self.x_grid, other.x_grid):
            raise DomainError("curves live on different grids")
        return float(np.max(np.abs(self.ccdf - other.ccdf)))


@dataclass(frozen=True)
class BetaParams:
    mu1: float
    mu2: float

    def __post_init__(self):
        if not (self.mu1 > 0 and self.mu2 > 0):
            raise DegenerateDistribution(f"beta shapes must be > 0, got {self.mu1}, {self.mu2}")

    @property
    def mean(self) -> float:
        return self.mu1 / (self.mu1 + self.mu2)

    @property
    def variance(self) -> float:
        s = self.mu1 + self.mu2
        return self.mu1 * self.mu2 / (s * s * (s + 1.0))


def beta_approx_params(m1: float, m2: float) -> BetaParams:
    """Beta shapes matching a given mean m1 and second moment m2."""
    if not (0.0 < m1 < 1.0):
        raise DegenerateDistribution(f"mean must lie in (0, 1), got {m1}")
    if not (m1 * m1 < m2 < m1):
        raise DegenerateDistribution(f"need m1^2 < m2 < m1, got m1={m1}, m2={m2}")
    mu2 = (m1 - m2) * (1.0 - m1) / (m2 - m1 * m1)
    mu1 = m1 * mu2 / (1.0 - m1)
    return BetaParams(mu1, mu2)


def meta_ccdf_beta(x_grid, bp: BetaParams) -> MetaCurve:
    """CCDF 1 - I_x(mu1, mu2) of the fitted beta law."""
    x = np.asarray(x_grid, dtype=float)
    # 1 - I_x(a, b) = I_{1-x}(b, a) avoids cancellation near x = 1
    ccdf = np.array([reg_inc_beta(1.0 - v, bp.mu2, bp.mu1) for v in x.ravel()]).reshape(x.shape)
    return MetaCurve(x, ccdf, CurveMethod.BETA)


GP_SPEC = QuadratureSpec(relative_tolerance=1e-8, absolute_tolerance=1e-8, max_subdivisions=20000)

MomentFunction = Callable[[np.ndarray], np.ndarray]


def power_tail_integral(omega, start: float, power: float,
                        spec: QuadratureSpec = QuadratureSpec(1e-10, 1e-14, 2000)):
    """J(omega) = int_start^inf t**(-1-power) * exp(-1j*omega*t) dt, vectorized over omega.

    For omega != 0 the path is rotated into the half plane where the phase
    decays (t = start - 1j*sign(omega)*s), which leaves a smooth,
    non-oscillatory integrand.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.empty(omega.shape, dtype=complex)
    zero = omega == 0
    out[zero] = start ** (-power) / power
    nz = ~zero
    if np.any(nz):
        w = omega[nz]
        sgn = np.sign(w)
        absw = np.abs(w)

        def f(s):
            z = start - 1j * sgn[None, :] * s[:, None]
            return z ** (-1.0 - power) * np.exp(-absw[None, :] * s[:, None])

        val = np.atleast_1d(integrate_semi_infinite(f, 0.0, spec, decay=1.0 + power))
        out[nz] = -1j * sgn * np.exp(-1j * w * start) * val
    return out


def _octave_panels(t0, t1, omega_max):
    return max(2, int(math.ceil((t1 - t0) * (omega_max + 1.0) / math.pi)))


PHASE_STEP = 0.5
FIT_WINDOW = 256.0


def _tail_estimate(moment_fn, omega, end):
    """int_end^inf Im(exp(-1j t omega) M_{jt}) / t dt under M_{jt} ~ A t^-p exp(1j kappa t).

    A support endpoint p_max < 1 makes the moments rotate with
    kappa = ln p_max.  p and kappa are least-squares fits of log|M| against
    log t and of the unwrapped phase against t over the last stretch of the
    integrated range; sampling every PHASE_STEP resolves any p_max above
    exp(-pi / PHASE_STEP).
    """
    width = min(0.5 * end, FIT_WINDOW)
    t = np.linspace(end - width, end, int(round(width / PHASE_STEP)) + 1)
    m = np.asarray(moment_fn(1j * t), dtype=complex)
    if np.any(m == 0):
        return np.zeros_like(omega)
    kappa = np.polyfit(t, np.unwrap(np.angle(m)), 1)[0]
    power = -np.polyfit(np.log(t), np.log(np.abs(m)), 1)[0]
    power = min(max(power, 0.05), 4.0)
    scale = m[-1] * end ** power * np.exp(-1j * kappa * end)
    return (scale * power_tail_integral(omega - kappa, end, power)).imag


def meta_ccdf_gilpelaez(x_grid, moment_fn: MomentFunction, truncation: float = 1024.0,
                        spec: QuadratureSpec = GP_SPEC, *, octave_tolerance: float = 1e-6,
                        tail_tolerance: float = 1e-2, t_min: float = 1e-10) -> MetaCurve:
    """Invert imaginary-order moments into the CCDF P[p > x].

    F(x) = 1/2 + (1/pi) int_0^inf Im(exp(-1j t ln x) M_{jt}) / t dt.

    `moment_fn` maps an array of complex orders to an array of moments.  The
    range (0, 1] is integrated in s = ln t; beyond that, octaves [T, 2T] are
    added until one contributes less than `octave_tolerance` or T reaches
    `truncation`.  The remainder is extrapolated from a fit
    M_{jt} ~ A t**-p exp(1j kappa t) to the last stretch of the integrated
    range and integrated exactly; if it still exceeds `tail_tolerance`
    somewhere on the grid the inversion is reported as NonConvergent.
    """
    x = np.asarray(x_grid, dtype=float)
    flat = x.ravel()
    if np.any((flat < 0) | (flat > 1)):
        raise DomainError("reliability levels must lie in [0, 1]")
    out = np.where(flat <= 0.0, 1.0, 0.0)
    interior = (flat > 0.0) & (flat < 1.0)
    if not np.any(interior):
        return MetaCurve(x, out.reshape(x.shape), CurveMethod.GIL_PELAEZ)
    omega = np.log(flat[interior])
    omega_max = float(np.max(np.abs(omega)))

    def g(t):
        m = np.asarray(moment_fn(1j * t), dtype=complex)
        phase = np.exp(-1j * np.outer(t, omega))
        return (phase * m[:, None]).imag / t[:, None]

    def g_log(s):
        t = np.exp(s)
        return g(t) * t[:, None]

    total = np.atleast_1d(integrate(g_log, math.log(t_min), 0.0, spec, min_panels=8))
    lo = 1.0
    while lo < truncation:
        hi = min(2.0 * lo, truncation)
        part = np.atleast_1d(integrate(g, lo, hi, spec, min_panels=_octave_panels(lo, hi, omega_max)))
        total = total + part
        lo = hi
        if np.max(np.abs(part)) < octave_tolerance:
            break
    end = lo
    tail = _tail_estimate(moment_fn, omega, end)
    if np.max(np.abs(tail)) / math.pi > tail_tolerance:
        raise NonConvergent(
            f"Gil-Pelaez tail {np.max(np.abs(tail)) / math.pi:.3g} above {tail_tolerance} at T={end}"
        )
    vals = 0.5 + (total + tail) / math.pi
    # rounding noise just outside [0, 1] is clipped; anything larger is kept visible
    vals = np.where((vals < 0) & (vals > -1e-6), 0.0, vals)
    vals = np.where((vals > 1) & (vals < 1 + 1e-6), 1.0, vals)
    out[interior] = vals
    return MetaCurve(x, out.reshape(x.shape), CurveMethod.GIL_PELAEZ)
