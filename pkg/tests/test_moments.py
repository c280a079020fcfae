import math
from concurrent.futures import ThreadPoolExecutor

import mpmath
import numpy as np
import pytest

from noma_meta.analytic import (
    MomentResult,
    Scheme,
    cc_moments,
    ce_moments,
    moment,
    moment_cc_noma,
    moment_ce_bounds,
    moment_ce_bounds_oma,
    moment_ce_noma,
    moment_oma,
)
from noma_meta.errors import DomainError, InfeasiblePowerSplit
from noma_meta.model import NetworkParams, NomaConfig, UserClass, chi_c, chi_e

P = NetworkParams()
CFG = NomaConfig.from_db(0.25, 3, -3)
THETAS = (0.05, 0.15, 0.25, 0.35)


def cc_m1_alpha4(chi, tau):
    mpmath.mp.dps = 30
    s = mpmath.sqrt(chi)
    return float(1 / (1 + tau ** 2 * s * (mpmath.pi / 2 - mpmath.atan(tau ** -2 / s))))


def ce_m1_alpha4(chi, tau):
    # outer integral over v with the b = 1, delta = 1/2 arctan form of Z(chi, 1/v)
    mpmath.mp.dps = 20
    s = mpmath.sqrt(chi)

    def f(v):
        z = s * (mpmath.pi / 2 - mpmath.atan(1 / (v * s)))
        return 1 / (1 + v * v * chi) / (1 + v * z) ** 2

    return float(mpmath.quad(f, [tau ** 2, 1]) / (1 - tau ** 2))


def ce_moment_mpmath(b, chi, tau, delta):
    # fully independent nested quadrature for a general real order
    mpmath.mp.dps = 15

    def z(a):
        lo = chi ** -delta * a
        g = lambda t: 1 - (1 + t ** (-1 / delta)) ** (-b)
        return chi ** delta * mpmath.quad(g, [lo, 4 * lo, mpmath.inf])

    f = lambda v: (1 + v ** (1 / delta) * chi) ** (-b) / (1 + v * z(1 / v)) ** 2
    return float(mpmath.quad(f, [tau ** 2, 1]) / (1 - tau ** 2))


class TestCC:
    def test_order_zero(self):
        assert moment_cc_noma(0, CFG, P).value == 1.0

    def test_classic_coverage(self):
        params = NetworkParams(tau=1 - 1e-9)
        m = float(cc_moments([1.0], 1.0, params)[0])
        assert m == pytest.approx(1 / (1 + math.pi / 4), abs=1e-6)

    @pytest.mark.parametrize("theta", THETAS)
    def test_alpha4_closed_form(self, theta):
        cfg = NomaConfig.from_db(theta, 3, -3)
        got = moment_cc_noma(1, cfg, P)
        assert isinstance(got, MomentResult) and got.user_class is UserClass.CC
        assert float(got) == pytest.approx(cc_m1_alpha4(chi_c(cfg), 0.7), rel=1e-9)

    def test_infeasible(self):
        with pytest.raises(InfeasiblePowerSplit):
            moment_cc_noma(1, NomaConfig(0.7, 1.0, 0.5), P)

    def test_minus_one_divergence(self):
        # delta/(1-delta) chi tau^alpha >= 1 at chi = 1/tau^4
        assert cc_moments([-1.0], 1.0 / 0.7 ** 4 * 1.001, P)[0] == math.inf
        assert math.isfinite(cc_moments([-1.0], 1.0 / 0.7 ** 4 * 0.999, P)[0])


class TestCE:
    def test_order_zero(self):
        assert moment_ce_noma(0, CFG, P).value == 1.0

    @pytest.mark.parametrize("theta", THETAS)
    def test_alpha4_oracle(self, theta):
        cfg = NomaConfig.from_db(theta, 3, -3)
        assert float(moment_ce_noma(1, cfg, P)) == pytest.approx(ce_m1_alpha4(chi_e(cfg), 0.7), rel=1e-7)

    @pytest.mark.parametrize("b,alpha", [(2.0, 4.0), (-1.0, 4.0), (1.5, 3.0), (1.0, 5.0)])
    def test_general_oracle(self, b, alpha):
        params = NetworkParams(alpha=alpha)
        chi = 0.6
        want = ce_moment_mpmath(b, chi, 0.7, params.delta)
        assert float(np.real(ce_moments([b], chi, params)[0])) == pytest.approx(want, rel=1e-6)

    def test_decreasing_in_theta(self):
        th = np.linspace(0.02, 0.6, 12)
        m = [float(moment_ce_noma(1, NomaConfig.from_db(t, 3, -3), P)) for t in th]
        assert np.all(np.diff(m) < 0)

    def test_minus_one_divergence(self):
        # 1 + Z_{-1}(chi, 1) = 1 - chi at delta = 1/2
        assert ce_moments([-1.0], 1.05, P)[0] == math.inf
        assert math.isfinite(ce_moments([-1.0], 0.95, P)[0])

    def test_complex_orders(self):
        t = np.array([0.5, 3.0, 20.0])
        plus = ce_moments(1j * t, 0.8, P)
        minus = ce_moments(-1j * t, 0.8, P)
        np.testing.assert_allclose(minus, np.conj(plus), rtol=1e-9)
        assert np.all(np.abs(plus) <= 1 + 1e-12)

    def test_batching_does_not_change_values(self):
        orders = 1j * np.linspace(0.1, 60, 97)
        batched = ce_moments(orders, 0.8, P)
        single = np.array([ce_moments([b], 0.8, P)[0] for b in orders[::12]])
        np.testing.assert_allclose(batched[::12], single, rtol=1e-7, atol=1e-10)


class TestBounds:
    @pytest.mark.parametrize("b", [-1.0, 1.0, 2.0])
    @pytest.mark.parametrize("theta", [0.05, 0.25, 0.4])
    @pytest.mark.parametrize("tau", [0.5, 0.7, 0.9])
    def test_sandwich(self, b, theta, tau):
        params = NetworkParams(tau=tau)
        cfg = NomaConfig.from_db(theta, 3, -3)
        lo, hi = moment_ce_bounds(b, cfg, params)
        exact = float(np.real(ce_moments([b], chi_e(cfg), params)[0]))
        assert lo <= exact <= hi

    def test_ordering_swaps_for_negative_orders(self):
        lo, hi = moment_ce_bounds(-1.0, NomaConfig.from_db(0.05, 3, -3), P)
        assert lo < hi

    def test_collapse_as_tau_to_one(self):
        gaps = []
        for tau in (0.9, 0.99, 0.999):
            lo, hi = moment_ce_bounds(1.0, CFG, NetworkParams(tau=tau))
            exact = float(ce_moments([1.0], chi_e(CFG), NetworkParams(tau=tau))[0])
            assert lo <= exact <= hi
            gaps.append(hi - lo)
        assert gaps[2] < 1e-3 and gaps[0] > gaps[1] > gaps[2]

    @pytest.mark.parametrize("b", [0, 1j])
    def test_rejects_zero_and_complex(self, b):
        with pytest.raises(DomainError):
            moment_ce_bounds(b, CFG, P)

    def test_oma_bounds(self):
        lo, hi = moment_ce_bounds_oma(1.0, CFG.beta_e, P)
        exact = float(moment_oma(1, UserClass.CE, CFG.beta_e, P))
        assert lo <= exact <= hi


class TestOMA:
    def test_cc_identical_bits(self):
        a = moment_oma(1, UserClass.CC, 2.0, P).value
        b = cc_moments([1.0], 2.0, P)[0]
        assert a == b

    def test_ce_is_theta_to_zero_limit(self):
        be = 0.5
        oma = float(moment_oma(1, UserClass.CE, be, P))
        noma = float(moment_ce_noma(1, NomaConfig(1e-9, 2.0, be), P))
        assert noma == pytest.approx(oma, abs=1e-6)

    def test_order_zero(self):
        assert moment_oma(0, UserClass.CC, 2.0, P).value == 1.0

    def test_dispatch(self):
        assert moment(1, UserClass.CE, Scheme.OMA, CFG, P).value == moment_oma(1, UserClass.CE, CFG.beta_e, P).value
        assert moment(1, UserClass.CC, Scheme.NOMA, CFG, P).value == moment_cc_noma(1, CFG, P).value
        assert moment(2, UserClass.CE, Scheme.NOMA, CFG, P).scheme is Scheme.NOMA

    def test_rejects_nonpositive_beta(self):
        with pytest.raises(DomainError):
            moment_oma(1, UserClass.CC, 0.0, P)


def _all_moments(orders, cfg, params):
    return {
        ("cc", "noma"): np.real(cc_moments(orders, chi_c(cfg), params)),
        ("ce", "noma"): np.real(ce_moments(orders, chi_e(cfg), params)),
        ("cc", "oma"): np.real(cc_moments(orders, cfg.beta_c, params)),
        ("ce", "oma"): np.real(ce_moments(orders, cfg.beta_e, params)),
    }


class TestInvariants:
    @pytest.mark.parametrize("theta", THETAS)
    def test_moment_ordering(self, theta):
        for m in _all_moments([0.5, 1.0, 2.0, 3.0], NomaConfig.from_db(theta, 3, -3), P).values():
            assert np.all(np.diff(m) <= 0) and m[0] <= 1

    @pytest.mark.parametrize("theta", [0.02, 0.1, 0.2, 0.3, 0.4, 0.6])
    @pytest.mark.parametrize("tau", [0.3, 0.7, 0.95])
    def test_variance_nonnegative(self, theta, tau):
        for m in _all_moments([1.0, 2.0], NomaConfig.from_db(theta, 3, -3), NetworkParams(tau=tau)).values():
            assert m[1] - m[0] ** 2 >= 0

    def test_lambda_invariance(self):
        ref = _all_moments([1.0, 2.0, -1.0], CFG, NetworkParams(lambda_b=1.0))
        for lam in (0.1, 10.0):
            other = _all_moments([1.0, 2.0, -1.0], CFG, NetworkParams(lambda_b=lam))
            for k in ref:
                np.testing.assert_allclose(other[k], ref[k], rtol=1e-12, atol=0)

    def test_tau_monotone(self):
        taus = np.linspace(0.3, 0.95, 8)
        cc = [float(cc_moments([1.0], chi_c(CFG), NetworkParams(tau=t))[0]) for t in taus]
        ce = [float(ce_moments([1.0], chi_e(CFG), NetworkParams(tau=t))[0]) for t in taus]
        assert np.all(np.diff(cc) <= 0) and np.all(np.diff(ce) <= 0)

    def test_cc_increasing_on_beta_c_branch(self):
        th = np.linspace(0.03, 0.5, 12)
        cfgs = [NomaConfig.from_db(t, 3, -3) for t in th]
        assert all(c.beta_c / c.theta >= chi_e(c) for c in cfgs)
        m = [float(moment_cc_noma(1, c, P)) for c in cfgs]
        assert np.all(np.diff(m) > 0)

    def test_thread_reproducible(self):
        orders = 1j * np.linspace(0.1, 30, 40)
        ref = ce_moments(orders, 0.8, P)
        with ThreadPoolExecutor(4) as pool:
            outs = list(pool.map(lambda _: ce_moments(orders, 0.8, P), range(4)))
        for o in outs:
            assert np.array_equal(o, ref)
