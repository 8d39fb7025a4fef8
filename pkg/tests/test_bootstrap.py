import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gic_feedback.bootstrap import (
    BootstrapParams,
    advance_moments,
    bootstrap_params,
    bootstrap_residuals,
    build_schedule,
    sgn,
)
from gic_feedback.exceptions import DomainError, InfeasibleError, ScheduleError
from gic_feedback.rate_theory import ChannelParams, best_fixed_point, rho_max

A_GRID = [0.1, 0.25, 0.5, 1.0, 2.0, 4.0]
P_GRID = [1.0, 10.0, 100.0, 1000.0]


def first_step_moments(P1, b1, beta1, a):
    """Second-step power and cross-moment from independent first-step symbols."""
    a = abs(a)
    beta2 = beta1 * beta1
    P2 = (P1 - 2 * b1 * P1 + b1 * b1 * (1 + P1 + a * a * P1)) / beta2
    cross = P1 * 2 * a * (b1 * b1 - b1) / beta2
    return P2, cross


def free_run(P1, rho1, coeffs, a):
    """Iterate the signed-correlation moment recursions without re-anchoring."""
    a = abs(a)
    P, rho = P1, rho1
    out = [(P, rho)]
    for b, beta in coeffs:
        r = abs(rho)
        s = 1.0 if rho >= 0 else -1.0
        D = 1 + P + a * a * P + 2 * a * r * P
        Pn = (P - 2 * b * P * (1 + a * r) + b * b * D) / (beta * beta)
        cross = s * P * (r - 2 * b * (r + a) + b * b * (r * (1 + a * a) + 2 * a)) / (beta * beta)
        P, rho = Pn, cross / Pn
        out.append((P, rho))
    return out


class TestSgn:
    def test_zero_is_positive(self):
        assert sgn(0.0) == 1.0 and sgn(-0.0) == 1.0

    def test_array(self):
        np.testing.assert_array_equal(sgn(np.array([-2.0, 0.0, 3.0])), [-1.0, 1.0, 1.0])


class TestBootstrapParams:
    def test_rho_zero(self):
        assert bootstrap_params(0.0, ChannelParams(0.5, 10.0)) == BootstrapParams(10.0, 0.0, 1.0)

    def test_example_half(self):
        bp = bootstrap_params(0.5, ChannelParams(1.0, 10.0))
        assert bp.P1 == pytest.approx(1 / 3, rel=1e-15)
        assert bp.b1 == pytest.approx(-1.0, rel=1e-15)
        assert bp.beta1 == pytest.approx(math.sqrt(8 / 30), rel=1e-15)

    def test_example_exact(self):
        # exact rational substitution of (1/3, -1, beta1^2 = 8/30)
        P1, b1, beta2, a = Fraction(1, 3), Fraction(-1), Fraction(8, 30), 1
        P2 = (P1 - 2 * b1 * P1 + b1 * b1 * (1 + P1 + a * a * P1)) / beta2
        cross = P1 * 2 * a * (b1 * b1 - b1) / beta2
        assert P2 == 10 and cross == 5

    def test_rho_equals_a(self):
        ch = ChannelParams(0.5, 10.0)
        bp = bootstrap_params(0.5, ch)
        assert bp.P1 == pytest.approx(8 / 3)
        assert bp.b1 < 0
        r_corr, r_pow = bootstrap_residuals(bp, 0.5, ch)
        assert abs(r_corr) < 1e-9 * 10 and abs(r_pow) < 1e-9 * 10

    def test_rho_equals_a_large(self):
        with pytest.raises(InfeasibleError):
            bootstrap_params(1.0, ChannelParams(1.0, 10.0))

    def test_infeasible(self):
        with pytest.raises(InfeasibleError):
            bootstrap_params(0.9, ChannelParams(1.0, 10.0))

    def test_degraded_channel(self):
        with pytest.raises(DomainError):
            bootstrap_params(0.1, ChannelParams(0.0, 10.0))

    def test_underflowing_rho(self):
        with pytest.raises(DomainError):
            bootstrap_params(1e-200, ChannelParams(1.0, 10.0))

    def test_tiny_rho(self):
        ch = ChannelParams(1.0, 10.0)
        bp = bootstrap_params(1e-100, ch)
        P2, cross = first_step_moments(bp.P1, bp.b1, bp.beta1, 1.0)
        assert P2 == pytest.approx(10.0, rel=1e-12)
        assert cross == pytest.approx(1e-99, rel=1e-12)

    @pytest.mark.parametrize("a", A_GRID)
    @pytest.mark.parametrize("P", P_GRID)
    def test_grid(self, a, P):
        ch = ChannelParams(a, P)
        for rho in np.linspace(0.0, rho_max(ch), 100):
            bp = bootstrap_params(float(rho), ch)
            P2, cross = first_step_moments(bp.P1, bp.b1, bp.beta1, a)
            tol = 1e-9 * max(1.0, P)
            assert abs(P2 - P) < tol
            assert abs(cross - P * rho) < tol
            assert bp.beta1 > 0
            if rho != 0:
                assert bp.b1 * bp.b1 - bp.b1 > 0

    @given(st.floats(0.05, 0.95), st.floats(1.0, 100.0))
    def test_rho_equals_a_property(self, a, P):
        ch = ChannelParams(a, P)
        if a > rho_max(ch):
            return
        bp = bootstrap_params(a, ch)
        assert bp.P1 == pytest.approx(2 / (1 - a * a))
        assert bp.b1 < 0
        P2, cross = first_step_moments(bp.P1, bp.b1, bp.beta1, a)
        assert P2 == pytest.approx(P, rel=1e-9) and cross == pytest.approx(P * a, rel=1e-9)


class TestAdvanceMoments:
    def test_steady_state(self):
        ch = ChannelParams(1.0, 10.0)
        sol = best_fixed_point(0.5, ch)
        P_next, rho_next = advance_moments(10.0, 0.5, sol.b, sol.beta, 1.0)
        assert P_next == pytest.approx(10.0, rel=1e-12)
        assert rho_next == pytest.approx(-0.5, abs=1e-12)

    def test_sign_of_a_irrelevant(self):
        assert advance_moments(3.0, -0.2, 0.4, 0.7, 0.8) == advance_moments(3.0, -0.2, 0.4, 0.7, -0.8)


class TestSchedule:
    def test_rho_zero(self):
        ch = ChannelParams(0.5, 10.0)
        s = build_schedule(0.0, ch, 10)
        assert s.beta_n[0] == 1.0
        np.testing.assert_array_equal(s.beta_n[1:], s.beta)
        np.testing.assert_array_equal(s.rho_n, 0.0)
        np.testing.assert_array_equal(s.power, 10.0)

    def test_example_half_free_run(self):
        ch = ChannelParams(1.0, 10.0)
        s = build_schedule(0.5, ch, 50)
        traj = free_run(s.P1, 0.0, zip(s.b_n, s.beta_n), 1.0)
        for n, (Pn, rhon) in enumerate(traj[1:], start=2):
            assert abs(Pn - 10.0) < 1e-9
            assert abs(abs(rhon) - 0.5) < 1e-9
            assert np.sign(rhon) == (-1) ** n

    def test_nominal_arrays(self):
        s = build_schedule(0.5, ChannelParams(1.0, 10.0), 20)
        assert s.rho_at(1) == 0.0 and s.power_at(1) == s.P1
        for n in range(2, 21):
            assert s.power_at(n) == 10.0
            assert s.rho_at(n) == (-1) ** n * 0.5
            assert s.b_at(n) == s.b and s.beta_at(n) == s.beta
        assert s.b_at(1) == s.b1 and s.beta_at(1) == s.beta1

    def test_average_power(self):
        s = build_schedule(0.5, ChannelParams(1.0, 10.0), 50)
        assert abs(s.average_power(50) - (1 / 3 + 49 * 10.0) / 50) < 1e-9
        assert s.average_power() == s.average_power(50)

    def test_recursion_fixed_point_at_horizon(self):
        ch = ChannelParams(2.0, 100.0)
        s = build_schedule(0.8, ch, 30)
        P_next, rho_next = advance_moments(s.power_at(30), s.rho_at(30), s.b, s.beta, ch.a)
        assert abs(P_next - 100.0) < 1e-9 * 100
        assert abs(rho_next - s.rho_at(29)) < 1e-9

    def test_log2_slope(self):
        s = build_schedule(0.5, ChannelParams(1.0, 10.0), 5)
        expected = math.log2(s.beta1) + 4 * math.log2(s.beta)
        assert s.log2_slope()[-1] == pytest.approx(expected, rel=1e-14)

    def test_immutable(self):
        s = build_schedule(0.5, ChannelParams(1.0, 10.0), 5)
        with pytest.raises(ValueError):
            s.b_n[0] = 0.0

    def test_accessor_range(self):
        s = build_schedule(0.5, ChannelParams(1.0, 10.0), 5)
        for n in (0, 6):
            with pytest.raises(ScheduleError):
                s.b_at(n)

    def test_short_horizon(self):
        with pytest.raises(ScheduleError):
            build_schedule(0.5, ChannelParams(1.0, 10.0), 1)

    def test_infeasible(self):
        with pytest.raises(InfeasibleError):
            build_schedule(0.95, ChannelParams(1.0, 10.0), 10)

    def test_long_free_run_stable(self):
        ch = ChannelParams(0.5, 10.0)
        s = build_schedule(0.6, ch, 200)
        Pn, rhon = free_run(s.P1, 0.0, zip(s.b_n, s.beta_n), ch.a)[-1]
        assert abs(Pn - 10.0) < 1e-6 * 10 and abs(abs(rhon) - 0.6) < 1e-6

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.05, 5.0), st.floats(0.5, 1000.0), st.floats(0.0, 1.0))
    def test_builds_anywhere_feasible(self, a, P, frac):
        ch = ChannelParams(a, P)
        rho = frac * rho_max(ch)
        assume(rho == 0 or rho > 1e-150)
        s = build_schedule(rho, ch, 40)
        assert np.all(s.beta_n > 0)
        assert s.average_power(40) == pytest.approx((s.P1 + 39 * P) / 40, rel=1e-12)
