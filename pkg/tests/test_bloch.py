import math
import warnings

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from mbloch import bloch
from mbloch.bloch import (DriveField, FourLevelState, ThreeLevelState, TwoLevelState,
                          adiabatic_expansion, integrate_four_level, integrate_three_level,
                          integrate_two_level, relaxation_response, steady_state_two_level)
from mbloch.params import FourLevelParams, MediumParams, ThreeLevelParams

TOL = 1e-10


def test_state_validation():
    with pytest.raises(ValueError):
        TwoLevelState(1.2)
    with pytest.raises(ValueError):
        TwoLevelState(0.0, 0.6j)
    with pytest.raises(ValueError):
        ThreeLevelState(0.5, 0.6, 0.0)
    with pytest.raises(ValueError):
        DriveField([1, 2], [0, 0])


def test_drive_interpolates():
    d = DriveField([0, 2j], [0.0, 1.0])
    assert d(0.25) == pytest.approx(0.5j)
    assert DriveField(1 + 1j)(3.0) == 1 + 1j


class TestTwoLevel:
    m = MediumParams(1.0, 0.4, d0=0.6, delta=0.7)

    def test_unperturbed_fixed_point(self):
        tr = integrate_two_level(TwoLevelState(0.6), 0j, self.m, 10.0, TOL)
        np.testing.assert_allclose(tr["d"], 0.6, atol=1e-14)

    def test_free_coherence_decay_and_rotation(self):
        s = 0.3 + 0.1j
        tr = integrate_two_level(TwoLevelState(0.6, s), 0j, self.m, 8.0, TOL)
        exact = s * np.exp(-(self.m.gamma_perp + 1j * self.m.delta) * tr.t)
        np.testing.assert_allclose(tr.complex("sigma12"), exact, atol=10 * TOL)

    def test_relaxes_to_d0(self):
        tr = integrate_two_level(TwoLevelState(-0.2), 0j, self.m, 10.0, TOL)
        exact = 0.6 + (-0.2 - 0.6) * np.exp(-0.4 * tr.t)
        np.testing.assert_allclose(tr["d"], exact, atol=10 * TOL)

    @pytest.mark.parametrize("seed", range(5))
    def test_long_time_limit_is_steady_state(self, seed):
        rng = np.random.default_rng(seed)
        gp = rng.uniform(0.5, 2.0)
        m = MediumParams(gp, rng.uniform(0.1, 2 * gp), d0=rng.uniform(-1, 1),
                         delta=rng.uniform(-2, 2))
        alpha = complex(*rng.uniform(-1, 1, 2))
        t_end = 20 / min(m.gamma_perp, m.gamma_par) * 2
        tr = integrate_two_level(TwoLevelState(m.d0), alpha, m, t_end, TOL, n_samples=2)
        d_s, s21 = steady_state_two_level(alpha, m)
        assert abs(tr.final[0] - d_s) < 10 * TOL
        assert abs(complex(tr.final[1], -tr.final[2]) - s21) < 10 * TOL

    def test_inversion_bounded(self):
        tr = integrate_two_level(TwoLevelState(0.9, 0.1), 2.0 + 1j, self.m, 30.0, TOL)
        assert np.max(np.abs(tr["d"])) <= max(0.9, 0.6) + TOL

    def test_time_dependent_drive_matches_scipy(self):
        times = np.linspace(0, 5, 51)
        values = 0.5 * np.sin(times) + 0.2j * np.cos(2 * times)
        drive = DriveField(values, times)
        tr = integrate_two_level(TwoLevelState(0.6), drive, self.m, 5.0, 1e-11)
        m = self.m

        def rhs(t, y):
            a = complex(drive(t))
            d, x, s = y
            return [m.gamma_par * (m.d0 - d) - 4 * (a.real * s + a.imag * x),
                    -m.gamma_perp * x + m.delta * s + a.imag * d,
                    -m.gamma_perp * s - m.delta * x + a.real * d]

        ref = solve_ivp(rhs, (0, 5), [0.6, 0, 0], t_eval=tr.t, rtol=1e-12, atol=1e-12,
                        method="DOP853", max_step=0.05)
        np.testing.assert_allclose(tr.y, ref.y.T, atol=1e-8)


class TestSteadyState:
    m = MediumParams(1.0, 0.5, d0=0.8)

    def test_unsaturated(self):
        assert steady_state_two_level(0j, self.m) == (0.8, 0j)

    def test_half_saturation(self):
        alpha = math.sqrt(self.m.saturation_intensity)
        assert steady_state_two_level(alpha, self.m)[0] == pytest.approx(0.4, rel=1e-15)

    def test_resonant_coherence(self):
        alpha = 0.3 + 0.2j
        m = self.m
        _, s = steady_state_two_level(alpha, m)
        expect = -1j * m.d0 * alpha * m.gamma_perp / (m.gamma_perp ** 2 + 4 * m.gamma_perp * abs(alpha) ** 2 / m.gamma_par)
        assert s == pytest.approx(expect, rel=1e-14)

    def test_saturation_monotone(self):
        d, _ = steady_state_two_level(np.linspace(0, 3, 50), self.m.with_(delta=0.3))
        assert np.all(np.diff(d) < 0)


class TestThreeLevel:
    def test_ground_state_without_pump(self):
        p = ThreeLevelParams(1.0, 0.5, 100.0, 1.0, 0.0)
        tr = integrate_three_level(ThreeLevelState(1, 0, 0), 0j, p, 0.0, 10.0, TOL)
        np.testing.assert_allclose(tr.y[-1], [1, 0, 0, 0, 0], atol=1e-14)

    def test_trace_and_inversion_limit(self, quiet):
        p = ThreeLevelParams(1.0, 0.3, 1e4 * 3.0, 1.0, 3.0)
        tr = integrate_three_level(ThreeLevelState(1, 0, 0), 0.3 + 0.1j, p, 0.2, 5.0, TOL)
        assert np.max(np.abs(bloch.trace(tr) - 1)) < 10 * TOL
        free = integrate_three_level(ThreeLevelState(1, 0, 0), 0j, p, 0.0, 30.0, TOL, n_samples=2)
        assert bloch.inversion(free)[-1] == pytest.approx(0.5, rel=1e-2)


class TestFourLevel:
    def test_ground_state_without_pump(self):
        p = FourLevelParams(100.0, 0.1, 1.0, 0.1, 0.1, 100.0, 1.0, 0.0)
        tr = integrate_four_level(FourLevelState(1, 0, 0, 0), 0j, p, 0.0, 10.0, TOL)
        np.testing.assert_allclose(tr.y[-1], [1, 0, 0, 0, 0, 0], atol=1e-14)

    def test_trace_and_inversion_limit(self, quiet):
        p = FourLevelParams(1e4 * 2, 0.4, 0.6, 0.1, 0.1, 1e4 * 2, 1.0, 2.0)
        tr = integrate_four_level(FourLevelState(1, 0, 0, 0), 0.2j, p, 0.5, 5.0, TOL)
        assert np.max(np.abs(bloch.trace(tr) - 1)) < 10 * TOL
        free = integrate_four_level(FourLevelState(1, 0, 0, 0), 0j, p, 0.0, 30.0, TOL, n_samples=2)
        assert free["rho22"][-1] == pytest.approx(2.0 / 3.0, rel=1e-2)


class TestRateEquations:
    def test_no_stimulated_term_when_balanced(self):
        m = MediumParams(1.0, 1.0, d0=0.0)
        np.testing.assert_allclose(bloch.rate_equations_step([0.5, 0.5], 3.0, m), 0.0)
        assert bloch.stimulated_rate(0j, 1.0) == 0.0

    def test_schemes_conserve_population(self):
        p3 = ThreeLevelParams(1.0, 0.3, 50.0, 1.0, 2.0)
        p4 = FourLevelParams(50, 0.2, 0.7, 0.1, 0.1, 50, 1.0, 2.0)
        assert sum(bloch.rate_equations_step([0.2, 0.5, 0.3], 0.7, p3)) == pytest.approx(0, abs=1e-14)
        assert sum(bloch.rate_equations_step([0.1, 0.2, 0.4, 0.3], 0.7, p4)) == pytest.approx(0, abs=1e-14)
        with pytest.raises(ValueError):
            bloch.rate_equations_step([0.5, 0.5], -1.0, MediumParams(1, 1))
        with pytest.raises(TypeError):
            bloch.rate_equations_step([0.5, 0.5], 1.0, object())

    def test_matches_bloch_in_adiabatic_limit(self):
        m = MediumParams(1000.0, 1.0, d0=0.7)
        alpha = 12.0 + 9.0j
        tr = integrate_two_level(TwoLevelState(0.7), alpha, m, 6.0, 1e-10, n_samples=61)
        rate = bloch.integrate_rate_equations([0.85, 0.15], alpha, m, 6.0, 1e-10,
                                              t_eval=tr.t)
        d_rate = rate["pop0"] - rate["pop1"]
        after = tr.t > 0.05
        np.testing.assert_allclose(tr["d"][after], d_rate[after], rtol=1e-2)


class TestAdiabatic:
    omega, gamma = 1.0, 100.0

    def exact(self, t):
        w, g = self.omega, self.gamma
        return (g * np.cos(w * t) + w * np.sin(w * t)) / (g * g + w * w)

    def test_constant_signal(self):
        t = np.linspace(0, 1, 11)
        for order in (0, 1, 2):
            np.testing.assert_allclose(adiabatic_expansion(t, np.full(11, 3.0), 4.0, order), 0.75)

    def test_orders_against_closed_form(self):
        t = np.linspace(10 / self.gamma, 20, 2001)
        g = lambda s: np.cos(self.omega * s)
        derivs = (lambda s: -self.omega * np.sin(self.omega * s),
                  lambda s: -self.omega ** 2 * np.cos(self.omega * s))
        ref = self.exact(t)
        err = [np.max(np.abs(adiabatic_expansion(t, g, self.gamma, k, derivs) - ref)) / np.max(np.abs(ref))
               for k in (0, 1, 2)]
        ratio = self.omega / self.gamma
        assert err[0] <= 2 * ratio
        assert err[0] / err[1] >= 1 / (2 * ratio)
        assert err[2] < err[1]

    def test_spline_derivatives(self):
        t = np.linspace(0, 20, 4001)
        a = adiabatic_expansion(t, np.cos(t), self.gamma, 1)
        b = adiabatic_expansion(t, np.cos(t), self.gamma, 1, (-np.sin(t), -np.cos(t)))
        assert np.max(np.abs(a - b)[100:-100]) < 1e-9

    def test_relaxation_response_is_exact_for_linear_drive(self):
        t = np.linspace(0, 2, 7)
        f = relaxation_response(t, 1 + 2 * t, 3.0, 0.5)
        exact = (1 + 2 * t) / 3 - 2 / 9 + (0.5 - 1 / 3 + 2 / 9) * np.exp(-3 * t)
        np.testing.assert_allclose(f, exact, rtol=1e-13)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            adiabatic_expansion([0, 1], [1, 1], 0.0, 0)
        with pytest.raises(ValueError):
            adiabatic_expansion([0, 1], [1, 1], 1.0, 3)
