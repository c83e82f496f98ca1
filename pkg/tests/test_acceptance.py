"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""
import math
import time
import warnings

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from mbloch import amplifier, bloch, lorenz, multimode, ring
from mbloch.bloch import FourLevelState, ThreeLevelState
from mbloch.lorenz import ComplexModeState, LorenzState, SingleModeParams
from mbloch.multimode import FieldOnRing
from mbloch.params import (CavityParams, FourLevelParams, MediumParams, ThreeLevelParams,
                           four_level_d0, map_four_level, map_three_level, three_level_d0)


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})")
        assert ok, detail
    return emit


def test_c01_amplifier_methods_agree(report):
    c, z = 1.0, np.linspace(0.0, 4.0, 21)
    warm = MediumParams(1.0, 1.0, 1.0, 0.5)
    amplifier.propagate_exact(0.1, warm, c, 1.0, 3)
    amplifier.solve_implicit(0.1, warm, c, z)

    worst = 0.0
    start = time.perf_counter()
    for d0 in np.linspace(-0.9, 0.9, 5):
        for Delta in np.linspace(0.0, 2.0, 5):
            m = MediumParams(1.0, 1.0, 1.0, d0, Delta)
            for frac in np.logspace(-6, 2, 5):
                a0 = math.sqrt(frac * m.saturation_intensity)
                exact = np.sqrt(amplifier.propagate_exact(a0, m, c, z[-1], len(z)).amp2)
                implicit = amplifier.solve_implicit(a0, m, c, z)
                worst = max(worst, float(np.max(np.abs(exact / implicit - 1))))
    elapsed = time.perf_counter() - start
    report(1, "propagation vs implicit law on 5x5x5 grid", worst < 1e-8 and elapsed < 10.0,
           f"max rel err {worst:.2e}, {elapsed:.2f} s")


def test_c02_asymptotes(report):
    m = MediumParams(1.0, 1.0, 0.5, 1.0)
    isat = m.saturation_intensity
    a = m.small_signal_gain(1.0)

    res = amplifier.propagate_exact(0.005, m, 1.0, 20.0, 2001)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        weak = np.abs(amplifier.weak_field(0.005, m, 1.0, res.z_grid)) ** 2
    low = res.amp2 < 1e-2 * isat
    dev = float(np.max(np.abs(res.amp2[low] / weak[low] - 1)))

    # well inside the strong regime: compare the local slope with the asymptote
    hi = amplifier.propagate_exact(math.sqrt(1.001e3 * isat), m, 1.0, 10.0, 10001)
    slope = np.gradient(hi.amp2, hi.z_grid, edge_order=2)
    target = isat * a
    sdev = float(np.max(np.abs(slope / target - 1)))
    ok = low.sum() > 10 and dev < 1e-2 and np.all(hi.amp2 > 1e3 * isat) and sdev < 1e-3
    report(2, "weak-field and strong-field asymptotes", ok,
           f"weak dev {dev:.2e} over {low.sum()} pts, slope dev {sdev:.2e}")


def test_c03_threshold_and_output_line(report, rng):
    worst_zero, worst_slope, worst_profile = 0.0, 0.0, 0.0
    for _ in range(100):
        gp = rng.uniform(0.2, 5)
        m = MediumParams(gp, rng.uniform(0.1, 2 * gp))
        R2 = rng.uniform(0.01, 0.99)
        cav = CavityParams.from_power_reflectivity(R2, 1.0, rng.uniform(1.0, 3.0))
        Delta = rng.uniform(0, 2)
        on = 1 + Delta ** 2
        worst_zero = max(worst_zero, ring.exit_intensity(on, Delta, m, cav))
        r1, r2 = on + rng.uniform(0.1, 2), on + rng.uniform(2.5, 6)
        i1, i2 = ring.exit_intensity(r1, Delta, m, cav), ring.exit_intensity(r2, Delta, m, cav)
        expect = m.gamma_par * m.gamma_perp / 4 * abs(math.log(R2)) / (1 - R2)
        worst_slope = max(worst_slope, abs((i2 - i1) / (r2 - r1) / expect - 1))
        # the returned intensity is a fixed point of one pass through the gain medium
        _, prof = ring.intensity_profile(r2, Delta, m, cav, 3)
        worst_profile = max(worst_profile, abs(prof[-1] / i2 - 1))
    ok = worst_zero <= 1e-12 and worst_slope <= 1e-12 and worst_profile <= 1e-12
    report(3, "zero at r_on, linear above with the loss-ratio slope", ok,
           f"|I(r_on)| {worst_zero:.1e}, slope {worst_slope:.1e}, round trip {worst_profile:.1e}")


def test_c04_uniform_field_flattening(report):
    m = MediumParams(1.0, 1.0)
    isat = m.saturation_intensity
    ratios, endpoint = [], None
    for R2 in (0.2, 0.5, 0.9, 1 - 1e-6):
        cav = CavityParams.from_power_reflectivity(R2, 1.0, 2.0)
        _, prof = ring.intensity_profile(1.5, 0.0, m, cav, 201)
        ratios.append(abs(prof[0] / prof[-1] / R2 - 1))
        endpoint = prof[-1]
    ufl = isat * (1.5 - 1)
    rel = abs(endpoint / ufl - 1)
    ok = max(ratios) < 1e-12 and rel < 1e-5
    report(4, "entry/exit ratio and uniform-field endpoint", ok,
           f"ratio err {max(ratios):.1e}, endpoint rel {rel:.1e}")


def test_c05_pulling(report, rng):
    convex = True
    for _ in range(100):
        k, g = rng.uniform(1e-3, 1e3, 2)
        wc, wa = rng.uniform(-5, 5, 2)
        w = ring.pulled_frequency(k, g, wc, wa)
        lam = (w - wa) / (wc - wa)
        convex &= -1e-12 <= lam <= 1 + 1e-12 and abs(lam - g / (k + g)) < 1e-12
    wc, wa = 0.7, -0.4
    gap = abs(wc - wa)
    good = abs(ring.pulled_frequency(1e-6, 1.0, wc, wa) - wc) / gap
    bad = abs(ring.pulled_frequency(1e6, 1.0, wc, wa) - wa) / gap
    ok = convex and good < 1e-5 and bad < 1e-5
    report(5, "frequency pulling", ok, f"good-cavity {good:.1e}, bad-cavity {bad:.1e} of the gap")


def test_c06_hopf(report, rng):
    exact = lorenz.hopf_threshold(SingleModeParams(3.0, 1.0, 0.0, 20.0)).r_hb == 9.0
    worst, crossings = 0.0, True
    for _ in range(50):
        gp = rng.uniform(0.5, 2.0)
        gl = gp * rng.uniform(0.0, 3.0)
        kappa = (gp + gl) * rng.uniform(1.3, 6.0)
        r_hb = lorenz.hopf_threshold(SingleModeParams(kappa, gp, gl, 2.0)).r_hb
        p = SingleModeParams(kappa, gp, gl, r_hb)
        fp = lorenz.fixed_points(p)[1]
        lam = np.linalg.eigvals(lorenz.jacobian(p, fp))
        worst = max(worst, abs(lam.real.max()) / gp)
        lib = lorenz.jacobian_stability(p, fp, margin=1e-6)
        below, above = (lorenz.jacobian_stability(q, lorenz.fixed_points(q)[1])
                        for q in (p.with_(r=r_hb * 0.99), p.with_(r=r_hb * 1.01)))
        crossings &= (lib.verdict == "marginal" and below.verdict == "stable"
                      and above.verdict == "unstable")
    ok = exact and worst < 1e-6 and crossings
    report(6, "Hopf threshold", ok, f"r_HB(0, 3) == 9: {exact}, max |Re lambda| {worst:.1e}")


def _lorenz_benettin_scipy(sigma, b, r, tau_transient, tau_avg, interval=1.0):
    def rhs(t, s):
        x, y, z = s[:3]
        J = np.array([[-sigma, sigma, 0.0], [r - z, -1.0, -x], [y, x, -b]])
        return np.concatenate(([sigma * (y - x), x * (r - z) - y, x * y - b * z], J @ s[3:]))

    s = np.array([1.0, 1.0, 20.0, 1.0, 0.0, 0.0])
    total, n_avg = 0.0, int(tau_avg / interval)
    for i in range(int(tau_transient / interval) + n_avg):
        s = solve_ivp(rhs, (0.0, interval), s, method="DOP853", rtol=1e-10, atol=1e-10).y[:, -1]
        norm = np.linalg.norm(s[3:])
        s[3:] /= norm
        if i >= int(tau_transient / interval):
            total += math.log(norm)
    return total / (n_avg * interval)


def test_c07_lorenz_correspondence(report):
    p = SingleModeParams(10.0, 1.0, 8 / 3, 28.0)
    sigma, b, r = lorenz.to_lorenz_coordinates(p)
    lam = lorenz.lyapunov_max(p, LorenzState(1.0, 1.0, 1.0), t_total=5000.0, t_transient=200.0)
    oracle = _lorenz_benettin_scipy(sigma, b, r, 100.0, 1500.0)
    r_hb = lorenz.hopf_threshold(p).r_hb
    ok = (abs(lam - 0.906) <= 0.05 and abs(oracle - 0.906) <= 0.05 and abs(lam - oracle) <= 0.05
          and math.isclose(r_hb, 470 / 19, rel_tol=1e-15) and r_hb < 28)
    report(7, "largest Lyapunov exponent at sigma=10, b=8/3, r=28", ok,
           f"lambda {lam:.4f}, scipy oracle {oracle:.4f}, r_HB {r_hb:.6f}")


def test_c08_phase_decoupling(report):
    # The imaginary polarisation quadrature obeys d(P_im E)/dt = -(kappa + gamma_perp) P_im E,
    # so P_im(t) = P_im(0) E(0)/E(t) exp(-(kappa + gamma_perp) t).
    p = SingleModeParams(4.0, 1.0, 0.5, 3.0)
    t_end = 10 / (p.kappa + p.gamma_perp)
    tr = lorenz.integrate_complex(ComplexModeState(0.3 + 0.4j, 0.1 - 0.5j, 1.2), p, t_end, 1e-12,
                                  n_samples=201)
    E, _, Pim = lorenz.phase_quadratures(tr)
    decay = np.exp(-(p.kappa + p.gamma_perp) * tr.t)
    rel = float(np.max(np.abs(Pim / (Pim[0] * E[0] / E * decay) - 1)))
    report(8, "resonant phase decoupling", rel < 1e-6, f"max rel err {rel:.1e}")


@pytest.mark.xfail(strict=True, reason="E(t)/E(0) in place of E(0)/E(t) is not a solution")
def test_c08_literal_ratio_orientation_fails():
    p = SingleModeParams(4.0, 1.0, 0.5, 3.0)
    tr = lorenz.integrate_complex(ComplexModeState(0.3 + 0.4j, 0.1 - 0.5j, 1.2), p,
                                  10 / (p.kappa + p.gamma_perp), 1e-12, n_samples=201)
    E, _, Pim = lorenz.phase_quadratures(tr)
    decay = np.exp(-(p.kappa + p.gamma_perp) * tr.t)
    np.testing.assert_allclose(Pim, Pim[0] * (E / E[0]) * decay, rtol=1e-6)


def test_c09_level_reductions(report):
    worst3, worst4 = 0.0, 0.0
    scale3 = np.max(np.abs(three_level_d0(np.array([0.1, 10.0]))))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for R in np.logspace(-1, 1, 9):
            big = 1e4 * max(1.0, R)
            t_end = 60.0 / (R + 1.0)
            p3 = ThreeLevelParams(1.0, 0.0, big, 1.0, R)
            p4 = FourLevelParams(big, 0.0, 1.0, 0.0, 0.0, big, 1.0, R)
            d3 = bloch.inversion(bloch.integrate_three_level(ThreeLevelState(1, 0, 0), 0j, p3, 0.0, t_end,
                                                             1e-11, n_samples=2))[-1]
            d4 = bloch.inversion(bloch.integrate_four_level(FourLevelState(1, 0, 0, 0), 0j, p4, 0.0, t_end,
                                                            1e-11, n_samples=2))[-1]
            m3, m4 = map_three_level(p3).d0, map_four_level(p4).d0
            assert m3 == pytest.approx(three_level_d0(R)) and m4 == pytest.approx(four_level_d0(R))
            # the three-level d0 crosses zero at R = gamma, where only an absolute scale is meaningful
            worst3 = max(worst3, abs(d3 - m3) / max(abs(m3), scale3) if abs(m3) < 1e-12 else abs(d3 / m3 - 1))
            worst4 = max(worst4, abs(d4 / m4 - 1))
    ok = worst3 < 1e-2 and worst4 < 1e-2
    report(9, "three-/four-level inversions vs mapped d0", ok,
           f"three-level {worst3:.1e}, four-level {worst4:.1e}")


def test_c10_adiabatic_elimination(report):
    gamma, omega = 100.0, 1.0
    t = np.linspace(10 / gamma, 20.0, 4001)
    exact = (gamma * np.cos(omega * t) + omega * np.sin(omega * t)) / (gamma ** 2 + omega ** 2)
    ode = bloch.relaxation_response(np.linspace(0, 20.0, 400001), lambda s: np.cos(omega * s), gamma)
    assert np.allclose(ode[-1], exact[-1], atol=1e-9)
    derivs = (lambda s: -omega * np.sin(omega * s), lambda s: -omega ** 2 * np.cos(omega * s))
    scale = np.max(np.abs(exact))
    err = [np.max(np.abs(bloch.adiabatic_expansion(t, lambda s: np.cos(omega * s), gamma, k, derivs)
                         - exact)) / scale for k in (0, 1)]
    ok = err[0] <= 2e-2 and err[0] / err[1] >= 25
    report(10, "adiabatic expansion at gamma/omega = 100", ok,
           f"order 0 {err[0]:.2e}, order 1 {err[1]:.2e}, gain {err[0] / err[1]:.0f}x")


def test_c11_conservation(report):
    t_end = 1e3
    p3 = ThreeLevelParams(1.0, 0.3, 10.0, 1.0, 2.0)
    p4 = FourLevelParams(10.0, 0.2, 0.7, 0.1, 0.1, 10.0, 1.0, 2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tr3 = bloch.integrate_three_level(ThreeLevelState(1, 0, 0), 0.4 + 0.2j, p3, 0.3, t_end, 1e-10)
        tr4 = bloch.integrate_four_level(FourLevelState(1, 0, 0, 0), 0.3j, p4, 0.2, t_end, 1e-10)
    trace_err = max(np.max(np.abs(bloch.trace(tr3) - 1)), np.max(np.abs(bloch.trace(tr4) - 1)))

    cav = CavityParams.from_power_reflectivity(0.5, 1.0, 2.0)
    F0 = FieldOnRing.from_function(
        lambda z: np.exp(2j * np.pi * z) + 0.3 * np.exp(-6j * np.pi * z + 0.4j) + 0.1, 32, cav)
    off = SingleModeParams(0.0, 1.0, 1.0, 0.0)
    trip = cav.L_m / cav.v
    res = multimode.integrate_traveling_wave(F0, 0.0, 0.0, off, 1e3 * trip, 1e-12,
                                             t_eval=trip * np.array([0.0, 250.5, 999.25, 1000.0]))
    norm_err = float(np.max(np.abs(res.norms() / F0.l2_norm() - 1)))
    periodic_err = float(np.max(np.abs(res.F[-1] - F0.samples)))
    shift_err = float(np.max(np.abs(res.F[2] - multimode.advect_exact(F0, res.t[2]))))
    ok = max(trace_err, norm_err, periodic_err, shift_err) < 1e-10
    report(11, "trace, advected norm and periodic boundary over 1e3 times", ok,
           f"trace {trace_err:.1e}, norm {norm_err:.1e}, periodic {periodic_err:.1e}, "
           f"shift {shift_err:.1e}")
