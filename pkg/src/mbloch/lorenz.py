"""Single-mode laser in the uniform field limit and its Lorenz form."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _dopri
from ._jit import kernel
from .errors import IntegrationError, PhysicalRegimeError
from .ode import DEFAULT_TOL, Trajectory, integrate

STABILITY_MARGIN = 1e-9
FIXED_POINT_TOL = 1e-10


@dataclass(frozen=True)
class SingleModeParams:
    """Cavity rate ``kappa``, matter rates, pump ``r`` and atom-cavity detuning ``Delta_c``.

    Rates may be zero (decoupled limits) but ``gamma_perp`` sets the time unit and
    must be positive.
    """

    kappa: float
    gamma_perp: float
    gamma_par: float
    r: float
    Delta_c: float = 0.0

    def __post_init__(self):
        if not self.gamma_perp > 0:
            raise ValueError("gamma_perp must be positive")
        if self.kappa < 0 or self.gamma_par < 0 or self.r < 0:
            raise ValueError("kappa, gamma_par and r must be non-negative")

    def as_array(self):
        return np.array([self.kappa, self.gamma_perp, self.gamma_par, self.r, self.Delta_c])

    def with_(self, **changes):
        from dataclasses import replace
        return replace(self, **changes)


@dataclass(frozen=True)
class LorenzState:
    E: float
    P: float
    D: float

    def as_array(self):
        return np.array([self.E, self.P, self.D])


@dataclass(frozen=True)
class ComplexModeState:
    F: complex
    P: complex
    D: float

    def as_array(self):
        return np.array([self.F.real, self.F.imag, self.P.real, self.P.imag, self.D])


@kernel
def real_rhs(t, y, p):
    kappa, gperp, gpar, r = p[0], p[1], p[2], p[3]
    out = np.empty(3)
    out[0] = kappa * (y[1] - y[0])
    out[1] = gperp * (y[0] * y[2] - y[1])
    out[2] = gpar * (r - y[2] - y[0] * y[1])
    return out


@kernel
def complex_rhs(t, y, p):
    kappa, gperp, gpar, r, dc = p[0], p[1], p[2], p[3], p[4]
    fr, fi, pr, pi, d = y[0], y[1], y[2], y[3], y[4]
    out = np.empty(5)
    out[0] = kappa * (pr - fr)
    out[1] = kappa * (pi - fi)
    out[2] = gperp * (fr * d - pr + dc * pi)
    out[3] = gperp * (fi * d - pi - dc * pr)
    out[4] = gpar * (r - d - (fr * pr + fi * pi))
    return out


@kernel
def xyz_rhs(t, y, p):
    sigma, b, r = p[0], p[1], p[2]
    out = np.empty(3)
    out[0] = sigma * (y[1] - y[0])
    out[1] = r * y[0] - y[1] - y[0] * y[2]
    out[2] = b * (y[0] * y[1] - y[2])
    return out


@kernel
def tangent_rhs(t, y, p):
    kappa, gperp, gpar, r = p[0], p[1], p[2], p[3]
    e, pp, d = y[0], y[1], y[2]
    de, dp, dd = y[3], y[4], y[5]
    out = np.empty(6)
    out[0] = kappa * (pp - e)
    out[1] = gperp * (e * d - pp)
    out[2] = gpar * (r - d - e * pp)
    out[3] = kappa * (dp - de)
    out[4] = gperp * (d * de + e * dd - dp)
    out[5] = -gpar * (pp * de + e * dp + dd)
    return out


def _bounded(y, state0, r):
    bound = 1e3 * max(1.0, r, float(np.max(np.abs(state0))))
    return bool(np.all(np.isfinite(y)) and np.max(np.abs(y)) <= bound)


def _run(rhs, y0, params, t_end, tol, t_eval, n_samples, columns, r):
    if tol <= 0:
        raise ValueError("tol must be positive")
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, n_samples)
    t, y, n = integrate(rhs, y0, t_end, t_eval, params, rtol=tol, atol=tol)
    if not _bounded(y, y0, r):
        raise IntegrationError("trajectory left the trapping region", t[-1], y[-1])
    return Trajectory(t, y, columns, n)


def integrate_complex(state0, p: SingleModeParams, t_end, tol=DEFAULT_TOL, *, t_eval=None,
                      n_samples=401):
    """Complex field/polarization dynamics (five real components) with detuning."""
    if not isinstance(state0, ComplexModeState):
        state0 = ComplexModeState(*state0)
    return _run(complex_rhs, state0.as_array(), p.as_array(), t_end, tol, t_eval, n_samples,
                ("F_re", "F_im", "P_re", "P_im", "D"), p.r)


def integrate_real(state0, p: SingleModeParams, t_end, tol=DEFAULT_TOL, *, t_eval=None,
                   n_samples=401):
    """Resonant real (E, P, D) dynamics."""
    if not isinstance(state0, LorenzState):
        state0 = LorenzState(*state0)
    return _run(real_rhs, state0.as_array(), p.as_array(), t_end, tol, t_eval, n_samples,
                ("E", "P", "D"), p.r)


def integrate_lorenz_xyz(xyz0, sigma, b, r, tau_end, tol=DEFAULT_TOL, *, tau_eval=None,
                         n_samples=401):
    """Lorenz system in the (X, Y, Z) coordinates obtained by substitution."""
    y0 = np.asarray(xyz0, dtype=float)
    return _run(xyz_rhs, y0, np.array([sigma, b, r], dtype=float), tau_end, tol, tau_eval,
                n_samples, ("X", "Y", "Z"), r)


def phase_quadratures(traj: Trajectory):
    """E = |F| and the in-/out-of-phase polarization components (P_re, P_im)."""
    F = traj.complex("F")
    P = traj.complex("P")
    E = np.abs(F)
    rot = P * np.conj(F) / E
    return E, rot.real, rot.imag


def to_lorenz_coordinates(p: SingleModeParams):
    """(sigma, b, r) = (kappa/gamma_perp, gamma_par/gamma_perp, r)."""
    return p.kappa / p.gamma_perp, p.gamma_par / p.gamma_perp, p.r


def from_lorenz_coordinates(sigma, b, r, gamma_perp=1.0):
    return SingleModeParams(kappa=sigma * gamma_perp, gamma_perp=gamma_perp,
                            gamma_par=b * gamma_perp, r=r)


def state_to_xyz(state, r):
    """(X, Y, Z) = (E, P, r - D); works on arrays with trailing axis 3."""
    s = np.asarray(state.as_array() if isinstance(state, LorenzState) else state, dtype=float)
    out = s.copy()
    out[..., 2] = r - s[..., 2]
    return out


def xyz_to_state(xyz, r):
    return state_to_xyz(xyz, r)


def fixed_points(p: SingleModeParams):
    """Laser-off solution and, for r >= 1, the lasing pair."""
    if p.Delta_c != 0:
        raise ValueError("fixed points are provided for the resonant (Delta_c = 0) system only")
    points = [LorenzState(0.0, 0.0, p.r)]
    if p.r >= 1.0:
        e = math.sqrt(p.r - 1.0)
        points += [LorenzState(e, e, 1.0), LorenzState(-e, -e, 1.0)]
    return points


@dataclass(frozen=True)
class HopfResult:
    """Hopf threshold of the lasing state.

    ``status`` is 'finite', 'stable_all_r' (good cavity) or 'divergent'
    (kappa exactly at gamma_perp + gamma_par). ``r_min``/``kappa_at_min`` give the
    lowest threshold over kappa at the given gamma_par.
    """

    r_hb: float
    status: str
    bad_cavity: bool
    r_min: float
    kappa_at_min: float

    @property
    def finite(self):
        return self.status == "finite"


def hopf_threshold(p: SingleModeParams):
    sigma, b, _ = to_lorenz_coordinates(p)
    s = 1.0 + b
    x_opt = math.sqrt(2.0 * s * (s + 1.0))
    r_min = 3.0 * s + 2.0 + 2.0 * x_opt
    kappa_min = (s + x_opt) * p.gamma_perp
    if sigma == s:
        return HopfResult(math.inf, "divergent", False, r_min, kappa_min)
    if sigma < s:
        return HopfResult(math.inf, "stable_all_r", False, r_min, kappa_min)
    r_hb = sigma * (sigma + 3.0 + b) / (sigma - s)
    return HopfResult(r_hb, "finite", True, r_min, kappa_min)


def jacobian(p: SingleModeParams, point):
    e, pp, d = point.as_array() if isinstance(point, LorenzState) else point
    k, gp, gl = p.kappa, p.gamma_perp, p.gamma_par
    return np.array([[-k, k, 0.0], [gp * d, -gp, gp * e], [-gl * pp, -gl * e, -gl]])


def characteristic_coefficients(p: SingleModeParams, point):
    """(a, b, c) of lambda^3 + a lambda^2 + b lambda + c for the Jacobian at ``point``."""
    e, pp, d = point.as_array() if isinstance(point, LorenzState) else point
    k, gp, gl = p.kappa, p.gamma_perp, p.gamma_par
    a = k + gp + gl
    b = k * gp * (1.0 - d) + k * gl + gp * gl * (1.0 + e * e)
    c = k * gp * gl * (1.0 + e * e + e * pp - d)
    return a, b, c


def _polish(root, a, b, c, iterations=3):
    for _ in range(iterations):
        f = ((root + a) * root + b) * root + c
        df = (3.0 * root + 2.0 * a) * root + b
        if df == 0:
            break
        step = f / df
        root -= step
        if abs(step) <= 1e-16 * max(1.0, abs(root)):
            break
    return root


def cubic_roots(a, b, c):
    """Roots of lambda^3 + a lambda^2 + b lambda + c (real coefficients), closed form.

    The polynomial is first rescaled so that its roots are of order one.
    """
    s = max(abs(a), math.sqrt(abs(b)), abs(c) ** (1.0 / 3.0))
    if s == 0.0:
        return np.zeros(3, dtype=complex)
    return s * _cubic_roots_scaled(a / s, b / s / s, c / s / s / s)


def _cubic_roots_scaled(a, b, c):
    shift = a / 3.0
    pp = b - a * a / 3.0
    qq = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    disc = (qq / 2.0) ** 2 + (pp / 3.0) ** 3
    if disc > 0 or pp > 0:
        sq = math.sqrt(max(disc, 0.0))
        u = math.copysign(abs(-qq / 2.0 + sq) ** (1 / 3), -qq / 2.0 + sq)
        v = math.copysign(abs(-qq / 2.0 - sq) ** (1 / 3), -qq / 2.0 - sq)
        x1 = u + v - shift
    else:
        m = 2.0 * math.sqrt(-pp / 3.0)
        if pp * m == 0.0:
            x1 = -shift
        else:
            arg = max(-1.0, min(1.0, 3.0 * qq / (pp * m)))
            x1 = m * math.cos(math.acos(arg) / 3.0) - shift
    x1 = _polish(x1, a, b, c)
    # deflate to lambda^2 + q1 lambda + q0
    q1 = a + x1
    q0 = -c / x1 if abs(x1) > 1.0 and abs(x1 * x1) > abs(b) else b + x1 * q1
    dq = q1 * q1 - 4.0 * q0
    if dq >= 0:
        sq = math.sqrt(dq)
        r1 = -0.5 * (q1 + math.copysign(sq, q1))
        r2 = q0 / r1 if r1 != 0 else 0.0
        roots = [complex(x1), complex(r1), complex(r2)]
    else:
        im = 0.5 * math.sqrt(-dq)
        roots = [complex(x1), complex(-0.5 * q1, im), complex(-0.5 * q1, -im)]
    return np.array(sorted(roots, key=lambda z: (-z.real, -z.imag)))


@dataclass(frozen=True)
class StabilityReport:
    fixed_point: LorenzState
    eigenvalues: np.ndarray
    verdict: str
    r_hb: float = math.nan
    extra: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "fixed_point": [self.fixed_point.E, self.fixed_point.P, self.fixed_point.D],
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "verdict": self.verdict,
            "r_HB": None if not math.isfinite(self.r_hb) else self.r_hb,
        }


def jacobian_stability(p: SingleModeParams, point, margin=STABILITY_MARGIN):
    """Eigenvalues at a fixed point of the resonant equations and a stability verdict."""
    if not isinstance(point, LorenzState):
        point = LorenzState(*point)
    residual = real_rhs(0.0, point.as_array(), p.as_array())
    scale = max(1.0, p.r) * max(p.kappa, p.gamma_perp, p.gamma_par)
    if np.max(np.abs(residual)) > FIXED_POINT_TOL * scale:
        raise ValueError(f"not a fixed point (residual {np.max(np.abs(residual)):.3g})")
    eig = cubic_roots(*characteristic_coefficients(p, point))
    top = max(z.real for z in eig)
    tol = margin * p.gamma_perp
    verdict = "stable" if top < -tol else "unstable" if top > tol else "marginal"
    return StabilityReport(point, eig, verdict, hopf_threshold(p).r_hb)


@kernel
def _benettin(rhs, y0, v0, interval, n_transient, n_intervals, params, rtol, atol, bound):
    state = np.empty(6)
    state[:3] = y0
    state[3:] = v0 / np.sqrt(np.sum(v0 * v0))
    te = np.empty(1)
    t = 0.0
    h = 0.0
    total = 0.0
    for i in range(n_transient + n_intervals):
        te[0] = t + interval
        _, status, _, y_last, h, _ = _dopri.dopri5(rhs, state, t, t + interval, te,
                                                     params, rtol, atol, h, 10_000_000)
        if status != 0:
            return np.nan, i, status
        if np.max(np.abs(y_last[:3])) > bound:
            return np.nan, i, -1
        norm = np.sqrt(np.sum(y_last[3:] * y_last[3:]))
        state = y_last
        state[3:] = y_last[3:] / norm
        if i >= n_transient:
            total += np.log(norm)
        t += interval
    return total / (n_intervals * interval), n_transient + n_intervals, 0


def lyapunov_max(p: SingleModeParams, state0, t_total=5000.0, t_transient=1000.0, *,
                 interval=1.0, tol=DEFAULT_TOL, seed=0):
    """Largest Lyapunov exponent (per unit gamma_perp * t) by tangent-vector renormalisation.

    ``t_total``, ``t_transient`` and ``interval`` are in units of 1/gamma_perp;
    ``t_total`` counts the averaging window only.
    """
    if not t_total > 0 or t_transient < 0:
        raise ValueError("need t_total > 0 and t_transient >= 0")
    if not isinstance(state0, LorenzState):
        state0 = LorenzState(*state0)
    y0 = state0.as_array()
    v0 = np.random.default_rng(seed).standard_normal(3)
    step = interval / p.gamma_perp
    n_tr = int(round(t_transient / interval))
    n_av = max(1, int(round(t_total / interval)))
    bound = 1e3 * max(1.0, p.r, float(np.max(np.abs(y0))))
    lam, done, status = _benettin(tangent_rhs, y0, v0, step, n_tr, n_av, p.as_array(), tol, tol, bound)
    if status != 0:
        raise IntegrationError("trajectory diverged while estimating the Lyapunov exponent",
                               done * step, None)
    return float(lam) / p.gamma_perp


def three_level_instability_ratio(G, r_on=1.0, r_HB=9.0):
    """Ratio of actual three-level pump rates at the Hopf and lasing thresholds.

    Uses r = G d0 and R/gamma_21 = (1 + d0)/(1 - d0).
    """
    if not G > r_HB or not G > r_on:
        raise PhysicalRegimeError("instability unreachable: required d0 exceeds attainable range")

    def pump(r):
        d0 = r / G
        return (1.0 + d0) / (1.0 - d0)

    return pump(r_HB) / pump(r_on)


def three_level_instability_ratio_closed_form(G):
    return (G + 9.0) * (G - 1.0) / ((G + 1.0) * (G - 9.0))


__all__ = [
    "SingleModeParams", "LorenzState", "ComplexModeState", "HopfResult", "StabilityReport",
    "integrate_complex", "integrate_real", "integrate_lorenz_xyz", "to_lorenz_coordinates",
    "from_lorenz_coordinates", "state_to_xyz", "xyz_to_state", "fixed_points", "hopf_threshold",
    "jacobian", "characteristic_coefficients", "cubic_roots", "jacobian_stability",
    "lyapunov_max", "three_level_instability_ratio", "phase_quadratures",
]
