"""Optical Bloch equations for two-, three- and four-level media.

State vectors handed to the kernels are real: populations first, then the
slowly varying coherence sigma_12 split into real and imaginary parts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from ._jit import kernel
from .ode import DEFAULT_TOL, Trajectory, integrate
from .params import FourLevelParams, MediumParams, ThreeLevelParams


@dataclass(frozen=True)
class TwoLevelState:
    d: float
    sigma12: complex = 0j

    def __post_init__(self):
        if abs(self.d) > 1 + 1e-12 or abs(self.sigma12) > 0.5 + 1e-12:
            raise ValueError("unphysical two-level state: need |d| <= 1 and |sigma12| <= 1/2")

    def as_array(self):
        return np.array([self.d, self.sigma12.real, self.sigma12.imag])


def _check_populations(pops):
    if any(p < -1e-12 or p > 1 + 1e-12 for p in pops) or abs(sum(pops) - 1.0) > 1e-9:
        raise ValueError("populations must lie in [0, 1] and sum to 1")


@dataclass(frozen=True)
class ThreeLevelState:
    rho11: float
    rho22: float
    rho33: float
    sigma12: complex = 0j

    def __post_init__(self):
        _check_populations((self.rho11, self.rho22, self.rho33))

    def as_array(self):
        return np.array([self.rho11, self.rho22, self.rho33, self.sigma12.real, self.sigma12.imag])


@dataclass(frozen=True)
class FourLevelState:
    rho00: float
    rho11: float
    rho22: float
    rho33: float
    sigma12: complex = 0j

    def __post_init__(self):
        _check_populations((self.rho00, self.rho11, self.rho22, self.rho33))

    def as_array(self):
        return np.array([self.rho00, self.rho11, self.rho22, self.rho33,
                         self.sigma12.real, self.sigma12.imag])


class DriveField:
    """Complex Rabi half-amplitude alpha(t): a constant or linearly interpolated samples."""

    def __init__(self, alpha=0j, times=None):
        if times is None:
            self.times = np.zeros(1)
            self.values = np.array([complex(alpha)])
        else:
            self.times = np.asarray(times, dtype=float)
            self.values = np.asarray(alpha, dtype=complex)
            if self.times.shape != self.values.shape or self.times.size < 2:
                raise ValueError("sampled drive needs matching times/values arrays (>= 2 points)")
            if np.any(np.diff(self.times) <= 0):
                raise ValueError("drive sample times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("drive must be finite")

    @classmethod
    def coerce(cls, drive):
        return drive if isinstance(drive, cls) else cls(drive)

    @property
    def is_constant(self):
        return self.times.size == 1

    def __call__(self, t):
        if self.is_constant:
            return self.values[0] * np.ones_like(np.asarray(t, dtype=float))
        return (np.interp(t, self.times, self.values.real)
                + 1j * np.interp(t, self.times, self.values.imag))

    def kernel_args(self):
        return (np.ascontiguousarray(self.times), np.ascontiguousarray(self.values.real),
                np.ascontiguousarray(self.values.imag))


@kernel
def _drive_at(t, dt, dre, dim):
    if dt.shape[0] == 1:
        return dre[0], dim[0]
    return np.interp(t, dt, dre), np.interp(t, dt, dim)


@kernel
def two_level_rhs(t, y, args):
    p, dt, dre, dim = args
    gperp, gpar, d0, delta = p[0], p[1], p[2], p[3]
    a, b = _drive_at(t, dt, dre, dim)
    d, x, s = y[0], y[1], y[2]
    out = np.empty(3)
    out[0] = gpar * (d0 - d) - 4.0 * (a * s + b * x)
    out[1] = -gperp * x + delta * s + b * d
    out[2] = -gperp * s - delta * x + a * d
    return out


@kernel
def three_level_rhs(t, y, args):
    p, dt, dre, dim = args
    g21, g31, g32, gperp, R, delta = p[0], p[1], p[2], p[3], p[4], p[5]
    a, b = _drive_at(t, dt, dre, dim)
    r11, r22, r33, x, s = y[0], y[1], y[2], y[3], y[4]
    stim = -2.0 * (a * s + b * x)
    inv = r22 - r11
    out = np.empty(5)
    out[0] = g21 * r22 + g31 * r33 + R * (r33 - r11) - stim
    out[1] = -g21 * r22 + g32 * r33 + stim
    out[2] = -(g31 + g32) * r33 + R * (r11 - r33)
    out[3] = -gperp * x + delta * s + b * inv
    out[4] = -gperp * s - delta * x + a * inv
    return out


@kernel
def four_level_rhs(t, y, args):
    p, dt, dre, dim = args
    g10, g20, g21, g30, g31, g32 = p[0], p[1], p[2], p[3], p[4], p[5]
    gperp, R, delta = p[6], p[7], p[8]
    a, b = _drive_at(t, dt, dre, dim)
    r00, r11, r22, r33, x, s = y[0], y[1], y[2], y[3], y[4], y[5]
    stim = -2.0 * (a * s + b * x)
    inv = r22 - r11
    out = np.empty(6)
    out[0] = g10 * r11 + g20 * r22 + g30 * r33 - R * (r00 - r33)
    out[1] = -g10 * r11 + g21 * r22 + g31 * r33 - stim
    out[2] = -(g20 + g21) * r22 + g32 * r33 + stim
    out[3] = -(g30 + g31 + g32) * r33 + R * (r00 - r33)
    out[4] = -gperp * x + delta * s + b * inv
    out[5] = -gperp * s - delta * x + a * inv
    return out


def _time_grid(t_end, t_eval, n_samples):
    if t_eval is not None:
        return np.asarray(t_eval, dtype=float)
    return np.linspace(0.0, t_end, n_samples)


def integrate_two_level(state0, drive, m: MediumParams, t_end, tol=DEFAULT_TOL, *,
                        t_eval=None, n_samples=401):
    """Integrate the two-level Bloch equations (d, sigma_12) under a prescribed drive."""
    if not isinstance(state0, TwoLevelState):
        state0 = TwoLevelState(*state0)
    drive = DriveField.coerce(drive)
    args = (np.array([m.gamma_perp, m.gamma_par, m.d0, m.delta]), *drive.kernel_args())
    t, y, n = integrate(two_level_rhs, state0.as_array(), t_end,
                        _time_grid(t_end, t_eval, n_samples), args, rtol=tol, atol=tol)
    return Trajectory(t, y, ("d", "sigma12_re", "sigma12_im"), n)


def integrate_three_level(state0, drive, p: ThreeLevelParams, detuning, t_end,
                          tol=DEFAULT_TOL, *, t_eval=None, n_samples=401):
    """Integrate the full (pre-elimination) three-level equations."""
    if not isinstance(state0, ThreeLevelState):
        state0 = ThreeLevelState(*state0)
    drive = DriveField.coerce(drive)
    params = np.array([p.gamma_21, p.gamma_31, p.gamma_32, p.gamma_perp, p.R_pump, detuning],
                      dtype=float)
    t, y, n = integrate(three_level_rhs, state0.as_array(), t_end,
                        _time_grid(t_end, t_eval, n_samples), (params, *drive.kernel_args()),
                        rtol=tol, atol=tol)
    return Trajectory(t, y, ("rho11", "rho22", "rho33", "sigma12_re", "sigma12_im"), n)


def integrate_four_level(state0, drive, p: FourLevelParams, detuning, t_end,
                         tol=DEFAULT_TOL, *, t_eval=None, n_samples=401):
    """Integrate the full four-level equations (levels 0..3, laser on 2 -> 1)."""
    if not isinstance(state0, FourLevelState):
        state0 = FourLevelState(*state0)
    drive = DriveField.coerce(drive)
    params = np.array([p.gamma_10, p.gamma_20, p.gamma_21, p.gamma_30, p.gamma_31, p.gamma_32,
                       p.gamma_perp, p.R_pump, detuning], dtype=float)
    t, y, n = integrate(four_level_rhs, state0.as_array(), t_end,
                        _time_grid(t_end, t_eval, n_samples), (params, *drive.kernel_args()),
                        rtol=tol, atol=tol)
    return Trajectory(t, y, ("rho00", "rho11", "rho22", "rho33", "sigma12_re", "sigma12_im"), n)


def trace(traj: Trajectory):
    """Total population along a three- or four-level trajectory."""
    return sum(traj[c] for c in traj.columns if c.startswith("rho"))


def inversion(traj: Trajectory):
    return traj["rho22"] - traj["rho11"]


def steady_state_two_level(alpha, m: MediumParams):
    """Stationary ``(d_s, sigma21_s)`` of the two-level equations for a constant field."""
    alpha = np.asarray(alpha, dtype=complex)
    den = m.delta ** 2 + m.gamma_perp ** 2 + 4.0 * m.gamma_perp * np.abs(alpha) ** 2 / m.gamma_par
    d_s = m.d0 * (m.gamma_perp ** 2 + m.delta ** 2) / den
    sigma21_s = m.d0 * alpha * (m.delta - 1j * m.gamma_perp) / den
    if d_s.ndim == 0:
        return float(d_s), complex(sigma21_s)
    return d_s, sigma21_s


def stimulated_rate(alpha, gamma_perp):
    """R = 2 |alpha|^2 / gamma_perp of the rate-equation limit."""
    return 2.0 * np.abs(alpha) ** 2 / gamma_perp


def rate_equations_step(populations, R_stim, p):
    """Time derivative of the populations with the coherence adiabatically eliminated.

    ``p`` selects the level scheme and the meaning of ``populations``:

    * :class:`MediumParams` -> ``(rho22, rho11)``, symmetric decay ``gamma_par`` to
      a reservoir that refills the levels to (1 +- d0)/2;
    * :class:`ThreeLevelParams` -> ``(rho11, rho22, rho33)``;
    * :class:`FourLevelParams` -> ``(rho00, rho11, rho22, rho33)``.
    """
    if R_stim < 0:
        raise ValueError("R_stim must be non-negative")
    pops = np.asarray(populations, dtype=float)
    if isinstance(p, MediumParams):
        r22, r11 = pops
        stim = R_stim * (r22 - r11)
        return np.array([p.gamma_par * (0.5 * (1 + p.d0) - r22) - stim,
                         p.gamma_par * (0.5 * (1 - p.d0) - r11) + stim])
    if isinstance(p, ThreeLevelParams):
        r11, r22, r33 = pops
        stim = R_stim * (r22 - r11)
        return np.array([
            p.gamma_21 * r22 + p.gamma_31 * r33 + p.R_pump * (r33 - r11) + stim,
            -p.gamma_21 * r22 + p.gamma_32 * r33 - stim,
            -(p.gamma_31 + p.gamma_32) * r33 + p.R_pump * (r11 - r33),
        ])
    if isinstance(p, FourLevelParams):
        r00, r11, r22, r33 = pops
        stim = R_stim * (r22 - r11)
        return np.array([
            p.gamma_10 * r11 + p.gamma_20 * r22 + p.gamma_30 * r33 - p.R_pump * (r00 - r33),
            -p.gamma_10 * r11 + p.gamma_21 * r22 + p.gamma_31 * r33 + stim,
            -(p.gamma_20 + p.gamma_21) * r22 + p.gamma_32 * r33 - stim,
            -(p.gamma_30 + p.gamma_31 + p.gamma_32) * r33 + p.R_pump * (r00 - r33),
        ])
    raise TypeError(f"unsupported parameter type {type(p).__name__}")


def integrate_rate_equations(populations0, drive, p, t_end, tol=DEFAULT_TOL, *, t_eval=None,
                             n_samples=401):
    """Integrate the rate equations with R(t) = 2|alpha(t)|^2 / gamma_perp (scipy DOP853)."""
    drive = DriveField.coerce(drive)
    t_eval = _time_grid(t_end, t_eval, n_samples)

    def rhs(t, y):
        return rate_equations_step(y, float(stimulated_rate(drive(t), p.gamma_perp)), p)

    sol = solve_ivp(rhs, (0.0, t_end), np.asarray(populations0, dtype=float), method="DOP853",
                    t_eval=t_eval, rtol=tol, atol=tol)
    if not sol.success:
        raise RuntimeError(sol.message)
    return Trajectory(sol.t, sol.y.T, tuple(f"pop{i}" for i in range(sol.y.shape[0])), sol.nfev)


def adiabatic_expansion(t, g_signal, gamma, order, derivatives=None):
    """Slaved response f = (1/gamma)[g - g'/gamma + g''/gamma^2], truncated at ``order``.

    ``g_signal`` is either samples on ``t`` or a callable; ``derivatives`` optionally
    supplies (g', g'') the same way, otherwise a cubic spline provides them.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    t = np.asarray(t, dtype=float)

    def _eval(obj):
        return np.asarray(obj(t) if callable(obj) else obj)

    g = _eval(g_signal)
    if order == 0:
        return g / gamma
    if derivatives is None:
        spline = CubicSpline(t, g)
        derivs = [spline(t, 1), spline(t, 2)]
    else:
        derivs = [_eval(d) for d in derivatives]
    series = g - derivs[0] / gamma
    if order == 2:
        series = series + derivs[1] / gamma ** 2
    return series / gamma


def relaxation_response(t, g_signal, gamma, f0=0.0):
    """Solve f' = -gamma f + g exactly for piecewise-linear g sampled on ``t``."""
    t = np.asarray(t, dtype=float)
    g = np.asarray(g_signal(t) if callable(g_signal) else g_signal)
    f = np.empty(t.shape, dtype=np.result_type(g, f0))
    f[0] = f0
    h = np.diff(t)
    e = np.exp(-gamma * h)
    # exact integral of exp(-gamma (t1 - s)) * linear g over each interval
    w1 = (1.0 - e) / gamma
    wl = (h - w1) / (gamma * h)
    for i in range(len(h)):
        f[i + 1] = f[i] * e[i] + g[i] * w1[i] + (g[i + 1] - g[i]) * wl[i]
    return f
