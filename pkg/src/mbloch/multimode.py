"""Traveling-wave (uniform field limit) dynamics on the ring and empty-cavity modes.

Advection is handled exactly in mode space: the integrated variables are the
mode amplitudes G_m = F_m exp(i v q_m t), so only the local matter
coupling is stepped by the adaptive integrator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _fft
from ._jit import kernel
from .lorenz import SingleModeParams
from .ode import DEFAULT_TOL, integrate, write_csv
from .params import CavityParams

DEFAULT_NZ = 64


def _next_power_of_two(n):
    return 1 << max(0, (int(n) - 1).bit_length())


@dataclass(frozen=True)
class FieldOnRing:
    """Complex field sampled at ``n_z`` equispaced points of [0, L_m); periodic by construction."""

    samples: np.ndarray
    L_m: float
    v: float
    c: float = 1.0

    def __post_init__(self):
        s = np.ascontiguousarray(self.samples, dtype=np.complex128)
        if s.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        n = s.shape[0]
        if not _fft.is_power_of_two(n) or n < 2:
            raise ValueError(f"n_z = {n} is not a power of two; use n_z = {_next_power_of_two(max(n, 2))}")
        if not (self.L_m > 0 and self.v >= 0 and self.c > 0):
            raise ValueError("need L_m > 0, v >= 0, c > 0")
        object.__setattr__(self, "samples", s)

    @classmethod
    def for_cavity(cls, samples, cav: CavityParams):
        return cls(samples, cav.L_m, cav.v, cav.c)

    @classmethod
    def from_function(cls, func, n_z, cav: CavityParams):
        return cls.for_cavity(func(grid(n_z, cav.L_m)), cav)

    @property
    def n_z(self):
        return self.samples.shape[0]

    @property
    def z(self):
        return grid(self.n_z, self.L_m)

    @property
    def L_c(self):
        return self.c * self.L_m / self.v if self.v > 0 else math.inf

    def l2_norm(self):
        """sqrt(integral |F|^2 dz) by the (spectrally exact) rectangle rule."""
        return math.sqrt(float(np.sum(np.abs(self.samples) ** 2)) * self.L_m / self.n_z)


def grid(n_z, L_m):
    return np.arange(n_z) * (L_m / n_z)


def _mode_numbers(n):
    """Integer m in FFT storage order."""
    return np.rint(np.fft.fftfreq(n, d=1.0 / n)).astype(np.int64)


@dataclass(frozen=True)
class ModeSpectrum:
    """Fourier coefficients F_m for m in [-n/2, n/2), with F(z) = sum_m F_m exp(i q_m z)."""

    m: np.ndarray
    coefficients: np.ndarray
    q: np.ndarray
    k: np.ndarray
    omega: np.ndarray
    L_m: float

    def reconstruct(self):
        n = self.m.shape[0]
        stored = np.fft.ifftshift(self.coefficients)
        return _fft.ifft(np.ascontiguousarray(stored)) * n

    def evaluate(self, z):
        """Fourier series at arbitrary positions (periodic in L_m)."""
        z = np.asarray(z, dtype=float)
        return np.exp(1j * np.multiply.outer(z, self.q)) @ self.coefficients

    def to_csv(self, path):
        rows = zip(self.m, self.coefficients.real, self.coefficients.imag, self.omega)
        write_csv(path, ["m", "re_F_m", "im_F_m", "omega_m"], rows)


def mode_decompose(F: FieldOnRing):
    n = F.n_z
    coeff = np.fft.fftshift(_fft.fft(F.samples) / n)
    m = np.arange(-n // 2, n // 2)
    q = 2.0 * np.pi * m / F.L_m
    k = q * F.v / F.c
    return ModeSpectrum(m, coeff, q, k, F.v * q, F.L_m)


def empty_cavity_frequencies(cav: CavityParams, m_range):
    """Angular frequencies m * 2 pi c / L_c relative to the carrier."""
    return np.array([m * cav.free_spectral_range for m in m_range], dtype=float)


@kernel
def traveling_wave_rhs(t, y, args):
    # args = [kappa, gperp, gpar, r, Delta_c, v, q_0 ... q_{n-1}]
    kappa, gperp, gpar, r, dc, v = args[0], args[1], args[2], args[3], args[4], args[5]
    n = y.shape[0] // 5
    q = args[6:6 + n]
    phase = np.exp(-1j * v * q * t)
    G = y[0:n] + 1j * y[n:2 * n]
    F = _fft.ifft(G * phase) * n
    P = y[2 * n:3 * n] + 1j * y[3 * n:4 * n]
    D = y[4 * n:5 * n]
    dG = _fft.fft(kappa * (P - F)) / (phase * n)
    dP = gperp * (F * D - (1.0 + 1j * dc) * P)
    dD = gpar * (r - D - (F.real * P.real + F.imag * P.imag))
    out = np.empty(5 * n)
    out[0:n] = dG.real
    out[n:2 * n] = dG.imag
    out[2 * n:3 * n] = dP.real
    out[3 * n:4 * n] = dP.imag
    out[4 * n:5 * n] = dD
    return out


@dataclass(frozen=True)
class SpaceTimeResult:
    """Fields on the (t, z) grid: ``F``/``P`` complex (n_t, n_z), ``D`` real."""

    t: np.ndarray
    z: np.ndarray
    F: np.ndarray
    P: np.ndarray
    D: np.ndarray
    L_m: float
    v: float
    c: float
    n_steps: int = 0

    def field_at(self, i):
        return FieldOnRing(self.F[i], self.L_m, self.v, self.c)

    def spectra(self):
        return [mode_decompose(self.field_at(i)) for i in range(len(self.t))]

    def norms(self):
        return np.sqrt(np.sum(np.abs(self.F) ** 2, axis=1) * self.L_m / len(self.z))

    def to_csv(self, path):
        """One row per time: t, then Re F and Im F at every grid point."""
        header = ["t"] + [f"re_F_{j}" for j in range(len(self.z))] + \
                 [f"im_F_{j}" for j in range(len(self.z))]
        rows = (np.concatenate(([t], f.real, f.imag)) for t, f in zip(self.t, self.F))
        write_csv(path, header, rows)


def _as_grid(x, n, name, dtype):
    a = np.asarray(x, dtype=dtype)
    if a.ndim == 0:
        a = np.full(n, a, dtype=dtype)
    if a.shape != (n,):
        raise ValueError(f"{name} must be sampled on the field grid ({n} points)")
    return a


def integrate_traveling_wave(F0: FieldOnRing, P0, D0, p: SingleModeParams, t_end,
                             tol=DEFAULT_TOL, *, t_eval=None, n_samples=101):
    """Integrate the periodic traveling-wave equations from (F0, P0, D0).

    ``P0``/``D0`` are arrays on the field grid or scalars (uniform).
    """
    n = F0.n_z
    P0 = _as_grid(P0, n, "P0", np.complex128)
    D0 = _as_grid(D0, n, "D0", np.float64)
    m = _mode_numbers(n)
    q = 2.0 * np.pi * m / F0.L_m
    args = np.concatenate((p.as_array(), [F0.v], q))
    G0 = np.fft.fft(F0.samples) / n
    y0 = np.concatenate((G0.real, G0.imag, P0.real, P0.imag, D0))
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, n_samples)
    t, y, steps = integrate(traveling_wave_rhs, y0, t_end, t_eval, args, rtol=tol, atol=tol)
    G = y[:, :n] + 1j * y[:, n:2 * n]
    F = np.fft.ifft(G * np.exp(-1j * F0.v * np.multiply.outer(t, q)), axis=1) * n
    P = y[:, 2 * n:3 * n] + 1j * y[:, 3 * n:4 * n]
    return SpaceTimeResult(t, F0.z, F, P, y[:, 4 * n:], F0.L_m, F0.v, F0.c, steps)


def advect_exact(F0: FieldOnRing, t):
    """Free transport F(z - v t) evaluated spectrally (matter decoupled, kappa = 0)."""
    spectrum = mode_decompose(F0)
    return spectrum.evaluate((F0.z - F0.v * t) % F0.L_m)


__all__ = [
    "FieldOnRing", "ModeSpectrum", "SpaceTimeResult", "mode_decompose", "empty_cavity_frequencies",
    "integrate_traveling_wave", "advect_exact", "grid", "DEFAULT_NZ",
]
