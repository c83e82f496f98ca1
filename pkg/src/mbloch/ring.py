"""Steady lasing of a unidirectional ring laser."""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from . import _roots
from .errors import BelowThresholdWarning, PhysicalRegimeError
from .params import CavityParams, MediumParams, effective_pump_r

_ROOT_XTOL = 1e-15


@dataclass(frozen=True)
class LaserOperatingPoint:
    n: int
    omega_n: float
    r_on: float
    exit_intensity: float
    Delta: float
    degenerate: bool = False

    def as_dict(self):
        return asdict(self)


def apply_boundary(alpha_exit, cav: CavityParams, k):
    """Field re-entering the medium after one pass through the passive cavity."""
    return cav.R * np.exp(1j * k * cav.L_c) * np.asarray(alpha_exit, dtype=complex)


def output_slope(m: MediumParams, cav: CavityParams):
    """d|alpha(L_m)|^2 / dr above threshold."""
    if cav.R >= 1.0:
        raise ValueError("lossless cavity: output intensity undefined")
    return m.saturation_intensity * cav.loss_ratio


def lasing_threshold(Delta):
    return 1.0 + Delta * Delta


def exit_intensity(r, Delta, m: MediumParams, cav: CavityParams):
    """|alpha(L_m)|^2 of the monochromatic steady state; 0 (with a warning) below threshold."""
    on = lasing_threshold(Delta)
    value = output_slope(m, cav) * (r - on)
    if value < 0:
        warnings.warn(f"r = {r:g} is below the lasing threshold {on:g}",
                      BelowThresholdWarning, stacklevel=2)
        return 0.0
    return value


def resonant_exit_intensity(r, m: MediumParams, cav: CavityParams):
    return exit_intensity(r, 0.0, m, cav)


def pulled_frequency(kappa, gamma_perp, omega_c, omega_21):
    """Lasing frequency of the n = 0 mode: the kappa/gamma_perp weighted mean."""
    return (kappa * omega_21 + gamma_perp * omega_c) / (kappa + gamma_perp)


def mode_family(m: MediumParams, cav: CavityParams, omega_c, omega_21, n_range=range(-2, 3)):
    """Lasing frequencies, thresholds and intensities of the mode family, lowest threshold first."""
    fsr = cav.free_spectral_range
    if not abs(omega_c - omega_21) < fsr:
        raise ValueError("|omega_c - omega_21| must be smaller than the free spectral range "
                         f"{fsr:g}; re-fold omega_c by multiples of 2 pi c / L_c")
    kappa, gp = cav.kappa, m.gamma_perp
    r = effective_pump_r(m, cav)
    base = pulled_frequency(kappa, gp, omega_c, omega_21)
    rows = []
    for n in n_range:
        omega_n = base + n * gp / (kappa + gp) * fsr
        Delta = (omega_c - omega_21 + n * fsr) / (kappa + gp)
        r_on = lasing_threshold(Delta)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BelowThresholdWarning)
            intensity = exit_intensity(r, Delta, m, cav)
        rows.append([int(n), omega_n, r_on, intensity, Delta])
    rows.sort(key=lambda row: (row[2], abs(row[0]), row[0]))
    r_ons = [row[2] for row in rows]
    out = []
    for i, row in enumerate(rows):
        tie = any(j != i and math.isclose(r_ons[j], row[2], rel_tol=1e-12, abs_tol=0.0)
                  for j in range(len(rows)))
        out.append(LaserOperatingPoint(*row, degenerate=tie))
    return out


def intensity_profile(r, Delta, m: MediumParams, cav: CavityParams, n_points=201):
    """Intracavity |alpha(z)|^2 on an even grid over [0, L_m].

    Each point solves the integrated amplitude law with the entry intensity
    fixed by the mirror; the roots are marched along z.
    """
    if not r > 1.0 + Delta * Delta:
        raise PhysicalRegimeError(f"r = {r:g} does not exceed the threshold {1 + Delta * Delta:g}")
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    isat = m.saturation_intensity
    i_exit = exit_intensity(r, Delta, m, cav)
    i_entry = cav.R2 * i_exit
    z = np.linspace(0.0, cav.L_m, n_points)
    rhs = np.ascontiguousarray(r * cav.log_loss * z / cav.L_m)
    s, status = _roots.solve_log_many(1.0 + Delta * Delta, i_entry / isat, 1.0, rhs, _ROOT_XTOL)
    if status != 0:
        raise RuntimeError("intensity profile root refinement did not converge")
    return z, i_entry * np.exp(s)
