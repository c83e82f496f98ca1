"""Single-pass amplification of a monochromatic field in a saturable medium."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _roots
from ._jit import kernel
from .errors import ValidityWarning
from .ode import integrate, write_csv
from .params import MediumParams

WEAK_FRACTION = 0.01
STRONG_FACTOR = 100.0
_ROOT_XTOL = 1e-14


@dataclass(frozen=True)
class PropagationResult:
    z_grid: np.ndarray
    amp2: np.ndarray
    phase: np.ndarray
    regime_tags: tuple

    @property
    def amplitude(self):
        return np.sqrt(self.amp2) * np.exp(1j * self.phase)

    def to_csv(self, path, intensity_unit=1.0, z_unit=1.0):
        rows = zip(self.z_grid / z_unit, self.amp2 / intensity_unit, self.phase, self.regime_tags)
        write_csv(path, ["z", "amp2", "phase", "regime"], rows)


def classify_regime(amp2, m: MediumParams):
    """'weak', 'strong' or 'intermediate' for each intensity."""
    isat = m.saturation_intensity
    strong = STRONG_FACTOR * max(isat, m.delta ** 2 * m.gamma_par / (4.0 * m.gamma_perp))
    amp2 = np.atleast_1d(amp2)
    return tuple("weak" if x < WEAK_FRACTION * isat else "strong" if x > strong
                 else "intermediate" for x in amp2)


@kernel
def _log_amplitude_rhs(z, y, args):
    # y = [ln(|alpha|/|alpha0|), phase]; args = [K, A, B, Delta]
    # d|alpha|/dz = K |alpha| / (A + B e^{2 s}), with B = 4 gperp |alpha0|^2 / gpar
    rate = args[0] / (args[1] + args[2] * math.exp(2.0 * y[0]))
    out = np.empty(2)
    out[0] = rate
    out[1] = args[3] * rate
    return out


def _coefficients(alpha0_mag, m: MediumParams, c):
    K = m.gamma_perp * m.d0 * m.g / c
    A = m.gamma_perp ** 2 + m.delta ** 2
    B = 2.0 * m.gamma_perp / m.gamma_par * alpha0_mag ** 2
    return K, A, B


def propagate_exact(alpha0, m: MediumParams, c, z_end, n_points=201, *, tol=1e-12):
    """Integrate the saturable propagation law for |alpha| and its phase."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if z_end <= 0:
        raise ValueError("z_end must be positive")
    alpha0 = complex(alpha0)
    z = np.linspace(0.0, z_end, n_points)
    mag0 = abs(alpha0)
    if mag0 == 0.0:
        if m.d0 > 0:
            warnings.warn("zero input field in a gain medium: returning the (unstable) "
                          "trivial solution", ValidityWarning, stacklevel=2)
        zeros = np.zeros(n_points)
        return PropagationResult(z, zeros, zeros.copy(), classify_regime(zeros, m))
    K, A, B = _coefficients(mag0, m, c)
    if K == 0.0:
        amp2 = np.full(n_points, mag0 ** 2)
        phase = np.full(n_points, math.atan2(alpha0.imag, alpha0.real))
        return PropagationResult(z, amp2, phase, classify_regime(amp2, m))
    args = np.array([K, A, 2.0 * B, m.Delta])
    _, y, _ = integrate(_log_amplitude_rhs, np.zeros(2), z_end, z, args, rtol=tol, atol=tol)
    amp2 = mag0 ** 2 * np.exp(2.0 * y[:, 0])
    phase = math.atan2(alpha0.imag, alpha0.real) + y[:, 1]
    return PropagationResult(z, amp2, phase, classify_regime(amp2, m))


def implicit_residual(alpha_mag, alpha0_mag, m: MediumParams, c, z):
    """Left minus right side of the integrated amplitude law (zero on solutions)."""
    K, A, _ = _coefficients(alpha0_mag, m, c)
    return (A * np.log(alpha_mag / alpha0_mag)
            + 2.0 * m.gamma_perp / m.gamma_par * (alpha_mag ** 2 - alpha0_mag ** 2) - K * z)


def solve_implicit(alpha0_mag, m: MediumParams, c, z):
    """|alpha(z)| from the implicit integrated law (safeguarded Newton in log |alpha|).

    ``z`` may be a scalar or an increasing array.
    """
    if alpha0_mag <= 0:
        raise ValueError("alpha0_mag must be positive")
    K, A, B = _coefficients(alpha0_mag, m, c)
    zs = np.atleast_1d(np.asarray(z, dtype=float))
    s, status = _roots.solve_log_many(A, B, 2.0, np.ascontiguousarray(K * zs), _ROOT_XTOL)
    if status != 0:
        lo, hi = _roots.log_bracket(A, B, 2.0, float(K * zs[-1]))
        raise RuntimeError(f"root refinement failed inside bracket "
                           f"[{alpha0_mag * math.exp(lo):.6g}, {alpha0_mag * math.exp(hi):.6g}]")
    out = alpha0_mag * np.exp(s)
    return float(out[0]) if np.ndim(z) == 0 else out


def weak_field(alpha0, m: MediumParams, c, z):
    """Unsaturated solution alpha0 exp[(a/2)(1 + i Delta) z / (1 + Delta^2)]."""
    a = m.small_signal_gain(c)
    Delta = m.Delta
    out = complex(alpha0) * np.exp(0.5 * a * (1 + 1j * Delta) * np.asarray(z) / (1 + Delta ** 2))
    if np.max(np.abs(out)) ** 2 >= WEAK_FRACTION * m.saturation_intensity:
        warnings.warn("weak-field formula used outside |alpha|^2 << gamma_perp gamma_par / 4",
                      ValidityWarning, stacklevel=2)
    return out


def strong_field(alpha0_mag2, m: MediumParams, c, z):
    """Saturated solution |alpha|^2 = |alpha0|^2 + (gamma_par gamma_perp a / 4) z."""
    slope = m.saturation_intensity * m.small_signal_gain(c)
    if alpha0_mag2 <= m.saturation_intensity or alpha0_mag2 <= m.delta ** 2:
        warnings.warn("strong-field formula used outside |alpha|^2 >> gamma_perp gamma_par / 4, "
                      "delta^2", ValidityWarning, stacklevel=2)
    return alpha0_mag2 + slope * np.asarray(z, dtype=float)


def strong_field_slope(m: MediumParams, c):
    return m.saturation_intensity * m.small_signal_gain(c)


def phase_along(alpha_mag_ratio, Delta):
    """Phase increment Delta * ln(|alpha(z)| / |alpha(0)|)."""
    ratio = np.asarray(alpha_mag_ratio, dtype=float)
    if np.any(ratio <= 0):
        raise ValueError("amplitude ratio must be positive")
    return Delta * np.log(ratio)


def refractive_index(m: MediumParams, omega):
    """n = 1 + (d0 g / (gamma_perp omega)) Delta / (1 + Delta^2)."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    Delta = m.Delta
    return 1.0 + m.d0 * m.g / (m.gamma_perp * omega) * Delta / (1.0 + Delta ** 2)
