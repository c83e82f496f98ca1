"""Physical parameters and the three-/four-level to two-level mappings.

Rates are stored in whatever time unit the caller uses; every formula in the
package is homogeneous in that unit. :meth:`MediumParams.normalized` rescales
to units of the coherence decay rate.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

from .errors import ValidityWarning

DEFAULT_VALIDITY_RATIO = 100.0
# below this, |ln R^2| / (1 - R^2) is evaluated from its series
_LOSS_SERIES_CUTOFF = 1e-8


def _require(cond, message):
    if not cond:
        raise ValueError(message)


@dataclass(frozen=True)
class MediumParams:
    """Effective two-level medium.

    ``g`` is the radiation-matter coupling, ``d0`` the unsaturated inversion
    and ``delta`` the detuning omega - omega_21 of the field from the atoms.
    """

    gamma_perp: float
    gamma_par: float
    g: float = 0.0
    d0: float = 0.0
    delta: float = 0.0
    source: str = "two-level"

    def __post_init__(self):
        _require(self.gamma_perp > 0, "gamma_perp must be positive")
        _require(self.gamma_par > 0, "gamma_par must be positive")
        _require(abs(self.d0) <= 1.0, "d0 must lie in [-1, 1]")
        _require(math.isfinite(self.g) and math.isfinite(self.delta), "g and delta must be finite")
        if self.gamma_perp < 0.5 * self.gamma_par * (1 - 1e-12):
            warnings.warn("gamma_perp < gamma_par/2 violates the dephasing bound",
                          ValidityWarning, stacklevel=3)

    @property
    def Delta(self):
        """Detuning in units of gamma_perp."""
        return self.delta / self.gamma_perp

    @property
    def saturation_intensity(self):
        """gamma_perp * gamma_par / 4, the |alpha|^2 scale of gain saturation."""
        return 0.25 * self.gamma_perp * self.gamma_par

    def small_signal_gain(self, c):
        """Gain per unit length ``a = 2 d0 g / (c gamma_perp)``; negative for absorbers."""
        return 2.0 * self.d0 * self.g / (c * self.gamma_perp)

    def normalized(self):
        """Same medium with time measured in units of 1/gamma_perp."""
        gp = self.gamma_perp
        return replace(self, gamma_perp=1.0, gamma_par=self.gamma_par / gp,
                       g=self.g / gp ** 2, delta=self.delta / gp)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class ThreeLevelParams:
    gamma_21: float
    gamma_31: float
    gamma_32: float
    gamma_perp: float
    R_pump: float

    def __post_init__(self):
        for name in ("gamma_21", "gamma_31", "gamma_32", "gamma_perp", "R_pump"):
            _require(getattr(self, name) >= 0, f"{name} must be non-negative")

    def validity_issues(self, ratio=DEFAULT_VALIDITY_RATIO):
        others = max(self.gamma_21, self.gamma_31, self.gamma_perp, self.R_pump)
        if self.gamma_32 < ratio * others:
            return [f"gamma_32 = {self.gamma_32:g} is not {ratio:g}x larger than the other rates"]
        return []


@dataclass(frozen=True)
class FourLevelParams:
    gamma_10: float
    gamma_20: float
    gamma_21: float
    gamma_30: float
    gamma_31: float
    gamma_32: float
    gamma_perp: float
    R_pump: float

    def __post_init__(self):
        for name in ("gamma_10", "gamma_20", "gamma_21", "gamma_30", "gamma_31", "gamma_32",
                     "gamma_perp", "R_pump"):
            _require(getattr(self, name) >= 0, f"{name} must be non-negative")

    def validity_issues(self, ratio=DEFAULT_VALIDITY_RATIO):
        issues = []
        others = max(self.gamma_20, self.gamma_21, self.gamma_30, self.gamma_31,
                     self.gamma_perp, self.R_pump)
        if self.gamma_32 < ratio * others:
            issues.append(f"gamma_32 = {self.gamma_32:g} is not {ratio:g}x larger than the other rates")
        lower = max(self.gamma_20, self.gamma_21, self.gamma_perp, self.R_pump)
        if self.gamma_10 < ratio * lower:
            issues.append(f"gamma_10 = {self.gamma_10:g} does not drain the lower level fast enough")
        return issues


@dataclass(frozen=True)
class CavityParams:
    """Ring cavity: amplitude reflectivity ``R``, medium and cavity lengths, light speed."""

    R: float
    L_m: float
    L_c: float
    c: float = 1.0

    def __post_init__(self):
        _require(0 < self.R <= 1, "amplitude reflectivity R must satisfy 0 < R <= 1")
        _require(0 < self.L_m <= self.L_c, "lengths must satisfy 0 < L_m <= L_c")
        _require(self.c > 0, "c must be positive")

    @classmethod
    def from_power_reflectivity(cls, R2, L_m, L_c, c=1.0):
        _require(0 < R2 <= 1, "power reflectivity R^2 must satisfy 0 < R^2 <= 1")
        return cls(math.sqrt(R2), L_m, L_c, c)

    @property
    def R2(self):
        return self.R * self.R

    @property
    def transmission(self):
        """1 - R^2, computed without cancellation."""
        return (1.0 - self.R) * (1.0 + self.R)

    @property
    def log_loss(self):
        """|ln R^2|."""
        return -2.0 * math.log(self.R)

    @property
    def loss_ratio(self):
        """|ln R^2| / (1 - R^2); tends to 1 as R -> 1."""
        x = self.transmission
        if x < _LOSS_SERIES_CUTOFF:
            return 1.0 + 0.5 * x
        return -math.log1p(-x) / x

    @property
    def kappa(self):
        """Cavity damping rate c |ln R^2| / (2 L_c)."""
        return self.c * self.log_loss / (2.0 * self.L_c)

    @property
    def delay(self):
        """Time (L_c - L_m)/c spent outside the medium per round trip."""
        return (self.L_c - self.L_m) / self.c

    @property
    def free_spectral_range(self):
        """Angular mode spacing 2 pi c / L_c."""
        return 2.0 * math.pi * self.c / self.L_c

    @property
    def v(self):
        """Advection speed c L_m / L_c of the uniform-field-limit field."""
        return self.c * self.L_m / self.L_c


def _warn_validity(issues):
    for msg in issues:
        warnings.warn(msg + "; the two-level reduction may be inaccurate", ValidityWarning,
                      stacklevel=3)


def map_three_level(p: ThreeLevelParams, g=0.0, delta=0.0, ratio=DEFAULT_VALIDITY_RATIO):
    """Effective two-level medium of an incoherently pumped three-level scheme.

    gamma_par -> R + gamma_21 and d0 -> (R - gamma_21)/(R + gamma_21).
    """
    total = p.R_pump + p.gamma_21
    if total == 0:
        raise ValueError("R_pump + gamma_21 = 0 leaves d0 undefined")
    _warn_validity(p.validity_issues(ratio))
    return MediumParams(gamma_perp=p.gamma_perp, gamma_par=total, g=g,
                        d0=(p.R_pump - p.gamma_21) / total, delta=delta, source="three-level")


def map_four_level(p: FourLevelParams, g=0.0, delta=0.0, ratio=DEFAULT_VALIDITY_RATIO):
    """Effective two-level medium of a four-level scheme: d0 -> R/(gamma_20 + gamma_21 + R)."""
    total = p.gamma_20 + p.gamma_21 + p.R_pump
    if total == 0:
        raise ValueError("gamma_20 + gamma_21 + R_pump = 0 leaves d0 undefined")
    _warn_validity(p.validity_issues(ratio))
    return MediumParams(gamma_perp=p.gamma_perp, gamma_par=total, g=g,
                        d0=p.R_pump / total, delta=delta, source="four-level")


def three_level_d0(R_over_gamma):
    """d0 of the three-level mapping as a function of R/gamma_21 (vectorised)."""
    return (R_over_gamma - 1.0) / (R_over_gamma + 1.0)


def four_level_d0(R_over_gamma):
    """d0 of the four-level mapping as a function of R/(gamma_20 + gamma_21)."""
    return R_over_gamma / (R_over_gamma + 1.0)


def gain_parameter(m: MediumParams, cav: CavityParams):
    """G = 2 g L_m / (gamma_perp c |ln R^2|), so that r = G d0."""
    if cav.R >= 1.0:
        raise ValueError("lossless cavity: r undefined")
    return 2.0 * m.g * cav.L_m / (m.gamma_perp * cav.c * cav.log_loss)


def effective_pump_r(m: MediumParams, cav: CavityParams):
    """Dimensionless pump r = a L_m / |ln R^2| (gain-to-loss ratio)."""
    return gain_parameter(m, cav) * m.d0
