"""Semiclassical laser models: Bloch equations, saturable amplification,
ring-laser steady states and Lorenz-type single-mode dynamics."""
from ._jit import backend
from .errors import (BelowThresholdWarning, IntegrationError, PhysicalRegimeError,
                     ValidityWarning)
from .lorenz import ComplexModeState, LorenzState, SingleModeParams
from .multimode import FieldOnRing, ModeSpectrum
from .ode import Trajectory
from .params import (CavityParams, FourLevelParams, MediumParams, ThreeLevelParams,
                     map_four_level, map_three_level)

__version__ = "0.1.0"

__all__ = [
    "backend", "BelowThresholdWarning", "IntegrationError", "PhysicalRegimeError",
    "ValidityWarning", "ComplexModeState", "LorenzState", "SingleModeParams", "FieldOnRing",
    "ModeSpectrum", "Trajectory", "CavityParams", "FourLevelParams", "MediumParams",
    "ThreeLevelParams", "map_four_level", "map_three_level",
]
