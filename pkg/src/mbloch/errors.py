"""Exception and warning types shared across modules."""
from .ode import IntegrationError


class PhysicalRegimeError(ValueError):
    """Requested state does not exist for these parameters (e.g. below threshold)."""


class ValidityWarning(UserWarning):
    """An approximation is used outside the regime where it is accurate."""


class BelowThresholdWarning(UserWarning):
    """Pump below the lasing threshold; the intensity was clamped to zero."""


__all__ = ["IntegrationError", "PhysicalRegimeError", "ValidityWarning", "BelowThresholdWarning"]
