"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands live in state spaces of different dimension."""


class MassMismatch(ValueError):
    """Balanced-transport distance requested between measures of unequal mass."""


class TooLarge(ValueError):
    """Exhaustive oracle invoked beyond its atom-count cap."""


class CflViolation(RuntimeError):
    """Explicit transport step would exceed the configured Courant limit."""


class PositivityLoss(RuntimeError):
    """A density or weight dropped below the negativity tolerance."""


class NegativeWeight(RuntimeError):
    """Reaction reweighting produced a negative atom weight (dt * M_alpha >= 1)."""


class H1Violation(ValueError):
    """Initial populations are not proportional, so the two-system bijection is undefined."""


class FrameMissing(KeyError):
    """No recorded frame close enough to the requested time."""


class ConfigMismatch(ValueError):
    """Macroscopic and microscopic configurations disagree on shared physics."""


class DegeneratePair(ValueError):
    """Probe pair at zero distance but with differing rate values (non-Lipschitz spec)."""
