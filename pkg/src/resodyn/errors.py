"""Exception types shared across the package."""


class ResodynError(Exception):
    """Base class for all package errors."""


class ConfigurationError(ResodynError):
    """Invalid artifact configuration (shapes, quadrature, malformed experiment files)."""


class HypothesisError(ConfigurationError):
    """A structural hypothesis of the resonance framework is violated.

    Examples: resonance-degree minima not < 1, a spectral shift at or above
    the truncated spectrum, kernel-membership ambiguity, resonance of the
    linearization at the origin.
    """


class AmbiguousResonanceError(HypothesisError):
    """A shift falls in the grey zone around an eigenvalue; the kernel
    tolerance must be adjusted before classification is trustworthy."""


class EvaluationError(ResodynError):
    """A field evaluation produced non-finite values."""


class UnboundedModeError(ResodynError):
    """A semigroup factor would overflow; identifies the offending mode."""

    def __init__(self, component: int, mode: int, exponent: float):
        self.component = component
        self.mode = mode
        self.exponent = exponent
        super().__init__(
            f"semigroup factor exp({exponent:.3g}) overflows on mode "
            f"(k={component}, j={mode})"
        )


class GradientStructureError(ResodynError):
    """Declared potential is inconsistent with the field components."""


class DivergenceSignal(ResodynError):
    """Raised by the integrator when the state norm exceeds the divergence
    threshold; carries the partial trajectory and the exit time."""

    def __init__(self, exit_time: float, trajectory=None):
        self.exit_time = exit_time
        self.trajectory = trajectory
        super().__init__(f"trajectory norm exceeded divergence threshold at t={exit_time:.6g}")
