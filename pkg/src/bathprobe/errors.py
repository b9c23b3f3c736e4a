"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A model or system parameter is outside its physical domain."""


class ConfigError(ValueError):
    """Inconsistent grids, detunings, or run configuration."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class InstabilityError(RuntimeError):
    """Trajectory blow-up detected during time integration."""


class NumericalError(RuntimeError):
    """NaN or other numerical failure during integration."""


class LosslessResonanceError(RuntimeError):
    """The response has a pole on the real axis (no damping at resonance).

    Frequency-domain evaluation of the Green's function is ill-defined in
    this case; use the analytic undamped branch instead.
    """


class StabilityError(RuntimeError):
    """Fixed-step integrator produced unphysical energy growth."""
