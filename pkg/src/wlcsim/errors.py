"""Exception hierarchy for simulation and analysis failures."""


class SimulationError(Exception):
    """Base class for all wlcsim errors."""


class StepUnstable(SimulationError):
    """Atomic time step left the physical manifold (trace drift > 1e-6)."""


class DegenerateSteadyState(SimulationError):
    """Liouvillian null space has dimension > 1 and no initial state was given."""


class SingularLinearSystem(SimulationError):
    """Linearized probe response has no steady solution (undamped resonance)."""


class CflViolation(SimulationError):
    """Courant number above 1; the advection scheme would be unstable."""


class NoConvergence(SimulationError):
    """Relaxation or fixed-point iteration did not settle within its budget."""


class NoPeak(SimulationError):
    """Time series has no interior intensity maximum to interpolate."""


class ZeroEntryAmplitude(SimulationError):
    """Susceptibility extraction needs a nonzero entry-face amplitude."""


class IllConditionedFit(SimulationError):
    """Dispersion fit window too narrow or samples degenerate."""


class OutOfRange(SimulationError):
    """Requested detuning lies outside the sampled susceptibility curve."""


class AboveLasingThreshold(SimulationError):
    """Round-trip amplitude >= 1; the cavity buildup formula diverges."""


class NoHalfCrossing(SimulationError):
    """Resonance profile never falls below half maximum inside its range."""


class InsufficientGroupIndex(SimulationError):
    """Group index above -1; no medium length inside the cavity satisfies the WLC condition."""


class NonpositiveCubicTerm(SimulationError):
    """Cubic dispersion coefficient must be positive for a finite enhanced bandwidth."""


class ConfigError(SimulationError):
    """Scenario configuration failed to parse or validate."""
