"""Exception and warning types shared across the package."""


class SimulationError(Exception):
    """Base class for all physics-level errors raised by this package."""


class InvalidExtentError(SimulationError):
    """Grid construction parameters are inconsistent."""


class SupportError(SimulationError):
    """A prepared state is not safely contained inside the grid."""


class ProbeRangeError(SimulationError):
    """A flux probe lies outside the usable grid interior."""


class ZeroNormError(SimulationError):
    """An operation that divides by the state norm got a null state."""


class ZeroAbsorptionError(SimulationError):
    """The detector removed no appreciable norm; no click statistics exist."""


class ZeroOverlapError(SimulationError):
    """The state has no support under the detector window; collapse undefined."""


class ZeroTransmissionError(SimulationError):
    """No appreciable probability crossed the arrival probe."""


class ExcessiveBackflowError(SimulationError):
    """Negative-flux content at the arrival probe exceeds the trusted budget."""


class EmptyEnsembleError(SimulationError):
    """An ensemble average was requested over zero total weight."""


class AllReflectedError(SimulationError):
    """Every detected branch was reflected; the traversal distribution is empty."""


class TauGridCoverageError(SimulationError):
    """Appreciable arrival mass falls outside the requested delay grid."""


class NonpositiveDenominatorError(SimulationError):
    """A normalized first moment has a vanishing or negative denominator."""


class ConfigError(Exception):
    """Bad run configuration (unknown key, unparsable value, missing file)."""


class HorizonWarning(UserWarning):
    """Flux at the arrival probe had not decayed when the horizon was reached."""


class BoundaryContaminationWarning(UserWarning):
    """Appreciable amplitude reached the hard-wall grid edges during a run."""
