"""Exception types shared across the package."""


class FloquetError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(FloquetError):
    """Operands act on different qudit counts or different moduli."""


class InconsistentGroupError(FloquetError):
    """A stabilizer group generates a nontrivial phase times the identity."""


class NonCommutingError(FloquetError):
    """Generators handed to a stabilizer group fail to commute."""


class NonMeasurableError(FloquetError):
    """Measured operator does not have spectrum in the Nth roots of unity."""


class ColoringError(FloquetError):
    """Requested lattice dimensions are incompatible with the 3-coloring."""


class OddPathError(FloquetError):
    """No odd-length path exists between the requested endpoints."""


class CheckRemovedError(FloquetError):
    """Check operator requested on an edge disabled by a defect line."""


class DefectConflictError(FloquetError):
    """A new defect line overlaps the checks of an existing one."""


class PathCompletionError(FloquetError):
    """An open path cannot be completed to a contractible clockwise loop."""


class InferenceImpossibleError(FloquetError):
    """Schedule cannot infer the static stabilizers of a defect line."""


class InsufficientDefectsError(FloquetError):
    """Operation requires at least two defect lines."""


class DecompositionError(FloquetError):
    """No valid 2-body re-pairing of a fermion string exists."""


class GraphConstructionError(FloquetError):
    """A modeled error flips a number of detections incompatible with matching."""


class ConfigError(FloquetError):
    """Run configuration is malformed."""
