"""
Witness Forge errors.

Every failure the library reports is a ValueError subclass, so front ends can keep
catching ValueError and printing the message, the way the command-line tool does.
"""


class WitnessForgeError(ValueError):
    """Base class for all library errors."""


class SchemaError(WitnessForgeError):
    """A JSON document does not follow the state/witness/config schema."""


class ImaginaryResidual(WitnessForgeError):
    """An expectation value that must be real has a significant imaginary part."""


class CutoffTooSmall(WitnessForgeError):
    """The Fock cutoff loses more probability mass than the tolerance allows."""


class DegenerateNorm(WitnessForgeError):
    """A state norm underflows, so the state cannot be normalized."""


class ModelMismatch(WitnessForgeError):
    """State and witness disagree on the number of modes."""


class QuadratureNotConverged(WitnessForgeError):
    """Doubling the Gauss-Hermite order keeps changing the result."""


class DegenerateWeights(WitnessForgeError):
    """All block weights vanish, so the block update is undefined."""


class NotConverged(WitnessForgeError):
    """An iterative solver hit its iteration limit without meeting tolerance."""


class NotCollinear(WitnessForgeError):
    """Displacements do not share a common phase per mode."""


class NoRealRoot(WitnessForgeError):
    """The stationarity polynomial has no real root."""


class ZeroEfficiency(WitnessForgeError):
    """A detection efficiency is zero or out of range."""


class NonpositiveScale(WitnessForgeError):
    """An affine rescaling uses a nonpositive factor."""


class NoSignChange(WitnessForgeError):
    """The witness value does not change sign on the given interval."""


class InvalidCovariance(WitnessForgeError):
    """A covariance matrix violates symmetry or the uncertainty relation."""
