"""Exception types shared across the package."""


class IbgError(Exception):
    """Base class for all package errors."""


class OutOfDomain(IbgError):
    """A point lies outside the chart box or inside an excluded region."""


class StencilOverflow(IbgError):
    """A finite-difference stencil would leave the chart box."""


class SingularMetric(IbgError):
    """Metric not invertible (or signature mismatch) at a sampled point."""


class NotSymmetric(IbgError):
    pass


class NotTraceless(IbgError):
    pass


class TypeIUnsupported(IbgError):
    """Closed forms exist only for types 0, D, II, N, III."""


class BlowUp(IbgError):
    """ODE solution exceeded the magnitude threshold."""

    def __init__(self, message, last_good_r=None):
        super().__init__(message)
        self.last_good_r = last_good_r


class AlgebraMismatch(IbgError):
    pass


class OutOfRange(IbgError):
    pass


class NearPole(IbgError):
    """Spectral parameter too close to the base locus of the conic pencil."""


class DegenerateHiggs(IbgError):
    """Higgs field fails the surjectivity/nonvanishing condition."""


class NullOrbit(IbgError):
    """Symmetry orbits are null; reduction not supported."""


class SingularFrame(IbgError):
    pass


class SingularFraming(IbgError):
    pass


class NonSymmetrizable(IbgError):
    """Gauge rotation failed to symmetrize the framing derivative."""


class NonOrthonormalFrame(IbgError):
    pass


class UnknownEntry(IbgError):
    pass


class BadParams(IbgError):
    pass


class ConfigError(IbgError):
    """Invalid pipeline configuration (CLI exit code 2)."""
