"""Exception types shared across the package."""


class NrqaeError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(NrqaeError):
    """Invalid experiment configuration or CLI arguments."""


class NonPhysicalChannelError(NrqaeError):
    """A channel specification produced an unusable superoperator."""


class DepthGuardError(NrqaeError):
    """A depth iteration was rejected (division guard or empty candidates)."""


class DegenerateProblemError(NrqaeError):
    """The two prepared states do not span a two-dimensional plane."""


class EstimationFailure(NrqaeError):
    """Every iteration of an estimation run failed."""
