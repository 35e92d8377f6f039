"""Exception hierarchy."""


class QDSError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(QDSError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class ConfigurationError(QDSError, ValueError):
    """Parameters are individually valid but jointly unusable."""


class EstimationError(QDSError, ArithmeticError):
    """A finite-size estimate degenerated (e.g. a zero single-photon lower bound)."""


class GammaDomainError(EstimationError):
    """The phase-error correction term is undefined for the given inputs."""


class InfeasibleError(QDSError):
    """The channel cannot support the signature scheme."""


class InsufficientCountsError(QDSError):
    """A simulated key generation run produced too few sifted counts."""
