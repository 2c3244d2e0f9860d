"""Exception hierarchy shared across the package."""


class SzegoError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SzegoError):
    """Invalid run configuration (unknown keys, bad types, missing fields)."""


class NonFiniteState(SzegoError):
    """A state coefficient became NaN or infinite during integration."""


class TruncationBreach(SzegoError):
    """The spectral tail fraction exceeded the truncation-validity guard."""


class DegenerateParameters(SzegoError):
    """Parameter combination on which the asymptotic constants are undefined."""


class NoContraction(SzegoError):
    """The Duhamel tail fixed point failed to contract (T too small)."""


class SigmaCheckFailed(SzegoError):
    """A constructed scattering-manifold point failed its verification checks."""


class NewtonDiverged(SzegoError):
    """Newton iteration failed to converge."""


class OrderingViolated(SzegoError):
    """Root placement violated the required strict ordering."""


class InequalityViolated(SzegoError):
    """The spectral-sum inequality failed (epsilon too large)."""


class InsufficientSamples(SzegoError):
    """Too few samples inside the requested fit window."""


class SearchFailed(SzegoError):
    """Numerical search exhausted its iteration/seed budget."""


class EigensolverError(SzegoError):
    """The Hermitian eigensolver failed to converge."""
