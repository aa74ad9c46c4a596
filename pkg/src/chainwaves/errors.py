"""Exception types shared across the package."""


class ChainwavesError(Exception):
    """Base class for all package-specific errors."""


class GridMismatchError(ChainwavesError):
    """Two operands live on different grids."""


class DomainTooSmallError(ChainwavesError):
    """The requested profile does not decay below threshold at the boundary."""


class NotEvenError(ChainwavesError):
    """An operation restricted to the even subspace received odd contamination."""


class NearSingularError(ChainwavesError):
    """The linearized operator is numerically singular on the even subspace."""


class NoConvergenceError(ChainwavesError):
    """An iteration exhausted its budget without meeting its tolerance."""


class WindowOverflowError(ChainwavesError):
    """Wave support plus travel distance does not fit the measurement window."""


class EmptyWindowError(ChainwavesError):
    """No samples fall inside the requested fit window."""


class ConfigError(ChainwavesError):
    """A run configuration failed schema or consistency validation."""
