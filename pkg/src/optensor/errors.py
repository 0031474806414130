"""Exception types raised by the solvers and the harness."""


class OptensorError(Exception):
    """Base class for every error raised by this package."""


class OracleError(OptensorError, ValueError):
    """Bad input to a problem oracle (wrong shape, non-finite entries)."""


class UnsupportedOrderError(OptensorError, NotImplementedError):
    """Raised when a derivative order other than p=2 is requested."""


class SolverError(OptensorError, RuntimeError):
    """A numerical method failed to produce a valid result."""


class SubsolverError(SolverError):
    pass


class InnerLoopError(SolverError):
    pass


class BisectionError(SolverError):
    pass


class ConfigError(OptensorError, ValueError):
    """Invalid experiment configuration."""
