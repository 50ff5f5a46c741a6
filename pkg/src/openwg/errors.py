"""Exception types shared across the package."""


class OpenwgError(Exception):
    """Base class for all package-specific errors."""


class RootBracketFailure(OpenwgError):
    """A bracketed characteristic-equation root failed to converge."""


class QuadratureFailure(OpenwgError):
    """Adaptive quadrature of an overlap integral did not converge."""


class SystemNotSingleMode(OpenwgError):
    """The system waveguide supports more than one guided mode."""


class NegativeCouplingProduct(OpenwgError):
    """g_s * g_e < 0: the overlap sign convention has been violated."""


class StepSizeUnderflow(OpenwgError):
    """Adaptive step control collapsed during propagation."""


class DomainError(OpenwgError):
    """Argument outside the physically meaningful domain."""


class NonDecayingTrace(OpenwgError):
    """No initial decaying window found in an energy trace."""


class NoRevivalFound(OpenwgError):
    """No qualifying revival peak in an energy trace."""


class GridTooCoarse(OpenwgError):
    """Transverse grid spacing does not resolve the in-medium wavelength."""


class ConfigError(OpenwgError):
    """Invalid run configuration."""
