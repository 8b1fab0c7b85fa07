"""Exception types raised across the package."""


class ChartError(ValueError):
    """A chart operation hit the pole of the transition map."""


class ChartTearingError(ValueError):
    """Neighbouring nodes cannot be brought into a common chart."""


class GridTooSmallError(ValueError):
    """The grid has too few nodes for the requested stencil."""


class InvalidFamilyError(ValueError):
    """A solution family violates its validity predicate."""


class NotProperlyExactError(ValueError):
    """The perturbation has no compactly supported potential."""


class SolverBreakdown(RuntimeError):
    """The discrete linear operator could not be factorised."""


class ConfigError(ValueError):
    """An experiment configuration failed validation."""
