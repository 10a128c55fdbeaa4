"""Exception types raised by the solver, simulator and CLI."""


class StigmaModelError(Exception):
    """Base class for all model errors."""


class InvalidParams(StigmaModelError, ValueError):
    """Parameters violate a model invariant (e.g. b <= 1)."""


class Vacuous(StigmaModelError):
    """pi == 1: there are no strategic players, so no equilibrium to compute."""


class Singular(StigmaModelError, ZeroDivisionError):
    """The interior-threshold denominator b*pi*(1-alpha) - 1 vanishes."""


class Unsupported(StigmaModelError):
    """Operation is only defined for a narrower set of inputs."""


class NoSignChange(StigmaModelError):
    """Bisection bracket does not straddle a root."""


class Continuum(StigmaModelError):
    """Every cutoff in the bracket is a fixed point."""


class EmptyInteriorRegion(StigmaModelError):
    """No grid point admits an interior equilibrium."""


class InsufficientSamples(StigmaModelError):
    """A simulation stratum has too few observations for a comparison."""
