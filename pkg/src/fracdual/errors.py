"""Exception types shared across the package."""


class FracdualError(Exception):
    pass


class DomainParameterError(FracdualError, ValueError):
    """Parameter outside its admissible range."""


class SingularityError(FracdualError, ValueError):
    """Evaluation or quadrature requested at/over the kernel singularity."""


class DegenerateDomainError(FracdualError, ValueError):
    """Domain mask has empty interior."""


class InvalidMeasureError(FracdualError, ValueError):
    """Measure violates its invariants (e.g. atom outside the domain)."""


class MeasureSupportError(FracdualError, ValueError):
    """Atom falls in a cell whose surrounding nodes are all exterior."""


class AssemblyError(FracdualError, RuntimeError):
    """Non-finite weight produced during operator assembly."""


class DimensionError(FracdualError, ValueError):
    """Shape mismatch between operator and data."""


class ConvergenceError(FracdualError, RuntimeError):
    """Iterative solver failed to reach the requested residual."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ResolutionError(FracdualError, ValueError):
    """Requested radius or scale below grid resolution."""


class UndefinedRatioError(FracdualError, ValueError):
    """Ratio of norms requested for the zero function."""


class HypothesisViolationError(FracdualError, ValueError):
    """A theorem's hypothesis (e.g. p > n/alpha) is violated; the check refuses."""


class DivergentPotentialError(FracdualError, ValueError):
    """Riesz potential requested with alpha >= n."""


class BoundViolationError(FracdualError, ValueError):
    """Measured kernel bound falls outside the declared interval."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConfigError(FracdualError, ValueError):
    """Experiment config failed to parse or validate."""
