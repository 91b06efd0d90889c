"""Percolation laboratory for slightly supercritical bond percolation on
nonamenable transitive graphs (regular trees and tree-cross-line products)."""

__version__ = "0.1.0"


class PercolabError(Exception):
    """Base class for all errors raised by percolab."""


class ValidationError(PercolabError, ValueError):
    """Malformed input: bad vertex code, empty edge list, bad window, ..."""


class ResourceError(PercolabError):
    """A configured memory or size cap was exceeded."""

    def __init__(self, message, attained=None):
        super().__init__(message)
        self.attained = attained


class DivergenceError(PercolabError):
    """A generating function was evaluated at or beyond its radius of convergence."""

    def __init__(self, message, alpha_p=None):
        super().__init__(message)
        self.alpha_p = alpha_p


class PrecisionError(PercolabError):
    """A truncation or tail bound is too large relative to the computed value."""


class NumericError(PercolabError):
    """An iterative numerical method failed to converge."""


class ExperimentError(PercolabError):
    """An experiment could not produce a result (e.g. zero survivors)."""
