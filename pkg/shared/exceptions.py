"""
Exception hierarchy for KloosterLab.

The CLI maps these onto exit codes, see ``experiments.runner``.
"""


class KloosterLabError(Exception):
    """Base class for every error raised by the package."""


class DomainError(KloosterLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedParameterError(DomainError):
    """The parameter is meaningful in general but not supported here."""


class DegeneratePolynomialError(DomainError):
    """A linear polynomial a*x + b has leading coefficient divisible by p."""


class CostGuardError(KloosterLabError):
    """The requested computation exceeds a configured cost limit."""


class ConfigValidationError(KloosterLabError):
    """An experiment configuration is incomplete or ill-typed."""


class CacheFormatError(KloosterLabError):
    """A cached table file is corrupt or does not match its request."""
