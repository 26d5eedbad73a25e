"""Exception types raised by the library."""

from __future__ import annotations


class QAuctionError(Exception):
    """Base class for all library errors."""


class NoPointwiseDensityError(QAuctionError, ValueError):
    """A strategy with point masses was asked for a pointwise density."""


class TieAmbiguityError(QAuctionError, ValueError):
    """Two bidders can tie with positive probability at the requested log-price."""


class DomainError(QAuctionError, ValueError):
    """An argument lies outside the domain of a formula."""


class NumericalFailureError(QAuctionError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance.

    ``achieved`` holds the error estimate that was actually reached.
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class ConfigError(QAuctionError, ValueError):
    """A JSON configuration could not be turned into model objects.

    ``field`` is a dotted path to the offending entry, e.g. ``bidders[1].sigma``.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
