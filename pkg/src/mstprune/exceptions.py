"""Exception hierarchy shared by every pipeline stage."""


class MstPruneError(ValueError):
    """Base class for all errors raised by :mod:`mstprune`."""


class ParseError(MstPruneError):
    """Malformed input file (bad date, bad number, bad header)."""


class SchemaError(MstPruneError):
    """Structurally invalid input, such as duplicate ticker labels."""


class DomainError(MstPruneError):
    """A value lies outside the domain an operation accepts."""


class InsufficientDataError(MstPruneError):
    """Too few rows or windows for the requested operation."""


class DegenerateSeriesError(MstPruneError):
    """A series has no variation, so its rank correlation is undefined."""

    def __init__(self, ticker):
        self.ticker = ticker
        super().__init__(f"series {ticker!r} is constant; rank correlation undefined")


class BoundsError(MstPruneError, IndexError):
    """Requested row or window range falls outside the data."""


class CoverageError(MstPruneError):
    """A survivability map is missing an entry for a tree edge."""


class ConvergenceError(MstPruneError):
    """Iterative solver failed to converge."""

    def __init__(self, message, residual):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")
