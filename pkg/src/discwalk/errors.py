"""Exception hierarchy shared by all discwalk modules."""


class DiscwalkError(Exception):
    """Base class for all errors raised by this package."""


class UnknownPreset(DiscwalkError):
    pass


class FiniteCF(DiscwalkError):
    """A custom continued fraction terminated before reaching full precision.

    A finite CF denotes a rational number; every result used here requires an
    irrational angle, so resolution refuses to proceed.
    """


class UnboundedQuotients(DiscwalkError):
    """A custom CF contains a partial quotient above its declared bound."""


class HeightOverflow(DiscwalkError):
    """Walk height left the 64-bit range (unreachable at supported horizons)."""


class InsufficientSamples(DiscwalkError):
    pass


class WindowExceeded(DiscwalkError):
    """A symbol-window shift left the materialized window.

    ``height`` carries the offending offset so the caller can re-run with a
    larger budget.
    """

    def __init__(self, message, height=None):
        super().__init__(message)
        self.height = height


class PaperModeNotQueryable(DiscwalkError):
    """Pointwise membership is not available for log-space schedules."""


class MissingConstants(DiscwalkError):
    pass


class OverlappingIntervals(DiscwalkError):
    pass


class BadOrder(DiscwalkError):
    pass


class EmptyAfterFilter(DiscwalkError):
    pass


class BudgetExceeded(DiscwalkError):
    pass


class MissingEntries(DiscwalkError):
    pass


class ConfigError(DiscwalkError):
    pass
