"""Exception types raised across the package."""


class RichnessError(Exception):
    """Base class for all errors raised by this package."""


class InputError(RichnessError, ValueError):
    """Malformed or unreadable sample data."""


class EmptySample(InputError):
    pass


class InvalidCount(InputError):
    pass


class InvalidPrevalence(InputError):
    pass


class DegeneracyError(RichnessError, ValueError):
    """The sample carries no information for the requested quantity."""


class DegenerateAllSingletons(DegeneracyError):
    """Every observed species was seen exactly once (n1 == n, so u == 1).

    None of the estimators is defined in this case since they all divide by
    ``n - n1``.
    """

    def __init__(self, msg=None):
        super().__init__(
            msg or "all observations are singletons (n1 == n, u == 1); "
            "the number of species cannot be estimated"
        )


class NoUnobservedSpecies(DegeneracyError):
    pass


class PoleError(RichnessError, ValueError):
    """Function evaluated at one of its poles."""


class EqualIndices(RichnessError, ValueError):
    pass


class InvalidT(RichnessError, ValueError):
    pass


class InfeasibleTail(RichnessError, ValueError):
    pass


class SolverError(RichnessError, RuntimeError):
    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


class CIUnreliable(UserWarning):
    """Too many bootstrap resamples were degenerate."""
