"""Exception types shared across the package."""


class RegretDroError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(RegretDroError):
    """Vector or distribution dimension does not match the feasible set."""


class UnsupportedCombination(RegretDroError):
    """The requested (feasible set, norm) pairing is outside the supported matrix.

    Combinations are closed on purpose: general norm maximization over a
    compact set is intractable, so anything without a certified exact route
    is refused instead of silently approximated.
    """


class NotInFeasibleSet(RegretDroError):
    """Worst-case evaluation was requested at a point outside the feasible set."""


class InvalidAlpha(RegretDroError):
    """CVaR confidence level must lie in [0, 1)."""


class NumericalBreakdown(RegretDroError):
    """Simplex pivoting hit a numerically unusable pivot or the pivot cap."""


class DimensionTooLarge(RegretDroError):
    """Brute-force grid oracles only run in dimension <= 3."""


class InfeasibleGrid(RegretDroError):
    """Transport oracle LP had no feasible plan (cannot happen when the grid
    contains every nominal atom)."""


class ConfigError(RegretDroError):
    """Invalid problem configuration; carries the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
