"""Exception hierarchy.

Errors split into two families that the CLI maps onto exit codes:
``DataError`` (bad or missing input, exit 2) and ``FitError`` (numerical
failures, exit 3). ``ConfigError`` covers invalid thresholds and config
files (exit 4).
"""


class HypergrowthError(Exception):
    """Base class for every error raised by this package."""


class DataError(HypergrowthError, ValueError):
    """Input data is malformed, missing or inconsistent."""


class FitError(HypergrowthError, ValueError):
    """A numerical operation cannot be carried out on valid input."""


class ConfigError(HypergrowthError, ValueError):
    """A threshold, grid or config file is invalid."""


# numerical


class DomainError(FitError):
    """Evaluation at or beyond a model's singularity (or guard band)."""


class InsufficientData(FitError):
    """Too few points for the requested operation."""


class NotGrowthLike(FitError):
    """Reciprocal regression slope indicates a decaying series.

    The fitted line is attached so a caller may still inspect it.
    """

    def __init__(self, message, intercept, slope):
        super().__init__(message)
        self.intercept = intercept
        self.slope = slope


class BadGrid(FitError):
    """Sample abscissae are not strictly increasing."""


class SingleSegment(FitError):
    """A polyline has fewer than two segments."""


class OutOfSpan(FitError):
    """Abscissa outside a polyline's knot span."""


class NoValidLag(FitError):
    """No lag keeps enough shifted points inside the model domain."""


# data


class ParseError(DataError):
    """A CSV cell or row could not be parsed."""

    def __init__(self, message, row=None, column=None):
        if row is not None:
            message = f"{message} (row {row}, column {column})"
        super().__init__(message)
        self.row = row
        self.column = column


class DuplicateYear(DataError):
    pass


class NonPositiveValue(DataError):
    pass


class UnitMismatch(DataError):
    pass


class MismatchedRegions(DataError):
    pass


class NoCommonYears(DataError):
    pass


class YearUnavailable(DataError):
    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(
            "fewer than 2 regions report in year(s): "
            + ", ".join(f"{y:g}" for y in self.missing)
        )


class RegionNotFound(DataError):
    def __init__(self, region, available):
        self.region = region
        self.available = sorted(available)
        super().__init__(
            f"region {region!r} not in dataset; available: "
            + ", ".join(self.available)
        )


class QuorumError(DataError):
    """Fewer regions than a cross-region operation needs."""


class InvalidDataset(DataError):
    pass


class SchemaVersionMismatch(DataError):
    pass


class CorruptFile(DataError):
    pass
