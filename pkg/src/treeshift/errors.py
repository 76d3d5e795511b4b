"""Exception types raised across the package."""

from __future__ import annotations


class TreeShiftError(Exception):
    """Base class for all library errors."""


class OversizeRegion(TreeShiftError):
    pass


class DepthExceeded(TreeShiftError):
    """A query needs vertices beyond the materialized depth; re-materialize deeper."""

    def __init__(self, vertex: int, needed: int, available: int):
        self.vertex = vertex
        self.needed = needed
        self.available = available
        super().__init__(
            f"vertex {vertex}: query needs depth {needed}, region materialized to {available}"
        )


class NotDescendant(TreeShiftError):
    pass


class InfiniteMeasure(TreeShiftError):
    """Reweighting by a negative power of s produced infinite mass."""


class ExtensionImpossible(TreeShiftError):
    def __init__(self, integral, theta):
        self.integral = integral
        self.theta = theta
        super().__init__(f"integral of 1/s is {integral}, exceeds theta = {theta}")


class ConsistencyViolation(TreeShiftError):
    def __init__(self, vertex: int, excess):
        self.vertex = vertex
        self.excess = excess
        super().__init__(f"consistency condition fails at vertex {vertex} (excess {excess})")


class KappaViolated(TreeShiftError):
    pass


class ParseError(TreeShiftError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class ValidationError(TreeShiftError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
