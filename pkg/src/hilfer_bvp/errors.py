"""Exception hierarchy shared by every module of the toolkit."""

from __future__ import annotations


class HilferBVPError(Exception):
    """Base class. ``kind`` is the machine-readable error name used by the CLI."""

    kind = "HilferBVPError"

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": str(self)}


# -- expression language --------------------------------------------------


class ExprSyntaxError(HilferBVPError):
    kind = "SyntaxError"

    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{message} at byte offset {offset}{detail}")

    def to_dict(self) -> dict:
        return {**super().to_dict(), "offset": self.offset, "expected": sorted(self.expected)}


class UnknownIdentifier(HilferBVPError):
    kind = "UnknownIdentifier"

    def __init__(self, name: str, offset: int | None = None):
        self.name = name
        self.offset = offset
        where = f" at byte offset {offset}" if offset is not None else ""
        super().__init__(f"unknown identifier {name!r}{where}")


class UnboundVariable(HilferBVPError):
    kind = "UnboundVariable"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"variable {name!r} is not bound")


class DomainError(HilferBVPError):
    kind = "DomainError"

    def __init__(self, op: str, argument):
        self.op = op
        self.argument = argument
        super().__init__(f"{op}: argument {argument!r} outside the domain")


# -- psi / quadrature -----------------------------------------------------


class OutOfDomain(HilferBVPError):
    kind = "OutOfDomain"

    def __init__(self, t: float, a: float | None = None, T: float | None = None):
        self.t = t
        where = f" [{a}, {T}]" if a is not None else ""
        super().__init__(f"t={t!r} lies outside the interval{where}")


class OutOfRange(HilferBVPError):
    kind = "OutOfRange"

    def __init__(self, tau: float, lo: float | None = None, hi: float | None = None):
        self.tau = tau
        where = f" [{lo}, {hi}]" if lo is not None else ""
        super().__init__(f"tau={tau!r} lies outside the range of psi{where}")


class NonPositiveArgument(HilferBVPError):
    kind = "NonPositiveArgument"

    def __init__(self, x: float):
        self.x = x
        super().__init__(f"Gamma needs a positive argument, got {x!r}")


class SingularAtLeftEndpoint(HilferBVPError):
    kind = "SingularAtLeftEndpoint"

    def __init__(self, exponent: float):
        self.exponent = exponent
        super().__init__(f"psi-power with exponent {exponent!r} is singular at t=a")


class InvalidOrder(HilferBVPError):
    kind = "InvalidOrder"

    def __init__(self, alpha: float):
        self.alpha = alpha
        super().__init__(f"fractional order must be positive, got {alpha!r}")


class StencilOutOfDomain(HilferBVPError):
    kind = "StencilOutOfDomain"


# -- problem / criteria ---------------------------------------------------


class InvalidProblem(HilferBVPError):
    kind = "InvalidProblem"


class DegenerateDelta(InvalidProblem):
    kind = "DegenerateDelta"

    def __init__(self, delta: float):
        self.delta = delta
        super().__init__(f"|Delta| = {abs(delta):.3e} <= 1e-12; the boundary problem is degenerate")


class MissingMetadata(HilferBVPError):
    kind = "MissingMetadata"

    def __init__(self, which: str):
        self.which = which
        super().__init__(f"missing problem metadata: {which}")


class NotContractive(HilferBVPError):
    kind = "NotContractive"


class NotConverged(HilferBVPError):
    kind = "NotConverged"

    def __init__(self, max_iter: int, last_diff: float):
        self.max_iter = max_iter
        self.last_diff = last_diff
        super().__init__(f"no convergence after {max_iter} iterations (last sup diff {last_diff:.3e})")


class ConfigError(HilferBVPError):
    kind = "ConfigError"

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        loc = []
        if field:
            loc.append(f"field {field!r}")
        if line is not None:
            loc.append(f"line {line}")
        super().__init__(f"{message}" + (f" ({', '.join(loc)})" if loc else ""))

    def to_dict(self) -> dict:
        return {**super().to_dict(), "field": self.field, "line": self.line}
