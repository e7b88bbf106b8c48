"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class TreeTraceError(Exception):
    """Base class for every error raised by this package."""


class InputError(TreeTraceError):
    """Bad user input: malformed tables, invalid letters, broken scenarios."""


class NotAssociative(InputError):
    def __init__(self, a: int, b: int, c: int):
        super().__init__(f"table is not associative: ({a}*{b})*{c} != {a}*({b}*{c})")
        self.witness = (a, b, c)


class NoIdentity(InputError):
    def __init__(self):
        super().__init__("table has no two-sided identity element")


class NoInverse(InputError):
    def __init__(self, a: int):
        super().__init__(f"element {a} has no two-sided inverse")
        self.witness = a


class IndexOutOfRange(InputError):
    def __init__(self, index, order: int):
        super().__init__(f"element index {index!r} outside range(0, {order})")
        self.witness = index


class SubgroupNotInSource(InputError):
    pass


class InvalidLetter(InputError):
    pass


class SpecMismatch(TreeTraceError):
    pass


class BudgetExceeded(TreeTraceError):
    def __init__(self, count: int, budget: int, what: str = "elements"):
        super().__init__(f"{what}: {count} exceeds budget {budget}")
        self.count = count
        self.budget = budget


class RadiusTooSmall(TreeTraceError):
    def __init__(self, needed: int, radius: int):
        super().__init__(f"radius {radius} < required {needed}")
        self.needed = needed
        self.radius = radius


class CertificationError(TreeTraceError):
    """A property the theory guarantees was observed to fail."""


class IncompatibleSupports(TreeTraceError):
    pass


class NotHEquivariant(TreeTraceError):
    pass


class NotAProjection(TreeTraceError):
    def __init__(self, which: str, entry, reason: str):
        super().__init__(f"{which} is not a projection ({reason}) at entry {entry}")
        self.which = which
        self.entry = entry


class NumericalFailure(TreeTraceError):
    pass


class ParseError(InputError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ValidationError(InputError):
    def __init__(self, message: str, witness=None):
        super().__init__(message if witness is None else f"{message} (witness: {witness})")
        self.witness = witness
