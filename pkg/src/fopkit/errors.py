"""Exception hierarchy shared by the whole toolkit."""

from __future__ import annotations


class FopkitError(Exception):
    """Base class for all toolkit errors."""


class ParseError(FopkitError):
    """Malformed input text; carries the offending source span."""

    def __init__(self, message, span=None):
        super().__init__(message)
        self.span = span


class ArityMismatch(ParseError):
    def __init__(self, symbol, expected, got, span=None):
        super().__init__(
            f"symbol {symbol!r} expects {expected} argument(s), got {got}", span
        )
        self.symbol = symbol
        self.expected = expected
        self.got = got


class UnknownSymbol(ParseError):
    def __init__(self, name, span=None):
        super().__init__(f"unknown symbol {name!r}", span)
        self.name = name


class UnknownVocabulary(ParseError):
    def __init__(self, name, span=None):
        super().__init__(f"unknown vocabulary {name!r}", span)
        self.name = name


class MissingConstant(ParseError):
    def __init__(self, name, span=None):
        super().__init__(f"constant {name!r} has no assignment", span)
        self.name = name


class InvalidVocabulary(FopkitError):
    pass


class InvalidStructure(FopkitError):
    pass


class UniverseTooSmall(InvalidStructure):
    """Universes are initial segments of size at least 2."""


class OutOfUniverse(FopkitError):
    def __init__(self, value, n, span=None):
        super().__init__(f"value {value} outside universe [0, {n})")
        self.value = value
        self.n = n
        self.span = span


class VocabularyMismatch(FopkitError):
    pass


class UnboundVariable(FopkitError):
    def __init__(self, name):
        super().__init__(f"variable {name!r} has no value")
        self.name = name


class NotUniversal(FopkitError):
    """Sentence has an essential existential quantifier."""


class NotLiteral(FopkitError):
    """Pullback argument is not a supported literal shape."""


class NotProjective(FopkitError):
    """Formula does not have the guarded-disjunction shape."""


class ConstantNotUnique(FopkitError):
    def __init__(self, name, count):
        super().__init__(
            f"constant formula for {name!r} has {count} satisfying tuples"
        )
        self.name = name
        self.count = count


class BudgetExceeded(FopkitError):
    def __init__(self, needed, budget):
        super().__init__(f"needs {needed} enumerations, budget is {budget}")
        self.needed = needed
        self.budget = budget


class NoFreshVertex(FopkitError):
    """Witness construction needs an unconstrained vertex but none is left."""


class UnknownProblem(FopkitError):
    def __init__(self, name):
        super().__init__(f"no catalog problem named {name!r}")
        self.name = name


class NoWitnessBuilder(FopkitError):
    def __init__(self, name):
        super().__init__(f"no witness builder registered for problem {name!r}")
        self.name = name


class ContradictoryWitnessBuilder(FopkitError):
    """A witness builder produced a structure that fails its own gate.

    This is always a bug in the builder, never a legitimate verdict.
    """


class NotFirstOrder(FopkitError):
    """First-order evaluation hit a second-order quantifier, or a formula
    is not in a supported quantifier-prefix shape."""
