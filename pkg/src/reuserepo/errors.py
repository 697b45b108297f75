"""Exception hierarchy shared by every layer of the repository."""

from __future__ import annotations


class ReuseError(Exception):
    """Base class. ``code`` is a stable machine-readable tag."""

    code = "error"


class InvalidArgument(ReuseError, ValueError):
    code = "invalid-argument"


class ValidationFailed(ReuseError):
    code = "validation-failed"

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class NotFound(ReuseError, KeyError):
    code = "not-found"

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "not found"


class Conflict(ReuseError):
    code = "conflict"


class CorruptStore(ReuseError):
    code = "corrupt-store"

    def __init__(self, path, detail: str, line: int | None = None):
        self.path = str(path)
        self.line = line
        where = self.path if line is None else f"{self.path}:{line}"
        super().__init__(f"{where}: {detail}")


class Busy(ReuseError):
    code = "busy"


class ParseError(ReuseError):
    code = "parse-error"

    def __init__(self, message: str, line: int, col: int, expected=()):
        self.line = line
        self.col = col
        self.expected = frozenset(expected)
        detail = f"{message} at {line}:{col}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)


class SemanticError(ReuseError):
    code = "semantic-error"


class EvalError(ReuseError):
    """Raised by the mini-language evaluator."""

    code = "eval-error"


class EvalTypeError(EvalError):
    code = "type-error"


class EvalArithmeticError(EvalError):
    code = "arithmetic-error"


class BudgetExceeded(EvalError):
    code = "budget-exceeded"


class IncompleteBindings(ReuseError):
    code = "incomplete-bindings"

    def __init__(self, holes):
        self.holes = tuple(sorted(holes))
        super().__init__(f"no binding for hole(s): {', '.join(self.holes)}")


class WrongKind(ReuseError):
    code = "wrong-kind"


class EmptyQuery(ReuseError):
    code = "empty-query"


class InvalidSamples(ReuseError):
    code = "invalid-samples"


class ContractViolation(ReuseError):
    code = "contract-violation"


class InvalidSpec(ReuseError):
    code = "invalid-spec"


class NoData(ReuseError):
    code = "no-data"
