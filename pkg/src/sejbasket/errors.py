"""Exception hierarchy.

Every error names the offending entity so callers (and the CLI) can report
it without re-deriving context. The CLI maps :class:`InputError` to exit
code 2 and :class:`NumericalError` to exit code 3.
"""

from __future__ import annotations


class SEJError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class InputError(SEJError, ValueError):
    """Invalid input data or parameters."""

    exit_code = 2


class NumericalError(SEJError, ArithmeticError):
    """A numerical procedure could not produce a valid result."""

    exit_code = 3


# -- domain validation -------------------------------------------------------


class NonMonotoneQuantiles(InputError):
    def __init__(self, expert: str | None, question: str | None, values=None):
        self.expert = expert
        self.question = question
        self.values = values
        where = ", ".join(
            f"{k}={v!r}" for k, v in (("expert", expert), ("question", question)) if v is not None
        )
        super().__init__(f"quantiles must satisfy q05 <= q50 <= q95 ({where}): {values}")


class MissingRealization(InputError):
    def __init__(self, question: str):
        self.question = question
        super().__init__(f"calibration question {question!r} has no realization")


class UnexpectedRealization(InputError):
    def __init__(self, question: str):
        self.question = question
        super().__init__(f"target question {question!r} must not carry a realization")


class EmptyStudy(InputError):
    def __init__(self, reason: str):
        super().__init__(f"empty study: {reason}")


class DuplicateEntity(InputError):
    def __init__(self, kind: str, name: str):
        self.kind = kind
        self.name = name
        super().__init__(f"duplicate {kind} {name!r}")


class UnknownEntity(InputError):
    def __init__(self, kind: str, name: str):
        self.kind = kind
        self.name = name
        super().__init__(f"unknown {kind} {name!r}")


class MissingAssessment(InputError):
    def __init__(self, expert: str, question: str):
        self.expert = expert
        self.question = question
        super().__init__(f"expert {expert!r} has no assessment for question {question!r}")


class MissingCategory(InputError):
    def __init__(self, category: str, where: str):
        self.category = category
        self.where = where
        super().__init__(f"{where} is missing category {category!r}")


class InvalidBasket(InputError):
    def __init__(self, basket: str, reason: str):
        self.basket = basket
        super().__init__(f"basket {basket!r}: {reason}")


class DuplicatePair(InputError):
    def __init__(self, a: str, b: str):
        self.pair = (a, b)
        super().__init__(f"correlation pair ({a}, {b}) listed more than once")


class SelfPair(InputError):
    def __init__(self, category: str):
        self.category = category
        super().__init__(f"correlation of {category!r} with itself is not allowed")


class InvalidEntry(InputError):
    def __init__(self, a: str, b: str, value: float):
        self.pair = (a, b)
        self.value = value
        super().__init__(f"correlation ({a}, {b}) = {value!r} is outside [-1, 1]")


class InvalidParameter(InputError):
    def __init__(self, name: str, value, rule: str):
        self.name = name
        self.value = value
        super().__init__(f"{name}={value!r}: {rule}")


# -- scoring / aggregation ---------------------------------------------------


class NoCalibrationQuestions(InputError):
    def __init__(self, expert: str | None = None):
        self.expert = expert
        suffix = f" for expert {expert!r}" if expert else ""
        super().__init__(f"no calibration questions with realizations{suffix}")


class AllExpertsExcluded(InputError):
    def __init__(self, alpha: float):
        self.alpha = alpha
        super().__init__(f"no expert reaches the calibration cutoff alpha={alpha:g}")


class NegativeArgument(InputError):
    def __init__(self, value: float):
        self.value = value
        super().__init__(f"argument must be >= 0, got {value!r}")


class OutOfSupport(InputError):
    def __init__(self, value):
        self.value = value
        super().__init__(f"cannot evaluate distribution at {value!r}")


class DimensionMismatch(InputError):
    def __init__(self, expected, got):
        self.expected = expected
        self.got = got
        super().__init__(f"dimension mismatch: expected {expected}, got {got}")


class TooFewSamples(InputError):
    def __init__(self, n: int):
        self.n = n
        super().__init__(f"need at least 2 samples to summarize, got {n}")


# -- numerics ----------------------------------------------------------------


class RepairDriftExceeded(NumericalError):
    def __init__(self, drift: float, limit: float):
        self.drift = drift
        self.limit = limit
        super().__init__(
            f"correlation matrix repair moved an entry by {drift:.4f} (limit {limit:.4f})"
        )


class FactorizationFailure(NumericalError):
    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"correlation matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})"
        )


# -- file formats ------------------------------------------------------------


class FileSyntaxError(InputError):
    def __init__(self, path, line: int, message: str):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: syntax error: {message}")


class FileValidationError(InputError):
    def __init__(self, path, entity: str, rule: str):
        self.path = str(path)
        self.entity = entity
        self.rule = rule
        super().__init__(f"{self.path}: invalid {entity}: {rule}")


class UnsupportedVersion(InputError):
    def __init__(self, path, version):
        self.path = str(path)
        self.version = version
        super().__init__(f"{self.path}: unsupported format_version {version!r}")
