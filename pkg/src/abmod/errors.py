"""Exception hierarchy.

Every error carries a stable ``code`` string.  Mathematical failures map to
CLI exit status 1, input/usage problems (``UsageError``) to exit status 2.
"""


class AbModError(Exception):
    code = "error"


class MathError(AbModError):
    code = "math_error"


class UsageError(AbModError):
    code = "usage_error"


class NotAUnit(MathError):
    code = "not_a_unit"


class NonzeroConstantTerm(MathError):
    code = "nonzero_constant_term"


class Obstruction(MathError):
    """A resonant coefficient that must vanish does not."""

    code = "obstruction"

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"obstruction at index {index}")


class NotMonic(MathError):
    code = "not_monic"


class NotAGenerator(MathError):
    code = "not_a_generator"


class InsufficientOrder(MathError):
    code = "insufficient_order"


class NotNormal(MathError):
    code = "not_normal"


class NotStable(MathError):
    code = "not_stable"


class NotAFresco(MathError):
    code = "not_a_fresco"


class NotRegular(MathError):
    code = "not_regular"


class WrongShape(MathError):
    code = "wrong_shape"


class WrongRank(MathError):
    code = "wrong_rank"


class UniqueClass(MathError):
    code = "unique_class"


class NotSemisimple(MathError):
    code = "not_semisimple"


class NonUnique(MathError):
    code = "non_unique"


class SearchExhausted(MathError):
    code = "search_exhausted"


class Degenerate(MathError):
    code = "degenerate"


class ParseError(UsageError):
    code = "parse_error"


class ValidationError(UsageError):
    code = "validation_error"
