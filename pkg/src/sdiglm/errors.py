"""Exception taxonomy shared by all modules.

The CLI maps these onto stable exit codes: usage/contract problems -> 2,
data problems -> 3, numeric failures -> 4.
"""


class ContractViolation(ValueError):
    """An operation was called outside its declared preconditions."""


class NumericError(ArithmeticError):
    """A kernel produced NaN/Inf, or an optimization step went non-finite."""


class DataError(ValueError):
    """A corpus file, record, image, or checkpoint is malformed."""


def require(condition: bool, message: str) -> None:
    if not condition:
        raise ContractViolation(message)


def require_shape(condition: bool, op: str, *shapes) -> None:
    if not condition:
        detail = " vs ".join(str(tuple(s)) for s in shapes)
        raise ContractViolation(f"{op}: incompatible shapes {detail}")
