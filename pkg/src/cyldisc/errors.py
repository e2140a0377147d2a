"""Exception hierarchy.

The CLI maps these onto exit codes: validation errors exit 1, budget errors
exit 2, invariant violations exit 3.
"""


class CyldiscError(Exception):
    exit_code = 1


class ValidationError(CyldiscError, ValueError):
    exit_code = 1


class NotPrime(ValidationError):
    pass


class NotMonic(ValidationError):
    pass


class NotIrreducible(ValidationError):
    pass


class AlphaOutOfRange(ValidationError):
    pass


class NotInAlgebra(ValidationError):
    pass


class BudgetError(CyldiscError):
    exit_code = 2


class BudgetExceeded(BudgetError):
    def __init__(self, what: str, required: int, budget: int):
        super().__init__(f"{what}: requires {required}, budget is {budget}")
        self.required = required
        self.budget = budget


class GridTooLarge(BudgetExceeded):
    pass


class BudgetExhausted(BudgetError):
    """Refinement ran out of blocks; carries the best partition found."""

    def __init__(self, partition, defect):
        super().__init__(f"block budget exhausted with defect {defect}")
        self.partition = partition
        self.defect = defect


class InvariantViolation(CyldiscError):
    exit_code = 3


class MethodDisagreement(InvariantViolation):
    pass
