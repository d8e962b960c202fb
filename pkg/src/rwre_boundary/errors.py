"""Exception types shared across the package."""


class ModelValidationError(ValueError):
    """A model, direction, or configuration violates a structural constraint."""


class ResourceBudgetError(RuntimeError):
    """A computation would allocate more memory than the configured budget."""

    def __init__(self, what: str, needed_bytes: int, budget_bytes: int):
        self.what = what
        self.needed_bytes = int(needed_bytes)
        self.budget_bytes = int(budget_bytes)
        super().__init__(
            f"{what} needs about {self.needed_bytes} bytes but the memory "
            f"budget is {self.budget_bytes} bytes; raise the budget or "
            f"shrink the run"
        )


class InvariantViolation(RuntimeError):
    """An internal mathematical invariant failed at runtime.

    Raised when a quantity that is provably constrained (a probability above
    1 + tolerance, the J/I sandwich failing, ...) comes out wrong, which
    indicates a bug rather than bad input.
    """
