"""Word-budget guard against exponential enumeration blowup."""

import os

from .errors import BudgetExceeded

DEFAULT_WORD_BUDGET = 10_000_000
ENV_VAR = "CONFORMAL_DIM_BUDGET"


class Budget:
    def __init__(self, limit):
        self.limit = int(limit)
        if self.limit <= 0:
            raise ValueError("budget must be positive")
        self.used = 0

    def consume(self, n=1):
        self.used += n
        if self.used > self.limit:
            raise BudgetExceeded(
                f"word budget {self.limit} exceeded ({self.used} needed)")

    def remaining(self):
        return self.limit - self.used


def resolve_budget(budget=None):
    """Accept an existing Budget, an int limit, or None (env/default)."""
    if isinstance(budget, Budget):
        return budget
    if budget is None:
        budget = int(os.environ.get(ENV_VAR, DEFAULT_WORD_BUDGET))
    return Budget(budget)
