"""Exception hierarchy shared by all modules.

Every error carries a short machine-readable code so the CLI can emit
structured records instead of stack traces.
"""


class ConformalDimError(Exception):
    code = "error"
    exit_code = 2

    def record(self):
        detail = " ".join(str(a) for a in self.args)
        return f"error={self.code} detail={detail!r}"


class ParseError(ConformalDimError):
    code = "parse"


class NotAContraction(ConformalDimError):
    code = "not_a_contraction"

    def __init__(self, index, msg=""):
        super().__init__(f"map {index}: {msg}" if msg else f"map {index}")
        self.index = index


class TrivialSystem(ConformalDimError):
    code = "trivial_system"


class PoleInDomain(ConformalDimError):
    code = "pole_in_domain"

    def __init__(self, index, msg=""):
        super().__init__(f"map {index}: {msg}" if msg else f"map {index}")
        self.index = index


class PoleProximity(ConformalDimError):
    code = "pole_proximity"


class DomainViolation(ConformalDimError):
    code = "domain_violation"


class PoleEntersDomain(ConformalDimError):
    code = "pole_enters_domain"


class NoFixedPointInDomain(ConformalDimError):
    code = "no_fixed_point_in_domain"


class BudgetExceeded(ConformalDimError):
    code = "budget_exceeded"
    exit_code = 3


class InsufficientScales(ConformalDimError):
    code = "insufficient_scales"


class NoRootInBracket(ConformalDimError):
    code = "no_root_in_bracket"


class PreconditionNotMet(ConformalDimError):
    code = "precondition_not_met"


class NoUsablePairs(ConformalDimError):
    code = "no_usable_pairs"


class ExtensionFailed(ConformalDimError):
    code = "extension_failed"


class StepSelectionFailed(ConformalDimError):
    code = "step_selection_failed"

    def __init__(self, step, msg=""):
        super().__init__(f"step {step}: {msg}" if msg else f"step {step}")
        self.step = step


class PointsDiverged(ConformalDimError):
    code = "points_diverged"


class EmptySet(ConformalDimError):
    code = "empty_set"
