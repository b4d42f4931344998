"""Shared exception types."""


class RampError(Exception):
    """Base class for all errors raised by this package."""


class PddlSyntaxError(RampError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} (line {line}, col {col})" if line else message)
        self.line = line
        self.col = col


class UnsupportedFeature(RampError):
    """PDDL construct outside the supported linear numeric fragment."""


class PddlTypeError(RampError):
    """Ill-typed term, wrong arity, or reference to an undeclared name."""


class UnknownObjectType(PddlTypeError):
    pass


class UninitializedFunction(RampError):
    """A ground function instance has no value in the problem init."""


class NonLinearExpression(RampError):
    """Arithmetic expression is not linear in the function terms."""


class CombinatorialLimit(RampError):
    """Grounding would exceed the configured size cap."""


class EpisodeFinished(RampError):
    """step() called after the episode terminated or truncated."""


class DomainMismatch(RampError):
    """Trajectory does not belong to the learner's domain."""


class NoSuccesses(RampError):
    """Learner invoked on a dataset without any applicable transition."""


class InconsistentData(RampError):
    """Observations contradict deterministic, linear dynamics."""


class AllMasked(RampError):
    """Action mask without a single selectable entry."""


class NonFiniteLoss(RampError):
    """Policy update produced a non-finite loss; parameters kept unchanged."""


class ExternalUnavailable(RampError):
    """External planner executable missing or not runnable."""


class PlanParseFailure(RampError):
    """External planner output did not match the plan-line contract."""


class GenerationExhausted(RampError):
    """Problem generator could not produce enough solvable instances."""


class NoSamples(RampError):
    """Evaluation metric requested on an empty test set."""
