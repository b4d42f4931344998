from ramp.learning.datasets import (
    ActionDataset,
    ObservedTransition,
    TrajectoryDatasets,
    add_trajectory,
    lift,
    lifted_signature,
)
from ramp.learning.hull import HullError, Polytope, convex_polytope
from ramp.learning.learner import (
    UNKNOWN,
    LearnedActionModel,
    LearnedModel,
    export_domain,
    learn,
    learn_action,
    learn_boolean,
    learn_from_datasets,
    learn_numeric_effects,
    learn_numeric_preconditions,
    model_meta,
)

__all__ = [
    "ActionDataset",
    "HullError",
    "LearnedActionModel",
    "LearnedModel",
    "ObservedTransition",
    "Polytope",
    "TrajectoryDatasets",
    "UNKNOWN",
    "add_trajectory",
    "convex_polytope",
    "export_domain",
    "learn",
    "learn_action",
    "learn_boolean",
    "learn_from_datasets",
    "learn_numeric_effects",
    "learn_numeric_preconditions",
    "lift",
    "lifted_signature",
    "model_meta",
]
