from ramp.pddl.model import (
    ActionSchema,
    Atom,
    FunctionSchema,
    FunctionTerm,
    LiftedDomain,
    LinearExpr,
    Literal,
    NumericCondition,
    NumericEffect,
    PredicateSchema,
    Problem,
    TypedParam,
    make_condition,
)
from ramp.pddl.parser import parse_domain, parse_problem, validate_linear
from ramp.pddl.writer import serialize_domain, serialize_problem

__all__ = [
    "ActionSchema",
    "Atom",
    "FunctionSchema",
    "FunctionTerm",
    "LiftedDomain",
    "LinearExpr",
    "Literal",
    "NumericCondition",
    "NumericEffect",
    "PredicateSchema",
    "Problem",
    "TypedParam",
    "make_condition",
    "parse_domain",
    "parse_problem",
    "serialize_domain",
    "serialize_problem",
    "validate_linear",
]
