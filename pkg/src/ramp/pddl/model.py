"""Data model for numeric planning domains and problems (linear fragment).

All numeric literals are exact rationals; nothing in this layer rounds.
Expressions are kept in a canonical form (sorted terms, no zero
coefficients) so that algebraically equal expressions compare equal.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

ROOT_TYPE = "object"
COMPARATORS = ("<", "<=", "=", ">=", ">")
NUMERIC_OPS = ("assign", "increase", "decrease", "scale-up", "scale-down")


@dataclass(frozen=True, order=True)
class TypedParam:
    name: str
    type: str = ROOT_TYPE


@dataclass(frozen=True, order=True)
class Atom:
    """A predicate applied to variables or object names."""

    pred: str
    args: tuple[str, ...] = ()

    def substitute(self, binding: Mapping[str, str]) -> "Atom":
        return Atom(self.pred, tuple(binding.get(a, a) for a in self.args))

    def __str__(self) -> str:
        return f"({' '.join((self.pred,) + self.args)})"


@dataclass(frozen=True, order=True)
class Literal:
    atom: Atom
    positive: bool = True

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"(not {self.atom})"


@dataclass(frozen=True, order=True)
class FunctionTerm:
    name: str
    args: tuple[str, ...] = ()

    def substitute(self, binding: Mapping[str, str]) -> "FunctionTerm":
        return FunctionTerm(self.name, tuple(binding.get(a, a) for a in self.args))

    def __str__(self) -> str:
        return f"({' '.join((self.name,) + self.args)})"


@dataclass(frozen=True)
class LinearExpr:
    """constant + sum(coefficient * function term), canonical form.

    Terms are sorted and carry no zero coefficients, so structural
    equality coincides with algebraic equality.
    """

    constant: Fraction = Fraction(0)
    terms: tuple[tuple[FunctionTerm, Fraction], ...] = ()

    @staticmethod
    def of(constant: Fraction | int = 0, coeffs: Mapping[FunctionTerm, Fraction | int] | None = None) -> "LinearExpr":
        acc: dict[FunctionTerm, Fraction] = {}
        for term, c in (coeffs or {}).items():
            c = Fraction(c)
            if c:
                acc[term] = c
        return LinearExpr(Fraction(constant), tuple(sorted(acc.items())))

    @staticmethod
    def const(value: Fraction | int) -> "LinearExpr":
        return LinearExpr(Fraction(value), ())

    @staticmethod
    def term(t: FunctionTerm, coeff: Fraction | int = 1) -> "LinearExpr":
        return LinearExpr.of(0, {t: coeff})

    def is_constant(self) -> bool:
        return not self.terms

    def coeff_map(self) -> dict[FunctionTerm, Fraction]:
        return dict(self.terms)

    def __add__(self, other: "LinearExpr") -> "LinearExpr":
        acc = self.coeff_map()
        for term, c in other.terms:
            acc[term] = acc.get(term, Fraction(0)) + c
        return LinearExpr.of(self.constant + other.constant, acc)

    def __sub__(self, other: "LinearExpr") -> "LinearExpr":
        return self + other.scale(Fraction(-1))

    def scale(self, factor: Fraction) -> "LinearExpr":
        return LinearExpr.of(self.constant * factor, {t: c * factor for t, c in self.terms})

    def substitute(self, binding: Mapping[str, str]) -> "LinearExpr":
        acc: dict[FunctionTerm, Fraction] = {}
        for term, c in self.terms:
            g = term.substitute(binding)
            acc[g] = acc.get(g, Fraction(0)) + c
        return LinearExpr.of(self.constant, acc)

    def evaluate(self, values: Mapping[FunctionTerm, Fraction]) -> Fraction:
        total = self.constant
        for term, c in self.terms:
            total += c * values[term]
        return total

    def function_terms(self) -> tuple[FunctionTerm, ...]:
        return tuple(t for t, _ in self.terms)


@dataclass(frozen=True)
class NumericCondition:
    """lhs <comparator> rhs with lhs holding only the variable part.

    Construct through make_condition so the constant part always lives
    on the right-hand side.
    """

    lhs: LinearExpr
    comparator: str
    rhs: Fraction

    def substitute(self, binding: Mapping[str, str]) -> "NumericCondition":
        return NumericCondition(self.lhs.substitute(binding), self.comparator, self.rhs)

    def holds(self, values: Mapping[FunctionTerm, Fraction]) -> bool:
        v = self.lhs.evaluate(values)
        return compare(v, self.comparator, self.rhs)

    def sort_key(self):
        return (self.lhs.terms, self.comparator, self.rhs)

    def __str__(self) -> str:
        return f"({self.comparator} {self.lhs.terms} {self.rhs})"


def compare(lhs: Fraction, comparator: str, rhs: Fraction) -> bool:
    if comparator == "<":
        return lhs < rhs
    if comparator == "<=":
        return lhs <= rhs
    if comparator == "=":
        return lhs == rhs
    if comparator == ">=":
        return lhs >= rhs
    if comparator == ">":
        return lhs > rhs
    raise ValueError(f"unknown comparator {comparator!r}")


def make_condition(lhs: LinearExpr, comparator: str, rhs: LinearExpr) -> NumericCondition:
    """Canonicalize `lhs cmp rhs` to `terms cmp constant`."""
    if comparator not in COMPARATORS:
        raise ValueError(f"unknown comparator {comparator!r}")
    diff = lhs - rhs
    return NumericCondition(LinearExpr.of(0, diff.coeff_map()), comparator, -diff.constant)


@dataclass(frozen=True)
class NumericEffect:
    target: FunctionTerm
    op: str  # one of NUMERIC_OPS
    expr: LinearExpr

    def substitute(self, binding: Mapping[str, str]) -> "NumericEffect":
        return NumericEffect(self.target.substitute(binding), self.op, self.expr.substitute(binding))

    def sort_key(self):
        return (self.target, self.op, self.expr.terms, self.expr.constant)


@dataclass(frozen=True)
class PredicateSchema:
    name: str
    params: tuple[TypedParam, ...] = ()


@dataclass(frozen=True)
class FunctionSchema:
    name: str
    params: tuple[TypedParam, ...] = ()


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[TypedParam, ...]
    bool_pre: frozenset[Literal]
    num_pre: frozenset[NumericCondition]
    add_effects: frozenset[Atom]
    del_effects: frozenset[Atom]
    num_effects: tuple[NumericEffect, ...]

    def param_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)


@dataclass(frozen=True)
class LiftedDomain:
    name: str
    types: tuple[tuple[str, str], ...]  # (type, parent) pairs, sorted
    predicates: tuple[PredicateSchema, ...]
    functions: tuple[FunctionSchema, ...]
    actions: tuple[ActionSchema, ...]
    requirements: tuple[str, ...] = ()

    def type_map(self) -> dict[str, str]:
        return dict(self.types)

    def predicate(self, name: str) -> PredicateSchema:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    def function(self, name: str) -> FunctionSchema:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def action(self, name: str) -> ActionSchema:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def is_subtype(self, child: str, parent: str) -> bool:
        """True when an object of type `child` can fill a `parent` slot."""
        if parent == ROOT_TYPE or child == parent:
            return True
        tm = self.type_map()
        while child in tm:
            child = tm[child]
            if child == parent:
                return True
        return False


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: tuple[TypedParam, ...]
    init_atoms: frozenset[Atom]
    init_values: tuple[tuple[FunctionTerm, Fraction], ...]  # sorted by term
    goal_literals: frozenset[Literal]
    goal_conditions: frozenset[NumericCondition]

    def init_value_map(self) -> dict[FunctionTerm, Fraction]:
        return dict(self.init_values)


def sort_values(values: Mapping[FunctionTerm, Fraction] | Iterable[tuple[FunctionTerm, Fraction]]):
    items = values.items() if isinstance(values, Mapping) else values
    return tuple(sorted(items, key=lambda kv: kv[0]))
