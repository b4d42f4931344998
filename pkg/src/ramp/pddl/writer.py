"""Serialization back to PDDL text.

Output is bit-stable: lowercase keywords, 2-space indentation, one
condition per line, deterministic ordering of everything the data
model does not already order. parse(serialize(x)) is structurally
equal to x.
"""
from __future__ import annotations

from fractions import Fraction

from ramp.pddl.model import (
    ActionSchema,
    Atom,
    FunctionTerm,
    LiftedDomain,
    LinearExpr,
    Literal,
    NumericCondition,
    NumericEffect,
    Problem,
    ROOT_TYPE,
)


def format_number(value: Fraction) -> str:
    """Exact textual form: integer, finite decimal, or (/ p q)."""
    if value.denominator == 1:
        return str(value.numerator)
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den == 1:
        digits = max(twos, fives)
        scaled = value.numerator * 10**digits // value.denominator
        sign = "-" if scaled < 0 else ""
        text = str(abs(scaled)).rjust(digits + 1, "0")
        return f"{sign}{text[:-digits]}.{text[-digits:]}"
    return f"(/ {value.numerator} {value.denominator})"


def _term(t: FunctionTerm) -> str:
    return "(" + " ".join((t.name,) + t.args) + ")"


def _atom(a: Atom) -> str:
    return "(" + " ".join((a.pred,) + a.args) + ")"


def _literal(lit: Literal) -> str:
    return _atom(lit.atom) if lit.positive else f"(not {_atom(lit.atom)})"


def format_expr(expr: LinearExpr) -> str:
    """Deterministic binary-nested emission of a canonical LinearExpr."""
    pieces: list[tuple[Fraction, str]] = []
    for term, coeff in expr.terms:
        pieces.append((coeff, _term(term)))
    if expr.constant or not pieces:
        pieces.append((expr.constant, None))

    def positive_part(coeff: Fraction, body: str | None) -> str:
        if body is None:
            return format_number(coeff)
        if coeff == 1:
            return body
        return f"(* {format_number(coeff)} {body})"

    acc = _signed_piece(pieces[0])
    for coeff, body in pieces[1:]:
        if coeff < 0:
            acc = f"(- {acc} {positive_part(-coeff, body)})"
        else:
            acc = f"(+ {acc} {positive_part(coeff, body)})"
    return acc


def _signed_piece(piece: tuple[Fraction, str | None]) -> str:
    coeff, body = piece
    if body is None:
        return format_number(coeff)
    if coeff == 1:
        return body
    return f"(* {format_number(coeff)} {body})"


def _condition(cond: NumericCondition) -> str:
    return f"({cond.comparator} {format_expr(cond.lhs)} {format_number(cond.rhs)})"


def _numeric_effect(eff: NumericEffect) -> str:
    return f"({eff.op} {_term(eff.target)} {format_expr(eff.expr)})"


def _typed_params(params) -> str:
    out = []
    for p in params:
        out.append(f"{p.name} - {p.type}")
    return " ".join(out)


def _action_lines(a: ActionSchema) -> list[str]:
    lines = [f"  (:action {a.name}", f"    :parameters ({_typed_params(a.params)})"]
    conds = [_literal(lit) for lit in sorted(a.bool_pre)]
    conds += [_condition(c) for c in sorted(a.num_pre, key=NumericCondition.sort_key)]
    if conds:
        lines.append("    :precondition (and")
        lines.extend(f"      {c}" for c in conds)
        lines[-1] += ")"
    effs = [_atom(at) for at in sorted(a.add_effects)]
    effs += [f"(not {_atom(at)})" for at in sorted(a.del_effects)]
    effs += [_numeric_effect(e) for e in a.num_effects]
    if effs:
        lines.append("    :effect (and")
        lines.extend(f"      {e}" for e in effs)
        lines[-1] += ")"
    lines[-1] += ")"
    return lines


def serialize_domain(d: LiftedDomain) -> str:
    lines = [f"(define (domain {d.name})"]
    if d.requirements:
        lines.append(f"  (:requirements {' '.join(d.requirements)})")
    if d.types:
        lines.append("  (:types")
        for t, parent in d.types:
            lines.append(f"    {t} - {parent}")
        lines[-1] += ")"
    if d.predicates:
        lines.append("  (:predicates")
        for p in d.predicates:
            body = f"({p.name} {_typed_params(p.params)})" if p.params else f"({p.name})"
            lines.append(f"    {body}")
        lines[-1] += ")"
    if d.functions:
        lines.append("  (:functions")
        for f in d.functions:
            body = f"({f.name} {_typed_params(f.params)})" if f.params else f"({f.name})"
            lines.append(f"    {body}")
        lines[-1] += ")"
    for a in d.actions:
        lines.extend(_action_lines(a))
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


def serialize_problem(p: Problem) -> str:
    lines = [f"(define (problem {p.name})", f"  (:domain {p.domain_name})"]
    if p.objects:
        lines.append("  (:objects")
        for obj in p.objects:
            lines.append(f"    {obj.name} - {obj.type}")
        lines[-1] += ")"
    lines.append("  (:init")
    for atom in sorted(p.init_atoms):
        lines.append(f"    {_atom(atom)}")
    for term, value in p.init_values:
        lines.append(f"    (= {_term(term)} {format_number(value)})")
    lines[-1] += ")"
    goal_parts = [_literal(lit) for lit in sorted(p.goal_literals)]
    goal_parts += [_condition(c) for c in sorted(p.goal_conditions, key=NumericCondition.sort_key)]
    lines.append("  (:goal (and")
    for g in goal_parts:
        lines.append(f"    {g}")
    lines[-1] += "))"
    lines[-1] += ")"
    return "\n".join(lines) + "\n"
