"""Instantiate a lifted domain + problem into fixed observation/action spaces.

Index tables are deterministic (lexicographic by name, then argument
tuple). Bindings must assign distinct objects to parameters that share a
declared type; parameters of different declared types may repeat an
object. Action conditions and effects are pre-compiled into dense numpy
structures so applicability over all actions is a few vector ops.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from ramp.errors import CombinatorialLimit, PddlTypeError
from ramp.pddl.model import (
    ActionSchema,
    Atom,
    FunctionTerm,
    LiftedDomain,
    LinearExpr,
    NumericCondition,
    Problem,
)

DEFAULT_SIZE_CAP = 10**6

# comparator codes for vectorized evaluation
CMP_LT, CMP_LE, CMP_EQ, CMP_GE, CMP_GT = range(5)
_CMP_CODE = {"<": CMP_LT, "<=": CMP_LE, "=": CMP_EQ, ">=": CMP_GE, ">": CMP_GT}


@dataclass
class GroundAction:
    index: int
    schema: str
    binding: tuple[str, ...]
    pos_pre: np.ndarray  # fluent indices that must be true
    neg_pre: np.ndarray  # fluent indices that must be false
    num_pre: list[tuple[np.ndarray, float, int]]  # (coeff row over N, rhs, cmp code)
    add: np.ndarray
    delete: np.ndarray
    num_effects: list[tuple[int, str, np.ndarray, float]]  # (target, op, coeffs, const)

    @property
    def label(self) -> str:
        return f"{self.schema}({','.join(self.binding)})"


@dataclass
class GroundGoal:
    pos: np.ndarray
    neg: np.ndarray
    conditions: list[tuple[np.ndarray, float, int]]


class GroundTask:
    """Immutable grounded task: index tables, compiled actions, init, goal."""

    def __init__(self, domain: LiftedDomain, problem: Problem, size_cap: int = DEFAULT_SIZE_CAP):
        self.domain = domain
        self.problem = problem
        self.objects = {o.name: o.type for o in problem.objects}

        self.fluents: list[Atom] = sorted(self._enumerate_atoms(domain))
        self.functions: list[FunctionTerm] = sorted(self._enumerate_functions(domain))
        self.fluent_index = {a: i for i, a in enumerate(self.fluents)}
        self.function_index = {t: i for i, t in enumerate(self.functions)}
        self.num_fluents = len(self.fluents)
        self.num_functions = len(self.functions)
        if self.num_fluents + self.num_functions > size_cap:
            raise CombinatorialLimit(
                f"{self.num_fluents + self.num_functions} state variables exceed cap {size_cap}"
            )

        self.actions: list[GroundAction] = self._ground_actions(size_cap)
        self.num_actions = len(self.actions)
        self.label_index = {a.label: a.index for a in self.actions}

        # dense Boolean precondition masks for whole-state applicability
        a, b = self.num_actions, self.num_fluents
        self._pos_mask = np.zeros((a, b), dtype=bool)
        self._neg_mask = np.zeros((a, b), dtype=bool)
        for ga in self.actions:
            self._pos_mask[ga.index, ga.pos_pre] = True
            self._neg_mask[ga.index, ga.neg_pre] = True
        rows, rhs, cmps, owners = [], [], [], []
        for ga in self.actions:
            for coeffs, r, c in ga.num_pre:
                rows.append(coeffs)
                rhs.append(r)
                cmps.append(c)
                owners.append(ga.index)
        n = self.num_functions
        self._num_rows = np.array(rows, dtype=np.float64).reshape(len(rows), n)
        self._num_rhs = np.array(rhs, dtype=np.float64)
        self._num_cmp = np.array(cmps, dtype=np.int8)
        self._num_owner = np.array(owners, dtype=np.int64)

        self.init_bools, self.init_nums = self._build_init()
        self.goal = self._build_goal()
        self.goal_feature_bits = self._build_goal_features()

    # -- enumeration ---------------------------------------------------------

    def _typed_pool(self, type_name: str) -> list[str]:
        return sorted(o for o, t in self.objects.items() if self.domain.is_subtype(t, type_name))

    def _bindings(self, params) -> Iterable[tuple[str, ...]]:
        pools = [self._typed_pool(p.type) for p in params]
        declared = [p.type for p in params]
        for combo in product(*pools):
            ok = True
            for i in range(len(combo)):
                for j in range(i + 1, len(combo)):
                    if combo[i] == combo[j] and declared[i] == declared[j]:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                yield combo

    def _enumerate_atoms(self, domain: LiftedDomain) -> list[Atom]:
        out = []
        for pred in domain.predicates:
            for combo in product(*[self._typed_pool(p.type) for p in pred.params]):
                out.append(Atom(pred.name, combo))
        return out

    def _enumerate_functions(self, domain: LiftedDomain) -> list[FunctionTerm]:
        out = []
        for fn in domain.functions:
            for combo in product(*[self._typed_pool(p.type) for p in fn.params]):
                out.append(FunctionTerm(fn.name, combo))
        return out

    # -- compilation ---------------------------------------------------------

    def _compile_expr(self, expr: LinearExpr) -> tuple[np.ndarray, float]:
        coeffs = np.zeros(self.num_functions, dtype=np.float64)
        for term, c in expr.terms:
            coeffs[self.function_index[term]] += float(c)
        return coeffs, float(expr.constant)

    def _compile_condition(self, cond: NumericCondition) -> tuple[np.ndarray, float, int]:
        coeffs, const = self._compile_expr(cond.lhs)
        return coeffs, float(cond.rhs) - const, _CMP_CODE[cond.comparator]

    def _ground_actions(self, size_cap: int) -> list[GroundAction]:
        entries = []
        for schema in self.domain.actions:
            for binding in self._bindings(schema.params):
                entries.append((schema, binding))
        if len(entries) > size_cap:
            raise CombinatorialLimit(f"{len(entries)} ground actions exceed cap {size_cap}")
        entries.sort(key=lambda e: (e[0].name, e[1]))
        out = []
        for idx, (schema, binding) in enumerate(entries):
            out.append(self._compile_action(idx, schema, binding))
        return out

    def _compile_action(self, index: int, schema: ActionSchema, binding: tuple[str, ...]) -> GroundAction:
        sub = dict(zip(schema.param_names(), binding))
        pos, neg = [], []
        for lit in schema.bool_pre:
            gi = self.fluent_index[lit.atom.substitute(sub)]
            (pos if lit.positive else neg).append(gi)
        num_pre = [self._compile_condition(c.substitute(sub)) for c in schema.num_pre]
        add = {self.fluent_index[a.substitute(sub)] for a in schema.add_effects}
        delete = {self.fluent_index[a.substitute(sub)] for a in schema.del_effects}
        delete -= add  # PDDL 2.1: deletes apply before adds, add wins
        effects = []
        targets = set()
        for eff in schema.num_effects:
            tgt = self.function_index[eff.target.substitute(sub)]
            if tgt in targets:
                raise PddlTypeError(
                    f"binding {binding} makes two numeric effects target one function in {schema.name}"
                )
            targets.add(tgt)
            coeffs, const = self._compile_expr(eff.expr.substitute(sub))
            effects.append((tgt, eff.op, coeffs, const))
        return GroundAction(
            index=index,
            schema=schema.name,
            binding=binding,
            pos_pre=np.array(sorted(pos), dtype=np.int64),
            neg_pre=np.array(sorted(neg), dtype=np.int64),
            num_pre=num_pre,
            add=np.array(sorted(add), dtype=np.int64),
            delete=np.array(sorted(delete), dtype=np.int64),
            num_effects=effects,
        )

    def _build_init(self) -> tuple[np.ndarray, np.ndarray]:
        bools = np.zeros(self.num_fluents, dtype=bool)
        for atom in self.problem.init_atoms:
            bools[self.fluent_index[atom]] = True
        nums = np.zeros(self.num_functions, dtype=np.float64)
        for term, value in self.problem.init_values:
            nums[self.function_index[term]] = float(value)
        return bools, nums

    def _build_goal(self) -> GroundGoal:
        pos, neg = [], []
        for lit in self.problem.goal_literals:
            gi = self.fluent_index[lit.atom]
            (pos if lit.positive else neg).append(gi)
        conds = [self._compile_condition(c) for c in self.problem.goal_conditions]
        return GroundGoal(
            pos=np.array(sorted(pos), dtype=np.int64),
            neg=np.array(sorted(neg), dtype=np.int64),
            conditions=conds,
        )

    def _build_goal_features(self) -> np.ndarray:
        # one constant bit per Boolean goal literal: 1 for a positive literal
        bits = [1.0 if lit.positive else 0.0 for lit in sorted(self.problem.goal_literals)]
        return np.array(bits, dtype=np.float64)

    # -- queries -------------------------------------------------------------

    def applicable_mask(self, bools: np.ndarray, nums: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Boolean vector over all actions: preconditions satisfied in the state."""
        ok = ~np.any(self._pos_mask & ~bools, axis=1)
        ok &= ~np.any(self._neg_mask & bools, axis=1)
        if len(self._num_rhs):
            vals = self._num_rows @ nums
            sat = _evaluate_rows(vals, self._num_rhs, self._num_cmp, tol)
            violated = np.bincount(self._num_owner[~sat], minlength=self.num_actions)
            ok &= violated == 0
        return ok

    def action_label(self, index: int) -> str:
        if not 0 <= index < self.num_actions:
            raise IndexError(f"action index {index} out of range [0, {self.num_actions})")
        return self.actions[index].label

    def action_index(self, label: str) -> int:
        try:
            return self.label_index[label]
        except KeyError:
            raise KeyError(f"unknown action label {label!r}") from None

    def layout(self) -> dict:
        return {
            "fluents": [a_str(a) for a in self.fluents],
            "functions": [t_str(t) for t in self.functions],
            "actions": [a.label for a in self.actions],
        }

    def dump_layout(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.layout(), fh, indent=2)
            fh.write("\n")

    def observation_length(self, include_goal: bool = False) -> int:
        n = self.num_fluents + self.num_functions
        if include_goal:
            n += len(self.goal_feature_bits)
        return n


def a_str(atom: Atom) -> str:
    return f"{atom.pred}({','.join(atom.args)})" if atom.args else f"{atom.pred}()"


def t_str(term: FunctionTerm) -> str:
    return f"{term.name}({','.join(term.args)})" if term.args else f"{term.name}()"


def _evaluate_rows(vals: np.ndarray, rhs: np.ndarray, cmp: np.ndarray, tol: float) -> np.ndarray:
    sat = np.empty(len(vals), dtype=bool)
    lt, le, eq, ge, gt = (cmp == CMP_LT), (cmp == CMP_LE), (cmp == CMP_EQ), (cmp == CMP_GE), (cmp == CMP_GT)
    sat[lt] = vals[lt] < rhs[lt]
    sat[le] = vals[le] <= rhs[le] + tol
    sat[eq] = np.abs(vals[eq] - rhs[eq]) <= tol
    sat[ge] = vals[ge] >= rhs[ge] - tol
    sat[gt] = vals[gt] > rhs[gt]
    return sat


def ground(domain: LiftedDomain, problem: Problem, size_cap: int = DEFAULT_SIZE_CAP) -> GroundTask:
    return GroundTask(domain, problem, size_cap)


def encode_state(task: GroundTask, bools: np.ndarray, nums: np.ndarray, include_goal: bool = False) -> np.ndarray:
    parts = [bools.astype(np.float64), nums]
    if include_goal:
        parts.append(task.goal_feature_bits)
    return np.concatenate(parts)
