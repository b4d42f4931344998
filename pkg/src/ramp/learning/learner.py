"""Safe action-model learning from lifted transition samples.

Boolean preconditions are the intersection of pre-state literals over
all successful applications; numeric preconditions are the exact convex
hull of successful pre-state vectors; Boolean effects are set
differences; numeric effects are solved as linear equations and reported
only when the solution is unique over the full function space —
otherwise the effect stays Unknown and the schema is withheld from the
exported planning model. Failed attempts never influence the model.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from ramp.errors import InconsistentData, NoSuccesses
from ramp.learning.datasets import ActionDataset, TrajectoryDatasets, add_trajectory
from ramp.learning.hull import Polytope, convex_polytope, rref
from ramp.pddl.model import (
    ActionSchema,
    Atom,
    FunctionTerm,
    LiftedDomain,
    LinearExpr,
    Literal,
    NumericCondition,
    NumericEffect,
)

RESIDUAL_TOLERANCE = Fraction(1, 10**9)
DEFAULT_SAMPLE_CAP = 2000

# value of a num_effects entry when the linear system is underdetermined
UNKNOWN = None


def learn_boolean(dataset: ActionDataset):
    """(bool_pre, add, delete) from the success samples."""
    if not dataset.successes:
        raise NoSuccesses(f"no successful applications of {dataset.schema.name!r}")
    pre: set[Literal] = set()
    for atom in dataset.atom_universe:
        values = {s.pre_bools[atom] for s in dataset.successes}
        if values == {True}:
            pre.add(Literal(atom, positive=True))
        elif values == {False}:
            pre.add(Literal(atom, positive=False))
    add: set[Atom] = set()
    delete: set[Atom] = set()
    for atom in dataset.atom_universe:
        for s in dataset.successes:
            if s.post_bools[atom] and not s.pre_bools[atom]:
                add.add(atom)
            elif s.pre_bools[atom] and not s.post_bools[atom]:
                delete.add(atom)
    conflict = add & delete
    if conflict:
        raise InconsistentData(
            f"atom {sorted(conflict)[0]} both added and deleted across samples of {dataset.schema.name!r}"
        )
    # deterministic-environment check: an observed effect must show in every sample
    for atom in add:
        if any(not s.post_bools[atom] for s in dataset.successes):
            raise InconsistentData(f"add effect {atom} not reproduced in all samples of {dataset.schema.name!r}")
    for atom in delete:
        if any(s.post_bools[atom] for s in dataset.successes):
            raise InconsistentData(f"delete effect {atom} not reproduced in all samples of {dataset.schema.name!r}")
    return frozenset(pre), frozenset(add), frozenset(delete)


def _pre_vectors(dataset: ActionDataset, cap: int) -> list[tuple[Fraction, ...]]:
    vectors = {tuple(s.pre_nums[t] for t in dataset.term_universe) for s in dataset.successes}
    ordered = sorted(vectors)
    if len(ordered) <= cap:
        return ordered
    # deterministic thinning: keep an evenly spaced subset of the sorted points
    step = len(ordered) / cap
    picked = sorted({min(int(i * step), len(ordered) - 1) for i in range(cap)} | {len(ordered) - 1})
    return [ordered[i] for i in picked]


def learn_numeric_preconditions(dataset: ActionDataset, sample_cap: int = DEFAULT_SAMPLE_CAP) -> Polytope:
    """Exact convex hull of successful pre-state vectors."""
    if not dataset.successes:
        raise NoSuccesses(f"no successful applications of {dataset.schema.name!r}")
    return convex_polytope(_pre_vectors(dataset, sample_cap))


def learn_numeric_effects(dataset: ActionDataset):
    """Map target function -> (weights, intercept) or UNKNOWN.

    Solves post = w . pre + b exactly per changed function. Unique
    solution in the full space -> coefficients; consistent but
    underdetermined -> UNKNOWN; no solution -> InconsistentData.
    """
    if not dataset.successes:
        raise NoSuccesses(f"no successful applications of {dataset.schema.name!r}")
    terms = dataset.term_universe
    changed = [
        t for t in terms if any(s.post_nums[t] != s.pre_nums[t] for s in dataset.successes)
    ]
    out: dict[FunctionTerm, tuple[tuple[Fraction, ...], Fraction] | None] = {}
    n = len(terms)
    for target in changed:
        rows = []
        for s in dataset.successes:
            rows.append([s.pre_nums[t] for t in terms] + [Fraction(1), s.post_nums[target]])
        reduced, pivots = rref(rows)
        if n + 1 in pivots:
            raise InconsistentData(
                f"samples of {dataset.schema.name!r} admit no linear effect for {target}"
            )
        if len(pivots) < n + 1:
            out[target] = UNKNOWN
            continue
        solution = [Fraction(0)] * (n + 1)
        for k, c in enumerate(pivots):
            solution[c] = reduced[k][n + 1]
        weights = tuple(solution[:n])
        intercept = solution[n]
        for s in dataset.successes:  # exact reproduction of every sample
            prediction = sum(w * s.pre_nums[t] for w, t in zip(weights, terms)) + intercept
            if abs(prediction - s.post_nums[target]) > RESIDUAL_TOLERANCE:
                raise InconsistentData(f"residual check failed for {target} in {dataset.schema.name!r}")
        out[target] = (weights, intercept)
    return out


@dataclass
class LearnedActionModel:
    schema: ActionSchema
    atom_universe: tuple[Atom, ...]
    term_universe: tuple[FunctionTerm, ...]
    bool_pre: frozenset[Literal]
    add_effects: frozenset[Atom]
    del_effects: frozenset[Atom]
    num_pre: Polytope
    num_effects: dict[FunctionTerm, tuple[tuple[Fraction, ...], Fraction] | None]
    observed_count: int

    @property
    def has_unknown_effect(self) -> bool:
        return any(v is UNKNOWN for v in self.num_effects.values())

    @property
    def exportable(self) -> bool:
        return self.observed_count >= 1 and not self.has_unknown_effect


@dataclass
class LearnedModel:
    domain: LiftedDomain
    actions: dict[str, LearnedActionModel]
    trajectory_count: int

    def exportable_actions(self) -> list[LearnedActionModel]:
        return [m for m in self.actions.values() if m.exportable]

    @property
    def is_empty(self) -> bool:
        return not self.exportable_actions()


def learn_action(dataset: ActionDataset, sample_cap: int = DEFAULT_SAMPLE_CAP) -> LearnedActionModel:
    bool_pre, add, delete = learn_boolean(dataset)
    polytope = learn_numeric_preconditions(dataset, sample_cap)
    effects = learn_numeric_effects(dataset)
    return LearnedActionModel(
        schema=dataset.schema,
        atom_universe=dataset.atom_universe,
        term_universe=dataset.term_universe,
        bool_pre=bool_pre,
        add_effects=add,
        del_effects=delete,
        num_pre=polytope,
        num_effects=effects,
        observed_count=len(dataset.successes),
    )


def learn_from_datasets(
    datasets: TrajectoryDatasets,
    trajectory_count: int,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
    memo: dict[str, tuple[int, LearnedActionModel]] | None = None,
) -> LearnedModel:
    """Relearn every schema with at least one success.

    `memo` maps schema name -> (success count, model); entries whose
    count is unchanged are reused, which is observationally identical to
    a full relearn because learning is a pure function of the samples.
    """
    actions: dict[str, LearnedActionModel] = {}
    for name, ds in datasets.schemas.items():
        count = len(ds.successes)
        if count == 0:
            continue
        if memo is not None and name in memo and memo[name][0] == count:
            actions[name] = memo[name][1]
            continue
        model = learn_action(ds, sample_cap)
        actions[name] = model
        if memo is not None:
            memo[name] = (count, model)
    return LearnedModel(domain=datasets.domain, actions=actions, trajectory_count=trajectory_count)


def learn(trajectories: Iterable, domain: LiftedDomain, sample_cap: int = DEFAULT_SAMPLE_CAP) -> LearnedModel:
    """Full relearn from scratch over a trajectory collection."""
    datasets = TrajectoryDatasets(domain)
    count = 0
    for traj in trajectories:
        add_trajectory(datasets, traj)
        count += 1
    return learn_from_datasets(datasets, count, sample_cap)


def _polytope_conditions(model: LearnedActionModel) -> frozenset[NumericCondition]:
    conditions: set[NumericCondition] = set()
    terms = model.term_universe
    for coeffs, rhs in model.num_pre.equalities:
        lhs = LinearExpr.of(0, {t: Fraction(c) for t, c in zip(terms, coeffs) if c})
        conditions.add(NumericCondition(lhs, "=", Fraction(rhs)))
    for coeffs, rhs in model.num_pre.inequalities:
        if all(c <= 0 for c in coeffs):  # readability: emit lower bounds as >=
            lhs = LinearExpr.of(0, {t: Fraction(-c) for t, c in zip(terms, coeffs) if c})
            conditions.add(NumericCondition(lhs, ">=", Fraction(-rhs)))
        else:
            lhs = LinearExpr.of(0, {t: Fraction(c) for t, c in zip(terms, coeffs) if c})
            conditions.add(NumericCondition(lhs, "<=", Fraction(rhs)))
    return frozenset(conditions)


def _effect_for(target: FunctionTerm, weights, intercept, terms) -> NumericEffect:
    expr = LinearExpr.of(intercept, {t: w for t, w in zip(terms, weights) if w})
    target_coeff = expr.coeff_map().get(target, Fraction(0))
    if target_coeff == 1:
        delta = expr - LinearExpr.term(target)
        if delta.is_constant() and delta.constant < 0:
            return NumericEffect(target, "decrease", LinearExpr.const(-delta.constant))
        return NumericEffect(target, "increase", delta)
    return NumericEffect(target, "assign", expr)


def export_domain(model: LearnedModel) -> LiftedDomain:
    """Planning model: only schemas with >=1 success and fully known effects."""
    schemas = []
    for m in sorted(model.exportable_actions(), key=lambda m: m.schema.name):
        num_effects = []
        for target in sorted(m.num_effects):
            fit = m.num_effects[target]
            weights, intercept = fit
            num_effects.append(_effect_for(target, weights, intercept, m.term_universe))
        schemas.append(
            ActionSchema(
                name=m.schema.name,
                params=m.schema.params,
                bool_pre=m.bool_pre,
                num_pre=_polytope_conditions(m),
                add_effects=m.add_effects,
                del_effects=m.del_effects,
                num_effects=tuple(sorted(num_effects, key=NumericEffect.sort_key)),
            )
        )
    base = model.domain
    return LiftedDomain(
        name=base.name,
        types=base.types,
        predicates=base.predicates,
        functions=base.functions,
        actions=tuple(schemas),
        requirements=base.requirements,
    )


def model_meta(model: LearnedModel) -> dict:
    """Sidecar document: per-action sample counts, hull dims, unknown flags."""
    actions = {}
    for name, m in sorted(model.actions.items()):
        actions[name] = {
            "successes": m.observed_count,
            "hull_dimension": m.num_pre.affine_dim,
            "hull_facets": len(m.num_pre.inequalities),
            "hull_equalities": len(m.num_pre.equalities),
            "unknown_effects": sorted(str(t) for t, v in m.num_effects.items() if v is UNKNOWN),
            "exportable": m.exportable,
        }
    return {
        "trajectories": model.trajectory_count,
        "actions": actions,
    }
