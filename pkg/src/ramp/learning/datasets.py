"""Lifted projections of ground transitions, grouped per action schema.

The lifted universe of a schema is fixed: every predicate/function whose
argument slots can be filled by schema parameters of compatible declared
types (each slot's type must be a supertype of the parameter's), plus all
zero-arity functions. Ground atoms whose objects fall outside that
universe are invisible to the learner, which keeps the projection
consistent across samples.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Mapping

from ramp.errors import DomainMismatch
from ramp.grounding import GroundTask
from ramp.environment import State, Trajectory
from ramp.pddl.model import ActionSchema, Atom, FunctionTerm, LiftedDomain


def lifted_signature(domain: LiftedDomain, schema: ActionSchema) -> tuple[tuple[Atom, ...], tuple[FunctionTerm, ...]]:
    """Fixed (atom universe, function universe) for one action schema."""
    params = schema.params
    atoms: set[Atom] = set()
    for pred in domain.predicates:
        pools = [
            [p.name for p in params if domain.is_subtype(p.type, slot.type)]
            for slot in pred.params
        ]
        for combo in product(*pools):
            atoms.add(Atom(pred.name, combo))
    terms: set[FunctionTerm] = set()
    for fn in domain.functions:
        pools = [
            [p.name for p in params if domain.is_subtype(p.type, slot.type)]
            for slot in fn.params
        ]
        for combo in product(*pools):
            terms.add(FunctionTerm(fn.name, combo))
    return tuple(sorted(atoms)), tuple(sorted(terms))


def lift(
    task: GroundTask,
    state: State,
    binding: tuple[str, ...],
    schema: ActionSchema,
    signature: tuple[tuple[Atom, ...], tuple[FunctionTerm, ...]] | None = None,
) -> tuple[dict[Atom, bool], dict[FunctionTerm, Fraction]]:
    """Project a ground state onto the schema's lifted universe."""
    if signature is None:
        signature = lifted_signature(task.domain, schema)
    atom_universe, term_universe = signature
    sub = dict(zip(schema.param_names(), binding))
    bools: dict[Atom, bool] = {}
    for atom in atom_universe:
        g = atom.substitute(sub)
        bools[atom] = bool(state.bools[task.fluent_index[g]])
    nums: dict[FunctionTerm, Fraction] = {}
    for term in term_universe:
        g = term.substitute(sub)
        nums[term] = Fraction(float(state.nums[task.function_index[g]]))
    return bools, nums


@dataclass
class ObservedTransition:
    schema: str
    binding: tuple[str, ...]
    applicable: bool
    pre_bools: dict[Atom, bool]
    pre_nums: dict[FunctionTerm, Fraction]
    post_bools: dict[Atom, bool]
    post_nums: dict[FunctionTerm, Fraction]


@dataclass
class ActionDataset:
    schema: ActionSchema
    atom_universe: tuple[Atom, ...]
    term_universe: tuple[FunctionTerm, ...]
    successes: list[ObservedTransition] = field(default_factory=list)
    failures: list[ObservedTransition] = field(default_factory=list)


class TrajectoryDatasets:
    """Per-schema success/failure samples accumulated from trajectories."""

    def __init__(self, domain: LiftedDomain):
        self.domain = domain
        self.schemas: dict[str, ActionDataset] = {}
        for schema in domain.actions:
            atoms, terms = lifted_signature(domain, schema)
            self.schemas[schema.name] = ActionDataset(schema, atoms, terms)

    def dataset(self, name: str) -> ActionDataset:
        return self.schemas[name]

    def success_counts(self) -> dict[str, int]:
        return {name: len(ds.successes) for name, ds in self.schemas.items()}


def add_trajectory(datasets: TrajectoryDatasets, traj: Trajectory) -> TrajectoryDatasets:
    """Append every attempted transition to its schema's dataset."""
    if traj.task.domain.name != datasets.domain.name:
        raise DomainMismatch(
            f"trajectory from domain {traj.task.domain.name!r}, learner expects {datasets.domain.name!r}"
        )
    for tr in traj.transitions:
        ga = traj.task.actions[tr.action]
        ds = datasets.schemas[ga.schema]
        sig = (ds.atom_universe, ds.term_universe)
        pre_b, pre_n = lift(traj.task, tr.before, ga.binding, ds.schema, sig)
        if tr.applicable:
            post_b, post_n = lift(traj.task, tr.after, ga.binding, ds.schema, sig)
        else:
            post_b, post_n = pre_b, pre_n
        sample = ObservedTransition(
            schema=ga.schema,
            binding=ga.binding,
            applicable=tr.applicable,
            pre_bools=pre_b,
            pre_nums=pre_n,
            post_bools=post_b,
            post_nums=post_n,
        )
        (ds.successes if tr.applicable else ds.failures).append(sample)
    return datasets
