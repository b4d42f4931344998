"""Forward-search planning under a (learned or ground-truth) model.

The internal planner is greedy best-first search over the grounded task:
h(s) = number of unsatisfied Boolean goal literals plus the normalized
violation |lhs(s) - rhs| / max(1, |rhs|) of each unsatisfied numeric goal
condition. Ties break toward lower g, then insertion order. Duplicate
states are detected on the exact bit pattern of the state vectors. Every
returned plan is re-validated under the model before being handed out.

An adapter runs an external Metric-FF-style planner as a subprocess and
parses its plan lines.
"""
from __future__ import annotations

import heapq
import os
import re
import subprocess
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ramp.environment import State, apply_effects, goal_satisfied, is_applicable
from ramp.errors import ExternalUnavailable, PlanParseFailure, RampError
from ramp.grounding import GroundTask, ground, _evaluate_rows
from ramp.pddl.model import LiftedDomain, LinearExpr, NumericCondition, Problem

DEFAULT_BUDGET_S = 60.0
DEFAULT_EXPANSION_CAP = 5_000_000
PLAN_LINE_REGEX = r"^\s*\d+[.:]\s+(.+)$"
PLAN_MARKER = "found legal plan"


@dataclass(frozen=True)
class Plan:
    actions: tuple[str, ...]
    provenance: str = "internal"  # or "external"
    expanded: int = 0
    wall_time: float = 0.0

    def __len__(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class PlanOutcome:
    status: str  # "plan" | "noplan" | "timeout" | "nomodel"
    plan: Plan | None = None

    @staticmethod
    def found(plan: Plan) -> "PlanOutcome":
        return PlanOutcome("plan", plan)

    @property
    def is_plan(self) -> bool:
        return self.status == "plan"


NO_PLAN = PlanOutcome("noplan")
TIMEOUT = PlanOutcome("timeout")
NO_MODEL = PlanOutcome("nomodel")


def _heuristic(task: GroundTask, bools: np.ndarray, nums: np.ndarray) -> float:
    g = task.goal
    h = 0.0
    if g.pos.size:
        h += float(np.count_nonzero(~bools[g.pos]))
    if g.neg.size:
        h += float(np.count_nonzero(bools[g.neg]))
    for coeffs, rhs, cmp in g.conditions:
        val = float(coeffs @ nums)
        sat = _evaluate_rows(
            np.array([val]), np.array([rhs]), np.array([cmp], dtype=np.int8), 1e-9
        )[0]
        if not sat:
            h += abs(val - rhs) / max(1.0, abs(rhs))
    return h


def plan(
    model: LiftedDomain,
    problem: Problem,
    budget: float = DEFAULT_BUDGET_S,
    expansion_cap: int = DEFAULT_EXPANSION_CAP,
    task: GroundTask | None = None,
) -> PlanOutcome:
    """Greedy best-first search; failures come back as outcome variants."""
    if not model.actions:
        return NO_MODEL
    start = time.monotonic()
    deadline = start + budget
    if task is None:
        task = ground(model, problem)

    init_bools, init_nums = task.init_bools.copy(), task.init_nums.copy()
    init_state = State(init_bools, init_nums)
    if goal_satisfied(task, init_state):
        plan_ = Plan(actions=(), expanded=0, wall_time=time.monotonic() - start)
        return PlanOutcome.found(plan_)

    init_key = init_state.key()
    open_heap: list = []
    counter = 0
    heapq.heappush(open_heap, (_heuristic(task, init_bools, init_nums), 0, counter, init_key, init_bools, init_nums))
    parents: dict[bytes, tuple[bytes, int] | None] = {init_key: None}
    closed: set[bytes] = set()
    expanded = 0

    while open_heap:
        if expanded % 128 == 0 and time.monotonic() > deadline:
            return TIMEOUT
        if expanded >= expansion_cap:
            return NO_PLAN
        h, g, _, key, bools, nums = heapq.heappop(open_heap)
        if key in closed:
            continue
        closed.add(key)
        expanded += 1
        mask = task.applicable_mask(bools, nums)
        for a in np.flatnonzero(mask):
            ns = apply_effects(task, State(bools, nums), int(a))
            nkey = ns.key()
            if nkey in closed or nkey in parents:
                continue
            parents[nkey] = (key, int(a))
            if goal_satisfied(task, ns):
                labels = _reconstruct(task, parents, nkey)
                plan_ = Plan(actions=labels, expanded=expanded, wall_time=time.monotonic() - start)
                if not validate(model, problem, plan_, task=task):
                    raise RampError("internal planner produced an invalid plan")
                return PlanOutcome.found(plan_)
            counter += 1
            heapq.heappush(
                open_heap,
                (_heuristic(task, ns.bools, ns.nums), g + 1, counter, nkey, ns.bools, ns.nums),
            )
    return NO_PLAN


def _reconstruct(task: GroundTask, parents, key: bytes) -> tuple[str, ...]:
    actions: list[str] = []
    while parents[key] is not None:
        key, a = parents[key]
        actions.append(task.action_label(a))
    actions.reverse()
    return tuple(actions)


def validate(model: LiftedDomain, problem: Problem, plan_: Plan, task: GroundTask | None = None) -> bool:
    """Simulate the plan under the model; applicability plus final goal."""
    if task is None:
        task = ground(model, problem)
    state = State(task.init_bools.copy(), task.init_nums.copy())
    for label in plan_.actions:
        try:
            a = task.action_index(label)
        except KeyError:
            return False
        if not is_applicable(task, state, a):
            return False
        state = apply_effects(task, state, a)
    return goal_satisfied(task, state)


def rewrite_equality_preconditions(model: LiftedDomain) -> LiftedDomain:
    """Replace numeric '=' preconditions by a <=/>= pair (for external planners)."""
    from dataclasses import replace

    new_actions = []
    for a in model.actions:
        conds = set()
        for c in a.num_pre:
            if c.comparator == "=":
                conds.add(NumericCondition(c.lhs, "<=", c.rhs))
                conds.add(NumericCondition(c.lhs, ">=", c.rhs))
            else:
                conds.add(c)
        new_actions.append(replace(a, num_pre=frozenset(conds)))
    return replace(model, actions=tuple(new_actions))


def plan_external(
    model_file,
    problem_file,
    executable,
    budget: float = DEFAULT_BUDGET_S,
    plan_regex: str = PLAN_LINE_REGEX,
    marker: str = PLAN_MARKER,
) -> PlanOutcome:
    """Invoke `<exe> -o <domain> -f <problem>`, parse plan lines from stdout.

    Plan lines are those matching `plan_regex` between the marker line and
    the next blank line; action text is lowercased and mapped through the
    grounding label bijection.
    """
    if budget <= 0:
        return TIMEOUT
    exe = str(executable)
    if not (os.path.isfile(exe) and os.access(exe, os.X_OK)):
        raise ExternalUnavailable(f"external planner {exe!r} not found or not executable")
    start = time.monotonic()
    try:
        proc = subprocess.run(
            [exe, "-o", str(model_file), "-f", str(problem_file)],
            capture_output=True,
            text=True,
            timeout=budget,
        )
    except subprocess.TimeoutExpired:
        return TIMEOUT
    wall = time.monotonic() - start

    lines = proc.stdout.splitlines()
    pattern = re.compile(plan_regex)
    in_plan = False
    steps: list[str] = []
    for line in lines:
        if not in_plan:
            if marker in line.lower():
                in_plan = True
            continue
        if not line.strip():
            if steps:
                break
            continue
        m = pattern.match(line)
        if m:
            steps.append(m.group(1).strip().lower())
    if not in_plan:
        return NO_PLAN

    from ramp.pddl.parser import parse_domain, parse_problem

    with open(model_file) as fh:
        model = parse_domain(fh.read())
    with open(problem_file) as fh:
        problem = parse_problem(fh.read(), model)
    task = ground(model, problem)
    labels = []
    for step in steps:
        parts = step.split()
        label = f"{parts[0]}({','.join(parts[1:])})"
        try:
            task.action_index(label)
        except KeyError:
            raise PlanParseFailure(f"plan step {step!r} does not name a ground action") from None
        labels.append(label)
    return PlanOutcome.found(Plan(actions=tuple(labels), provenance="external", wall_time=wall))
