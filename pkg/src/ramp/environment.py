"""Episodic simulator over a ground task.

Semantics: unit reward exactly at goal states (which are terminal),
attempting an action whose preconditions fail leaves the state unchanged,
and episodes truncate after `t_max` steps without reaching the goal.
Every attempt counts as a step, applicable or not.

Numeric satisfaction: `=`, `<=`, `>=` allow a 1e-9 slack; `<` and `>` are
exact on floats. Effects read the pre-state snapshot (simultaneous
assignment).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ramp.errors import EpisodeFinished
from ramp.grounding import GroundTask, a_str, t_str, _evaluate_rows

EQ_TOLERANCE = 1e-9
DEFAULT_T_MAX = 1500


@dataclass(frozen=True)
class State:
    bools: np.ndarray
    nums: np.ndarray

    def copy(self) -> "State":
        return State(self.bools.copy(), self.nums.copy())

    def key(self) -> bytes:
        return self.bools.tobytes() + self.nums.tobytes()

    def __eq__(self, other):
        return (
            isinstance(other, State)
            and np.array_equal(self.bools, other.bools)
            and np.array_equal(self.nums, other.nums)
        )


@dataclass(frozen=True)
class StepResult:
    next: State
    reward: float
    terminated: bool
    truncated: bool
    applicable: bool
    steps_taken: int


@dataclass
class Transition:
    t: int
    action: int
    label: str
    applicable: bool
    reward: float
    before: State
    after: State


@dataclass
class Trajectory:
    """Alternating states and attempted actions; one episode's record."""

    task: GroundTask
    instance: str
    initial: State
    transitions: list[Transition] = field(default_factory=list)
    solved: bool = False

    def __len__(self) -> int:
        return len(self.transitions)


def is_applicable(task: GroundTask, state: State, action: int, tol: float = EQ_TOLERANCE) -> bool:
    if not 0 <= action < task.num_actions:
        raise IndexError(f"action index {action} out of range [0, {task.num_actions})")
    ga = task.actions[action]
    if ga.pos_pre.size and not state.bools[ga.pos_pre].all():
        return False
    if ga.neg_pre.size and state.bools[ga.neg_pre].any():
        return False
    for coeffs, rhs, cmp in ga.num_pre:
        val = float(coeffs @ state.nums)
        if not _evaluate_rows(np.array([val]), np.array([rhs]), np.array([cmp], dtype=np.int8), tol)[0]:
            return False
    return True


def apply_effects(task: GroundTask, state: State, action: int) -> State:
    """Apply the action's effects from a pre-state snapshot (no precondition check)."""
    ga = task.actions[action]
    bools = state.bools.copy()
    nums = state.nums.copy()
    bools[ga.delete] = False
    bools[ga.add] = True
    pre = state.nums
    for target, op, coeffs, const in ga.num_effects:
        value = float(coeffs @ pre) + const
        if op == "assign":
            nums[target] = value
        elif op == "increase":
            nums[target] = pre[target] + value
        elif op == "decrease":
            nums[target] = pre[target] - value
        elif op == "scale-up":
            nums[target] = pre[target] * value
        elif op == "scale-down":
            nums[target] = pre[target] / value
    return State(bools, nums)


def goal_satisfied(task: GroundTask, state: State, tol: float = EQ_TOLERANCE) -> bool:
    g = task.goal
    if g.pos.size and not state.bools[g.pos].all():
        return False
    if g.neg.size and state.bools[g.neg].any():
        return False
    for coeffs, rhs, cmp in g.conditions:
        val = float(coeffs @ state.nums)
        if not _evaluate_rows(np.array([val]), np.array([rhs]), np.array([cmp], dtype=np.int8), tol)[0]:
            return False
    return True


class Environment:
    """Single-episode-at-a-time simulator; reset() starts a fresh episode."""

    def __init__(self, task: GroundTask, t_max: int = DEFAULT_T_MAX, fail_terminates: bool = False):
        self.task = task
        self.t_max = t_max
        self.fail_terminates = fail_terminates
        self._state: State | None = None
        self._steps = 0
        self._done = False

    @property
    def state(self) -> State:
        if self._state is None:
            raise EpisodeFinished("reset() has not been called")
        return self._state

    @property
    def steps(self) -> int:
        return self._steps

    def reset(self) -> State:
        self._state = State(self.task.init_bools.copy(), self.task.init_nums.copy())
        self._steps = 0
        self._done = goal_satisfied(self.task, self._state)
        return self._state

    def step(self, action: int) -> StepResult:
        if self._state is None:
            raise EpisodeFinished("reset() has not been called")
        if self._done:
            raise EpisodeFinished("episode already terminated or truncated")
        applicable = is_applicable(self.task, self._state, action)
        nxt = apply_effects(self.task, self._state, action) if applicable else self._state
        self._steps += 1
        terminated = goal_satisfied(self.task, nxt)
        reward = 1.0 if terminated else 0.0
        truncated = False
        if not applicable and self.fail_terminates:
            terminated, reward, truncated = True, -1.0, False
        elif not terminated and self._steps >= self.t_max:
            truncated = True
        self._state = nxt
        self._done = terminated or truncated
        return StepResult(
            next=nxt,
            reward=reward,
            terminated=terminated,
            truncated=truncated,
            applicable=applicable,
            steps_taken=self._steps,
        )


def replay(task: GroundTask, actions: Sequence[int], t_max: int = DEFAULT_T_MAX, instance: str = "") -> Trajectory:
    """Run reset + the action sequence, recording every attempt."""
    env = Environment(task, t_max=t_max)
    state = env.reset()
    traj = Trajectory(task=task, instance=instance, initial=state.copy(), solved=goal_satisfied(task, state))
    if traj.solved:
        return traj
    for a in actions:
        before = env.state.copy()
        result = env.step(a)
        traj.transitions.append(
            Transition(
                t=len(traj.transitions),
                action=a,
                label=task.action_label(a),
                applicable=result.applicable,
                reward=result.reward,
                before=before,
                after=result.next.copy(),
            )
        )
        if result.terminated or result.truncated:
            traj.solved = result.terminated
            break
    return traj


# -- trajectory persistence ---------------------------------------------------


def _state_doc(task: GroundTask, state: State) -> dict:
    return {
        "atoms": [a_str(task.fluents[i]) for i in np.flatnonzero(state.bools)],
        "values": {t_str(task.functions[i]): float(state.nums[i]) for i in range(task.num_functions)},
    }


def write_trajectories(path, trajectories: Iterable[Trajectory]) -> None:
    """JSON-lines dump: an episode header record, then one record per transition."""
    with open(path, "w") as fh:
        for ep, traj in enumerate(trajectories):
            header = {
                "episode": ep,
                "instance": traj.instance,
                "domain": traj.task.domain.name,
                "objects": {o.name: o.type for o in traj.task.problem.objects},
                "solved": traj.solved,
            }
            fh.write(json.dumps(header, sort_keys=True) + "\n")
            for tr in traj.transitions:
                record = {
                    "t": tr.t,
                    "action": tr.label,
                    "applicable": tr.applicable,
                    "reward": tr.reward,
                    "state_before": _state_doc(traj.task, tr.before),
                    "state_after": _state_doc(traj.task, tr.after),
                }
                fh.write(json.dumps(record, sort_keys=True) + "\n")


def read_trajectories(path, domain, problems_by_objects=None):
    """Rebuild trajectories from a JSONL dump.

    Tasks are reconstructed per episode from the header's object list
    (layout depends only on objects). Raises ValueError with the line
    number on corrupt input.
    """
    from ramp.grounding import ground
    from ramp.pddl.model import Problem, TypedParam, sort_values

    task_cache: dict[tuple, GroundTask] = {}
    out: list[Trajectory] = []
    current: Trajectory | None = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: corrupt JSON ({exc})") from None
            if "episode" in doc:
                objs = tuple(sorted(TypedParam(n, t) for n, t in doc["objects"].items()))
                if objs not in task_cache:
                    shell = Problem(
                        name=f"trace-{doc['episode']}",
                        domain_name=domain.name,
                        objects=objs,
                        init_atoms=frozenset(),
                        init_values=sort_values({}),
                        goal_literals=frozenset(),
                        goal_conditions=frozenset(),
                    )
                    # init values are irrelevant for lifting; fill zeros lazily
                    task = ground(domain, _with_zero_init(domain, shell))
                    task_cache[objs] = task
                task = task_cache[objs]
                current = Trajectory(
                    task=task,
                    instance=doc.get("instance", ""),
                    initial=State(task.init_bools.copy(), task.init_nums.copy()),
                    solved=bool(doc.get("solved", False)),
                )
                out.append(current)
            elif "t" in doc:
                if current is None:
                    raise ValueError(f"{path}:{lineno}: transition before any episode header")
                task = current.task
                before = _doc_state(task, doc["state_before"], path, lineno)
                after = _doc_state(task, doc["state_after"], path, lineno)
                try:
                    action = task.action_index(doc["action"])
                except KeyError:
                    raise ValueError(f"{path}:{lineno}: unknown action {doc['action']!r}") from None
                current.transitions.append(
                    Transition(
                        t=int(doc["t"]),
                        action=action,
                        label=doc["action"],
                        applicable=bool(doc["applicable"]),
                        reward=float(doc["reward"]),
                        before=before,
                        after=after,
                    )
                )
            else:
                raise ValueError(f"{path}:{lineno}: unrecognized record")
    return out


def _with_zero_init(domain, shell):
    """Give every ground function a zero init so the shell problem grounds."""
    from fractions import Fraction
    from itertools import product as iproduct

    from ramp.pddl.model import FunctionTerm, Problem, sort_values

    objects = {o.name: o.type for o in shell.objects}
    values = {}
    for fn in domain.functions:
        pools = [
            [o for o, t in objects.items() if domain.is_subtype(t, p.type)]
            for p in fn.params
        ]
        for combo in iproduct(*pools):
            values[FunctionTerm(fn.name, tuple(combo))] = Fraction(0)
    return Problem(
        name=shell.name,
        domain_name=shell.domain_name,
        objects=shell.objects,
        init_atoms=shell.init_atoms,
        init_values=sort_values(values),
        goal_literals=shell.goal_literals,
        goal_conditions=shell.goal_conditions,
    )


def _label_indexes(task: GroundTask):
    if not hasattr(task, "_label_cache"):
        task._label_cache = (
            {a_str(a): i for i, a in enumerate(task.fluents)},
            {t_str(t): i for i, t in enumerate(task.functions)},
        )
    return task._label_cache


def _doc_state(task: GroundTask, doc: dict, path, lineno: int) -> State:
    bools = np.zeros(task.num_fluents, dtype=bool)
    nums = np.zeros(task.num_functions, dtype=np.float64)
    atom_index, term_index = _label_indexes(task)
    try:
        for label in doc["atoms"]:
            bools[atom_index[label]] = True
        for label, value in doc["values"].items():
            nums[term_index[label]] = float(value)
    except KeyError as exc:
        raise ValueError(f"{path}:{lineno}: unknown state variable {exc}") from None
    return State(bools, nums)
