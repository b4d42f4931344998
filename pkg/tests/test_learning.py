"""Lifting, Boolean/numeric learning, full relearn, and export."""
from fractions import Fraction

import pytest

from ramp.environment import State, replay
from ramp.errors import InconsistentData, NoSuccesses
from ramp.grounding import ground
from ramp.learning import (
    UNKNOWN,
    TrajectoryDatasets,
    add_trajectory,
    export_domain,
    learn,
    learn_boolean,
    learn_numeric_effects,
    learn_numeric_preconditions,
    lift,
    lifted_signature,
)
from ramp.pddl import Atom, FunctionTerm, Literal, parse_domain, parse_problem, serialize_domain

from conftest import TRANSPORT_PROBLEM

MOVE_AB = 0
MOVE_BA = 1


def transport_task_with_fuel(domain, fuel):
    text = TRANSPORT_PROBLEM.replace("(= (fuel r1) 10)", f"(= (fuel r1) {fuel})")
    return ground(domain, parse_problem(text, domain))


@pytest.fixture()
def task(transport_domain, transport_problem):
    return ground(transport_domain, transport_problem)


class TestLift:
    def test_example_projection(self, transport_domain, task):
        move = transport_domain.action("move")
        s = State(task.init_bools, task.init_nums)
        bools, nums = lift(task, s, ("r1", "loc_a", "loc_b"), move)
        assert bools == {
            Atom("at", ("?r", "?from")): True,
            Atom("at", ("?r", "?to")): False,
        }
        assert nums == {FunctionTerm("fuel", ("?r",)): Fraction(10)}

    def test_zero_arity_always_included(self):
        d = parse_domain(
            """
            (define (domain g)
              (:types thing)
              (:functions (total-cost) (size ?t - thing))
              (:action op :parameters (?t - thing)
                :effect (increase (total-cost) 1)))
            """
        )
        _, terms = lifted_signature(d, d.action("op"))
        assert FunctionTerm("total-cost", ()) in terms

    def test_repeated_binding_brute_force(self, transport_domain, task):
        # oracle: enumerate every ground atom whose objects all appear in the
        # binding and every parameter naming consistent with it
        move = transport_domain.action("move")
        binding = ("r1", "loc_a", "loc_a")
        s = State(task.init_bools, task.init_nums)
        bools, _ = lift(task, s, binding, move)

        expected = {}
        params = move.param_names()
        types = {p.name: p.type for p in move.params}
        for gi, ground_atom in enumerate(task.fluents):
            schema = transport_domain.predicate(ground_atom.pred)
            namings = [()]
            for slot, obj in zip(schema.params, ground_atom.args):
                extended = []
                for prefix in namings:
                    for pname, pobj in zip(params, binding):
                        if pobj == obj and transport_domain.is_subtype(types[pname], slot.type):
                            extended.append(prefix + (pname,))
                namings = extended
            for naming in namings:
                expected[Atom(ground_atom.pred, naming)] = bool(s.bools[gi])
        assert bools == expected
        # both namings of at(r1,loc_a) present, same value
        assert bools[Atom("at", ("?r", "?from"))] is True
        assert bools[Atom("at", ("?r", "?to"))] is True


def _move_dataset(domain, fuels, actions=(MOVE_AB,)):
    datasets = TrajectoryDatasets(domain)
    count = 0
    for fuel in fuels:
        task = transport_task_with_fuel(domain, fuel)
        add_trajectory(datasets, replay(task, list(actions), instance=f"fuel{fuel}"))
        count += 1
    return datasets


class TestLearnBoolean:
    def test_two_successes(self, transport_domain):
        ds = _move_dataset(transport_domain, [10, 7]).dataset("move")
        pre, add, delete = learn_boolean(ds)
        assert Literal(Atom("at", ("?r", "?from"))) in pre
        assert Literal(Atom("at", ("?r", "?to")), positive=False) in pre
        assert add == frozenset({Atom("at", ("?r", "?to"))})
        assert delete == frozenset({Atom("at", ("?r", "?from"))})

    def test_single_success_is_entire_prestate(self, transport_domain):
        ds = _move_dataset(transport_domain, [10]).dataset("move")
        pre, _, _ = learn_boolean(ds)
        # every universe atom constrained, both polarities
        assert len(pre) == len(ds.atom_universe)

    def test_identity_transition_no_effects(self):
        d = parse_domain(
            """
            (define (domain idle)
              (:predicates (p))
              (:action wait :parameters ()))
            """
        )
        p = parse_problem("(define (problem i) (:domain idle) (:init (p)) (:goal (and (not (p)))))", d)
        task = ground(d, p)
        datasets = TrajectoryDatasets(d)
        add_trajectory(datasets, replay(task, [0, 0], t_max=10))
        pre, add, delete = learn_boolean(datasets.dataset("wait"))
        assert add == frozenset() and delete == frozenset()
        assert pre == frozenset({Literal(Atom("p", ()))})

    def test_no_successes_raises(self, transport_domain):
        ds = TrajectoryDatasets(transport_domain).dataset("move")
        with pytest.raises(NoSuccesses):
            learn_boolean(ds)

    def test_failures_recorded_not_learned(self, transport_domain):
        datasets = _move_dataset(transport_domain, [10], actions=(MOVE_BA, MOVE_BA, MOVE_BA))
        ds = datasets.dataset("move")
        assert len(ds.failures) == 3 and len(ds.successes) == 0


class TestLearnNumericPreconditions:
    def test_point(self, transport_domain):
        ds = _move_dataset(transport_domain, [10]).dataset("move")
        poly = learn_numeric_preconditions(ds)
        assert poly.equalities == (((1,), 10),)
        assert poly.inequalities == ()

    def test_interval(self, transport_domain):
        ds = _move_dataset(transport_domain, [7, 10]).dataset("move")
        poly = learn_numeric_preconditions(ds)
        assert set(poly.inequalities) == {((1,), 10), ((-1,), -7)}

    def test_monotone_growth(self, transport_domain):
        small = learn_numeric_preconditions(_move_dataset(transport_domain, [7, 10]).dataset("move"))
        big = learn_numeric_preconditions(_move_dataset(transport_domain, [7, 10, 3]).dataset("move"))
        for fuel in range(3, 11):
            if small.contains((Fraction(fuel),)):
                assert big.contains((Fraction(fuel),))
        assert big.contains((Fraction(3),)) and not small.contains((Fraction(3),))


class TestLearnNumericEffects:
    def test_two_samples_solve_decrement(self, transport_domain):
        ds = _move_dataset(transport_domain, [10, 7]).dataset("move")
        effects = learn_numeric_effects(ds)
        fuel = FunctionTerm("fuel", ("?r",))
        assert effects[fuel] == ((Fraction(1),), Fraction(-1))

    def test_single_sample_underdetermined(self, transport_domain):
        ds = _move_dataset(transport_domain, [10]).dataset("move")
        effects = learn_numeric_effects(ds)
        assert effects[FunctionTerm("fuel", ("?r",))] is UNKNOWN

    def test_unchanged_function_has_no_entry(self):
        d = parse_domain(
            """
            (define (domain still)
              (:functions (f))
              (:action wait :parameters ()))
            """
        )
        p = parse_problem("(define (problem s) (:domain still) (:init (= (f) 4)) (:goal (and (= (f) 9))))", d)
        datasets = TrajectoryDatasets(d)
        add_trajectory(datasets, replay(ground(d, p), [0], t_max=5))
        assert learn_numeric_effects(datasets.dataset("wait")) == {}

    def test_nonlinear_dynamics_rejected(self, transport_domain):
        # forge contradictory samples: same pre-state, different post values
        ds = _move_dataset(transport_domain, [10, 10]).dataset("move")
        ds.successes[1].post_nums[FunctionTerm("fuel", ("?r",))] = Fraction(5)
        with pytest.raises(InconsistentData):
            learn_numeric_effects(ds)


class TestLearnAndExport:
    def test_empty_trajectory_set(self, transport_domain):
        model = learn([], transport_domain)
        assert model.is_empty
        assert export_domain(model).actions == ()

    def test_single_trajectory_excluded(self, transport_domain):
        task = transport_task_with_fuel(transport_domain, 10)
        model = learn([replay(task, [MOVE_AB])], transport_domain)
        assert "move" in model.actions
        assert model.actions["move"].has_unknown_effect
        assert export_domain(model).actions == ()

    def test_two_trajectories_exported(self, transport_domain):
        trajs = [
            replay(transport_task_with_fuel(transport_domain, 10), [MOVE_AB]),
            replay(transport_task_with_fuel(transport_domain, 7), [MOVE_AB]),
        ]
        model = learn(trajs, transport_domain)
        exported = export_domain(model)
        (move,) = exported.actions
        text = serialize_domain(exported)
        assert "(decrease (fuel ?r) 1)" in text
        assert "(>= (fuel ?r) 7)" in text
        assert "(<= (fuel ?r) 10)" in text
        assert "(at ?r ?from)" in text
        assert "(not (at ?r ?to))" in text

    def test_relearn_order_independent(self, transport_domain):
        t1 = replay(transport_task_with_fuel(transport_domain, 10), [MOVE_AB])
        t2 = replay(transport_task_with_fuel(transport_domain, 7), [MOVE_AB])
        t3 = replay(transport_task_with_fuel(transport_domain, 4), [MOVE_AB])
        a = export_domain(learn([t1, t2, t3], transport_domain))
        b = export_domain(learn([t3, t1, t2], transport_domain))
        assert a == b

    def test_every_sample_satisfies_own_model(self, transport_domain):
        datasets = _move_dataset(transport_domain, [4, 7, 10])
        ds = datasets.dataset("move")
        poly = learn_numeric_preconditions(ds)
        pre, _, _ = learn_boolean(ds)
        for s in ds.successes:
            point = tuple(s.pre_nums[t] for t in ds.term_universe)
            assert poly.contains(point)
            for lit in pre:
                assert s.pre_bools[lit.atom] == lit.positive
