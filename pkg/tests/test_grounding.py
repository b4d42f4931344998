import json

import numpy as np
import pytest

from ramp.errors import CombinatorialLimit
from ramp.grounding import encode_state, ground
from ramp.environment import State
from ramp.pddl import parse_domain, parse_problem


@pytest.fixture(scope="module")
def task(transport_domain, transport_problem):
    return ground(transport_domain, transport_problem)


class TestGround:
    def test_two_ground_actions(self, task):
        # same-typed parameters never repeat an object, so only the two
        # distinct-location moves exist
        assert task.num_actions == 2
        assert [a.label for a in task.actions] == [
            "move(r1,loc_a,loc_b)",
            "move(r1,loc_b,loc_a)",
        ]

    def test_layout_and_init(self, task):
        assert [str(a) for a in task.fluents] == ["(at r1 loc_a)", "(at r1 loc_b)"]
        assert [str(t) for t in task.functions] == ["(fuel r1)"]
        assert task.init_bools.tolist() == [True, False]
        assert task.init_nums.tolist() == [10.0]

    def test_no_objects_of_type(self, transport_domain):
        text = """
        (define (problem empty) (:domain transport)
          (:objects loc_a - location)
          (:init)
          (:goal (and)))
        """
        p = parse_problem(text, transport_domain)
        t = ground(transport_domain, p)
        assert t.num_actions == 0

    def test_determinism(self, transport_domain, transport_problem):
        t1 = ground(transport_domain, transport_problem)
        t2 = ground(transport_domain, transport_problem)
        assert t1.layout() == t2.layout()
        assert json.dumps(t1.layout()) == json.dumps(t2.layout())

    def test_size_cap(self, transport_domain, transport_problem):
        with pytest.raises(CombinatorialLimit):
            ground(transport_domain, transport_problem, size_cap=1)

    def test_layout_dump(self, task, tmp_path):
        path = tmp_path / "layout.json"
        task.dump_layout(path)
        doc = json.loads(path.read_text())
        assert set(doc) == {"fluents", "functions", "actions"}
        assert doc["actions"][0] == "move(r1,loc_a,loc_b)"


class TestEncodeState:
    def test_example_observation(self, task):
        obs = encode_state(task, task.init_bools, task.init_nums)
        assert obs.tolist() == [1.0, 0.0, 10.0]

    def test_zero_state(self, task):
        obs = encode_state(task, np.zeros(2, dtype=bool), np.zeros(1))
        assert obs.tolist() == [0.0, 0.0, 0.0]

    def test_goal_features_appended(self, task):
        # one bit per Boolean goal literal, 1 because the goal literal is positive
        obs = encode_state(task, task.init_bools, task.init_nums, include_goal=True)
        assert obs.tolist() == [1.0, 0.0, 10.0, 1.0]
        assert task.observation_length(include_goal=True) == 4

    def test_constant_length(self, task):
        assert task.observation_length() == 3


class TestActionLabel:
    def test_index_zero(self, task):
        assert task.action_label(0) == "move(r1,loc_a,loc_b)"

    def test_out_of_range(self, task):
        with pytest.raises(IndexError):
            task.action_label(2)

    def test_round_trip(self, task):
        for i in range(task.num_actions):
            assert task.action_index(task.action_label(i)) == i


class TestApplicableMask:
    def test_init_mask(self, task):
        mask = task.applicable_mask(task.init_bools, task.init_nums)
        assert mask.tolist() == [True, False]

    def test_fuel_exhausted(self, task):
        mask = task.applicable_mask(task.init_bools, np.array([0.0]))
        assert mask.tolist() == [False, False]


def test_action_count_depends_only_on_object_multiset(transport_domain):
    p1 = parse_problem(
        """
        (define (problem a) (:domain transport)
          (:objects r1 - robot x y - location)
          (:init (at r1 x) (= (fuel r1) 1))
          (:goal (and)))
        """,
        transport_domain,
    )
    p2 = parse_problem(
        """
        (define (problem b) (:domain transport)
          (:objects rob - robot p q - location)
          (:init (at rob q) (= (fuel rob) 9))
          (:goal (and)))
        """,
        transport_domain,
    )
    assert ground(transport_domain, p1).num_actions == ground(transport_domain, p2).num_actions
