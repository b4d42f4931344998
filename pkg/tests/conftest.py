"""Shared fixtures: the one-robot/two-location delivery task used throughout."""
import pytest

from ramp.pddl import parse_domain, parse_problem

TRANSPORT_DOMAIN = """
(define (domain transport)
  (:requirements :typing :fluents :negative-preconditions)
  (:types robot location)
  (:predicates (at ?r - robot ?l - location))
  (:functions (fuel ?r - robot))
  (:action move
    :parameters (?r - robot ?from - location ?to - location)
    :precondition (and (at ?r ?from) (not (at ?r ?to)) (>= (fuel ?r) 1))
    :effect (and (not (at ?r ?from)) (at ?r ?to) (decrease (fuel ?r) 1))))
"""

TRANSPORT_PROBLEM = """
(define (problem transport-1)
  (:domain transport)
  (:objects r1 - robot loc_a loc_b - location)
  (:init (at r1 loc_a) (= (fuel r1) 10))
  (:goal (and (at r1 loc_b))))
"""


@pytest.fixture(scope="session")
def transport_domain():
    return parse_domain(TRANSPORT_DOMAIN)


@pytest.fixture(scope="session")
def transport_problem(transport_domain):
    return parse_problem(TRANSPORT_PROBLEM, transport_domain)
