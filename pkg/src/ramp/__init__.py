"""Online numeric action-model learning workbench.

Combines a PDDL 2.1 parser/grounder, an episodic vector-space simulator,
a safe convex-hull action-model learner, a forward-search planner, and a
masked policy-gradient agent into a plan-first online learning loop.
"""

__version__ = "0.1.0"
