"""Equivalence checking for mini-gringo programs with respect to user guides."""

from .analysis import dependency_graph, is_tight, uses_private_recursion
from .completion import first_order_completion, second_order_completion
from .fol import alpha_equivalent, parse_formula, simplify
from .oracle import check_equivalence, external_behavior, ground, stable_models
from .reduction import build_goal, build_specification
from .syntax import parse_program
from .userguide import GuideInput, parse_helper, parse_user_guide

__version__ = "0.1.0"

__all__ = [
    "GuideInput", "alpha_equivalent", "build_goal", "build_specification",
    "check_equivalence", "dependency_graph", "external_behavior", "first_order_completion",
    "ground", "is_tight", "parse_formula", "parse_helper", "parse_program",
    "parse_user_guide", "second_order_completion", "simplify", "stable_models",
    "uses_private_recursion",
]
