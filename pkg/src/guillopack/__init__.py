"""Guillotine two-dimensional knapsack toolkit."""

from .core import Instance, Item, Packing, Placement, Rect, validate_packing
from .guillotine import GuillotineTree, NotSeparable, check_guillotine, stage_count, stage_bounded_best
from .oracle import oracle_exact
from .solver import SolverConfig, solve_cardinality

__all__ = [
    "Instance", "Item", "Packing", "Placement", "Rect", "validate_packing",
    "GuillotineTree", "NotSeparable", "check_guillotine", "stage_count", "stage_bounded_best",
    "oracle_exact", "SolverConfig", "solve_cardinality",
]
__version__ = "0.1.0"
