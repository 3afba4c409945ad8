"""Fair center clustering over sliding windows."""

from .metric import ColoredPoint, ConfigError, PartitionConstraint, Solution, is_feasible, radius_of
from .sequential import brute_force_opt, fair_center_3approx, gonzalez
from .sketch import Mode, SketchParams, SlidingWindowSketch, delta_from_epsilon, guess_grid

__all__ = [
    "ColoredPoint", "ConfigError", "PartitionConstraint", "Solution", "is_feasible", "radius_of",
    "brute_force_opt", "fair_center_3approx", "gonzalez",
    "Mode", "SketchParams", "SlidingWindowSketch", "delta_from_epsilon", "guess_grid",
]
