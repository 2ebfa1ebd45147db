"""Fuzzy conceptual reasoning over convex subsets of R^n.

Log-concave fuzzy concepts, sub-probability states and log-concave channels
with full monoidal composition, a wiring-diagram DSL, and a randomized
verification suite for the underlying closure theorems and inequalities.
"""

from logcon.geometry import (
    Ball,
    Box,
    ConvexSet,
    Hull,
    Point,
    Product,
    Simplex,
    Space,
    UNIT,
    Whole,
    contains,
    distance,
    hull_of,
    minkowski_mix,
    mix,
    product_space,
    project,
    space_of,
    standard_simplex,
    unit_box,
    whole_space,
)

__version__ = "0.1.0"
