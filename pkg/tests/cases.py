"""Small hand-checkable shifts shared by several test modules."""

from __future__ import annotations

from fractions import Fraction as F

from treeshift.consistency import propagate
from treeshift.measure import dirac
from treeshift.shift import ShiftRegion, WeightFamily, bergman_weights, constant_weights
from treeshift.tree import FreeKAry, OneBranch, RootedPath, materialize


def two_child(second_atom=2):
    """Root with children of modsq 1/2 carrying delta_1 and delta_{second_atom}."""
    region = materialize(OneBranch(0, 2), 1)
    shift = ShiftRegion(region, WeightFamily((F(0), F(1, 2), F(1, 2))))
    system = propagate(shift, {1: dirac(1), 2: dirac(second_atom)})
    return shift, system


def bergman_path(depth=10):
    region = materialize(RootedPath(), depth)
    return ShiftRegion(region, bergman_weights(region))


def binary_half(depth=3):
    region = materialize(FreeKAry(2), depth)
    shift = ShiftRegion(region, constant_weights(region, F(1, 2)))
    return shift, propagate(shift, {v: dirac(1) for v in region.frontier_vertices()})
