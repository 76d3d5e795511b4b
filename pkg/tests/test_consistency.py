import random
from fractions import Fraction as F

import pytest

from cases import binary_half, two_child
from treeshift.consistency import (
    MeasureSystem,
    build_parent,
    condition_value,
    moments_match,
    nonzero_weight_specialization_check,
    propagate,
    system_from_parts,
    verify_system,
)
from treeshift.corpus import consistent_shift, random_frontier, random_region
from treeshift.errors import ConsistencyViolation
from treeshift.measure import dirac, measure, uniform
from treeshift.shift import ShiftRegion, WeightFamily, available_order, constant_weights
from treeshift.tree import OneBranch, from_parent_list, materialize


def test_two_child_system():
    shift, system = two_child()
    assert system.mu[0] == measure([(1, F(1, 2)), (2, F(1, 4)), (0, F(1, 4))])
    assert system.eps[0] == F(1, 4)
    assert verify_system(shift, system)
    assert moments_match(shift, system, 0, 1)


def test_wrong_eps_reports_residual():
    shift, system = two_child()
    bad = MeasureSystem(dict(system.mu), {**system.eps, 0: F(0)})
    rep = verify_system(shift, bad)
    assert not rep
    assert rep.vertices[0].eps_residual == F(1, 4)


def test_star_with_unit_weights_violates():
    region = materialize(from_parent_list([None, 0, 0, 0]), 1)
    shift = ShiftRegion(region, constant_weights(region, 1))
    with pytest.raises(ConsistencyViolation) as err:
        propagate(shift, {})
    assert err.value.vertex == 0


def test_star_with_zero_weights_is_consistent():
    region = materialize(from_parent_list([None, 0, 0]), 1)
    shift = ShiftRegion(region, constant_weights(region, 0))
    system = propagate(shift, {})
    assert system.mu[0] == dirac(0) and system.eps[0] == 1
    assert verify_system(shift, system)


def test_binary_half_system():
    shift, system = binary_half(3)
    assert all(system.mu[v] == dirac(1) for v in shift.region.vertices)
    assert all(system.eps[v] == 0 for v in shift.region.vertices)
    assert verify_system(shift, system)
    assert nonzero_weight_specialization_check(shift, system)


def test_build_parent_infinite_condition():
    region = materialize(from_parent_list([None, 0]), 1)
    shift = ShiftRegion(region, WeightFamily((F(0), F(1, 2))))
    assert condition_value(shift, {1: uniform(0, 1)}, 0) == float("inf")
    with pytest.raises(ConsistencyViolation):
        build_parent(shift, 0, {1: uniform(0, 1)})


def test_frontier_eps_is_mass_at_zero():
    region = materialize(from_parent_list([None, 0, 1]), 1)
    shift = ShiftRegion(region, WeightFamily((F(0), F(1, 2))))
    system = propagate(shift, {1: dirac(2)})
    assert system.eps[1] == 0
    # the genuine leaf at depth 2 sits below the cut-off, so vertex 1 is frontier
    assert region.frontier[1]


def test_system_validation():
    with pytest.raises(ValueError):
        MeasureSystem({0: dirac(1, F(1, 2))}, {0: 0})
    with pytest.raises(ValueError):
        MeasureSystem({0: dirac(1)}, {0: 2})
    s = system_from_parts({"0": dirac(1)}, {"0": 0})
    assert s.eps[0] == 0


def test_missing_frontier_measure():
    shift, _ = two_child()
    with pytest.raises(ValueError):
        propagate(shift, {1: dirac(1)})


def test_random_propagation_is_verified():
    rng = random.Random(11)
    for _ in range(30):
        region = random_region(rng, 4, 150)
        frontier = random_frontier(rng, region)
        shift = consistent_shift(rng, region, frontier)
        system = propagate(shift, frontier)
        assert verify_system(shift, system)
        for u in region.vertices:
            order = available_order(shift, u, 3)
            assert moments_match(shift, system, u, order)


def test_nonzero_specialization_flags_eps():
    shift, system = two_child()
    rep = nonzero_weight_specialization_check(shift, system)
    assert rep.applicable and rep.passed
    region = materialize(OneBranch(0, 2), 1)
    zero = ShiftRegion(region, WeightFamily((F(0), F(0), F(1))))
    assert not nonzero_weight_specialization_check(zero, propagate(zero, {1: dirac(1), 2: dirac(1)})).applicable
