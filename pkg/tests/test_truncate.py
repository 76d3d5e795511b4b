import random
from fractions import Fraction as F

import pytest

from cases import two_child
from treeshift.consistency import propagate
from treeshift.corpus import consistent_shift, random_frontier
from treeshift.errors import KappaViolated
from treeshift.measure import dirac, measure, moment
from treeshift.shift import ShiftRegion, constant_weights, norm_sq
from treeshift.tree import FreeKAry, RootedPath, materialize
from treeshift.truncate import (
    convergence_report,
    kappa,
    truncate_triplet,
    truncated_lambda_path,
    verify_truncated,
)


def test_kappa_values():
    assert kappa(dirac(1)) == 1
    assert kappa(dirac(F(5, 2))) == 3
    assert kappa(dirac(0)) == 1
    assert kappa(measure([(3, F(1, 2)), (F(3, 2), F(1, 2))])) == 2


def test_level_two_of_delta_one_delta_three():
    shift, system = two_child(3)
    assert system.mu[0] == measure([(1, F(1, 2)), (3, F(1, 6)), (0, F(1, 3))])
    trip = truncate_triplet(shift, system, 2)
    assert trip.weights.modsq[1:] == (F(3, 5), F(0))
    assert trip.system.mu[0] == measure([(1, F(3, 5)), (0, F(2, 5))])
    assert trip.system.mu[2] == dirac(0)
    assert trip.system.eps[0] == F(2, 5)
    check = verify_truncated(trip)
    assert check and check.norm_M <= 2
    assert truncated_lambda_path(trip, 0, 1) == F(3, 5)


def test_path_level_above_support_is_identity():
    r = materialize(RootedPath(), 4)
    shift = ShiftRegion(r, constant_weights(r, 1))
    system = propagate(shift, {4: dirac(1)})
    trip = truncate_triplet(shift, system, 2)
    assert trip.weights == shift.weights and trip.system == system


def test_kappa_violated():
    r = materialize(RootedPath(), 2)
    shift = ShiftRegion(r, constant_weights(r, 3))
    system = propagate(shift, {2: dirac(3)})
    trip = truncate_triplet(shift, system, 2)
    with pytest.raises(KappaViolated):
        truncated_lambda_path(trip, 0, 1)
    with pytest.raises(ValueError):
        truncate_triplet(shift, system, 0)


def test_convergence_table_two_atoms():
    shift, system = two_child(3)
    table = convergence_report(shift, system, 0, 1, [2, 4])
    assert table
    at2 = {r.n: r for r in table.rows if r.level == 2}
    at4 = {r.n: r for r in table.rows if r.level == 4}
    # the level-2 norm is the restricted moment; the gap is what the atom at 3 contributed
    assert at2[1].truncated == F(3, 5) and at2[1].gap == F(2, 5)
    assert all(r.gap == 0 and r.vector_distance.is_zero() for r in at4.values())


def test_random_closed_form_and_convergence():
    rng = random.Random(2)
    for _ in range(10):
        region = materialize(rng.choice([RootedPath(), FreeKAry(2)]), rng.randint(1, 3))
        frontier = random_frontier(rng, region)
        shift = consistent_shift(rng, region, frontier)
        system = propagate(shift, frontier)
        for i in (F(3, 2), F(5, 2), 4, 6):
            trip = truncate_triplet(shift, system, i)
            assert verify_truncated(trip)
            for u in region.vertices:
                if i < trip.kappa[u]:
                    continue
                for w in region.descendants(u, region.depth - region.level[u]):
                    truncated_lambda_path(trip, u, w)
                # the truncated norms are the renormalized restricted moments
                for n in range(region.depth - region.level[u] + 1):
                    mu, m = trip.system.mu[u], trip.restricted_mass[u]
                    assert norm_sq(trip.shift, u, n) == moment(mu, n)
        assert convergence_report(shift, system, 0, region.depth, [F(3, 2), F(5, 2), 4, 6])
