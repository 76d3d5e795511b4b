from fractions import Fraction as F

import pytest

import oracles
from treeshift.measure import Box, dirac, measure, moment, uniform
from treeshift.moments import (
    bareiss_det,
    carleman_terms,
    divergence_certificate,
    hankel_check,
    hankel_matrix,
    is_stieltjes_prefix,
    theta_lower_bound,
)


def test_hankel_matrix_shape():
    assert hankel_matrix([1, 2, 3, 4, 5]) == [[1, 2, 3], [2, 3, 4], [3, 4, 5]]
    assert hankel_matrix([1, 2, 3, 4, 5], 1) == [[2, 3], [3, 4]]
    with pytest.raises(ValueError):
        hankel_matrix([1], 1)


def test_counterexample_prefix_minor():
    t = [F(x) for x in (1, 1, 4, 4, 4)]
    res = hankel_check(t)
    assert not res.psd and res.exact
    assert res.value == -36
    assert oracles.det(res.witness_matrix()) == -36
    assert oracles.det(hankel_matrix(t)) == -36
    rep = is_stieltjes_prefix(t)
    assert not rep and rep.failure.value == -36


def test_bareiss_against_sympy():
    mats = [
        [[F(1), F(2)], [F(3), F(4)]],
        [[0, 1, 2], [1, 0, 3], [4, -3, 8]],
        [[F(1, 2), F(1, 3), F(1, 4)], [F(1, 3), F(1, 4), F(1, 5)], [F(1, 4), F(1, 5), F(1, 6)]],
        [[0, 0], [0, 5]],
    ]
    for m in mats:
        assert bareiss_det(m) == oracles.det(m)


@pytest.mark.parametrize("d", [0, 1, 3])
def test_power_law_moments_are_stieltjes(d):
    mu = measure(boxes=[Box(0, 1, 1, d)])
    t = [moment(mu, n) for n in range(17)]
    assert is_stieltjes_prefix(t)


def test_bergman_and_hilbert():
    assert is_stieltjes_prefix([F(1, n + 1) for n in range(17)])
    # Hilbert-type prefix from uniform[0, 2]
    assert is_stieltjes_prefix([moment(uniform(0, 2), n) for n in range(13)])


def test_exact_psd_matches_minor_oracle():
    cases = [
        [F(x) for x in (1, 1, 1, 1, 1)],
        [F(x) for x in (1, 2, 3, 4, 5)],
        [F(x) for x in (1, 0, 0, 0, 0)],
        [F(x) for x in (1, 0, 1, 0, 1)],
        [F(x) for x in (0, 0, 0, 0, 1)],
        [F(x) for x in (1, 1, 4, 4, 4)],
        [F(x) for x in (2, 1, 1, 1, 1)],
    ]
    for t in cases:
        for s in (0, 1):
            res = hankel_check(t, s)
            assert res.psd == oracles.is_psd_by_minors(hankel_matrix(t, s))
            if not res.psd:
                assert res.value < 0 and oracles.det(res.witness_matrix()) == res.value


def test_floating_mode_uses_tolerance():
    t = [1.0, 1.0, 4.0, 4.0, 4.0]
    res = hankel_check(t)
    assert not res.psd and not res.exact and res.value < 0
    assert hankel_check([1.0, 0.5, 1 / 3, 0.25, 0.2])


def test_carleman_terms():
    terms = carleman_terms([F(1), F(1, 4), F(1, 16)])
    assert terms == pytest.approx([2.0, 2.0])
    assert carleman_terms([1, 0])[0] == float("inf")


def test_divergence_certificate_routes():
    t = [F(1, n + 1) for n in range(9)]
    assert not divergence_certificate(t)
    assert divergence_certificate(t, support_bound=1).route == "support_bound"
    assert not divergence_certificate([F(1), F(4)], support_bound=1)
    assert divergence_certificate([F(1), F(0), F(0)]).route == "vanishing"
    assert divergence_certificate(t, bounded_weights=True).route == "bounded_weights"


def test_theta_lower_bound_examples():
    assert theta_lower_bound([moment(dirac(4), n) for n in range(9)]) == F(1, 4)
    # uniform[0, 1]: n = 0 already gives 1 / (1/2) = 2 while the integral of 1/s diverges
    assert theta_lower_bound([F(1, n + 1) for n in range(9)]) == 2
    with pytest.raises(ValueError):
        theta_lower_bound([0, 1])
    with pytest.raises(ZeroDivisionError):
        theta_lower_bound([1, 0])


def test_theta_lower_bound_below_integral_for_two_atoms():
    mu = measure([(1, F(1, 2)), (3, F(1, 2))])
    t = [moment(mu, n) for n in range(11)]
    assert theta_lower_bound(t) <= moment(mu, -1) == F(2, 3)
