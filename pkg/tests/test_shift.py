import math
import random
from fractions import Fraction as F

import pytest

import oracles
from cases import bergman_path, two_child
from treeshift.corpus import random_region, random_weights
from treeshift.errors import DepthExceeded, NotDescendant
from treeshift.scalar import Surd
from treeshift.shift import (
    ShiftRegion,
    WeightFamily,
    apply_n,
    by_depth_weights,
    constant_weights,
    geometric_weights,
    inner_product,
    inner_product_bruteforce,
    lambda_path_modsq,
    norm_bound,
    norm_prefix,
    norm_sq,
    norm_table,
    weights_from_table,
)
from treeshift.tree import FreeKAry, RootedPath, materialize


def test_bergman_norms():
    s = bergman_path(10)
    assert [norm_sq(s, 0, n) for n in range(11)] == [F(1, n + 1) for n in range(11)]
    assert norm_prefix(s, 0, 10) == [F(1, n + 1) for n in range(11)]


def test_isometric_path_and_binary():
    r = materialize(RootedPath(), 5)
    s = ShiftRegion(r, constant_weights(r, 1))
    assert norm_prefix(s, 0, 5) == [1] * 6
    b = materialize(FreeKAry(2), 4)
    sb = ShiftRegion(b, constant_weights(b, F(1, 2)))
    assert norm_prefix(sb, 0, 4) == [1] * 5
    sg = ShiftRegion(b, geometric_weights(b, 2))
    # depth-d weights 2^d: ||S^n e_0||^2 = 2^n * prod_{d<=n} 2^d
    assert norm_sq(sg, 0, 2) == 4 * 2 * 4


def test_two_child_norms():
    shift, _ = two_child()
    assert norm_sq(shift, 0, 1) == 1
    assert norm_sq(shift, 1, 0) == 1


def test_lambda_path_and_not_descendant():
    shift, _ = two_child()
    assert lambda_path_modsq(shift, 0, 2) == F(1, 2)
    assert lambda_path_modsq(shift, 1, 1) == 1
    with pytest.raises(NotDescendant):
        lambda_path_modsq(shift, 1, 2)


def test_inner_product_three_cases():
    s = bergman_path(6)
    # same vertex, equal powers: the norm
    assert inner_product(s, 2, 0, 2, 0) == Surd.of(F(1, 3))
    # v two levels below u: <S^3 e_0, S e_2> = |lambda_{0|2}| ||S e_2||^2
    val = inner_product(s, 3, 0, 1, 2)
    assert oracles.same(val, oracles.inner_product(s, 3, 0, 1, 2))
    # wrong level gap
    assert inner_product(s, 2, 0, 1, 2).is_zero()
    shift, _ = two_child()
    assert inner_product(shift, 0, 1, 0, 2).is_zero()


def test_inner_product_matches_bruteforce_random():
    rng = random.Random(3)
    for _ in range(25):
        r = random_region(rng, 4, 120)
        s = ShiftRegion(r, random_weights(rng, r))
        for u in r.vertices[:6]:
            for v in r.vertices[:6]:
                for m in range(3):
                    for n in range(3):
                        try:
                            a = inner_product(s, m, u, n, v)
                        except DepthExceeded:
                            continue
                        assert a == inner_product_bruteforce(s, m, u, n, v)
                        assert oracles.same(a, oracles.inner_product(s, m, u, n, v))


def test_phased_inner_product():
    r = materialize(RootedPath(), 3)
    w = WeightFamily((F(0), F(1), F(4), F(1)), (0.0, 0.5, -1.0, 0.25))
    s = ShiftRegion(r, w)
    for m, u, n, v in [(2, 0, 1, 1), (1, 1, 2, 0), (1, 0, 1, 0), (3, 0, 2, 1)]:
        a = inner_product(s, m, u, n, v)
        b = inner_product_bruteforce(s, m, u, n, v)
        assert abs(a - b) < 1e-12
    coeffs = apply_n(s, 0, 2)
    assert abs(coeffs[2].value - 2 * complex(math.cos(-0.5), math.sin(-0.5))) < 1e-12


def test_norm_table_agrees_with_prefixes():
    rng = random.Random(5)
    for _ in range(20):
        r = random_region(rng, 5, 200)
        s = ShiftRegion(r, random_weights(rng, r))
        table = norm_table(s, 6)
        for u in r.vertices:
            assert table[u] == norm_prefix(s, u, len(table[u]) - 1)
            assert all(table[u][n] == oracles.norm_sq(s, u, n) for n in range(len(table[u])))


def test_weight_builders():
    r = materialize(RootedPath(), 3)
    w = by_depth_weights(r, {1: 2}, default=F(1, 2))
    assert w.modsq[1:] == (F(2), F(1, 2), F(1, 2))
    with pytest.raises(ValueError):
        by_depth_weights(r, {1: 2})
    with pytest.raises(ValueError):
        weights_from_table(r, {1: 1, 2: 1})
    with pytest.raises(ValueError):
        WeightFamily((F(0), F(-1)))
    with pytest.raises(ValueError):
        ShiftRegion(r, WeightFamily((F(0), F(1))))


def test_norm_bound():
    shift, _ = two_child()
    assert norm_bound(shift).M == 1
    s = bergman_path(3)
    assert norm_bound(s).M == F(3, 4) and not norm_bound(s).global_claim
