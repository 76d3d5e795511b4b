"""Property tests for the structural identities each module promises."""

import random
from fractions import Fraction as F

from hypothesis import given, strategies as st

import oracles
from treeshift.consistency import build_parent, propagate, verify_system
from treeshift.corpus import consistent_shift, random_frontier, random_region, random_weights
from treeshift.measure import (
    backward_extend,
    dirac,
    forward_map,
    mass_at_zero,
    measure,
    moment,
    restrict_normalized,
    scale,
)
from treeshift.moments import hankel_check, is_stieltjes_prefix, theta_lower_bound
from treeshift.shift import (
    ShiftRegion,
    apply_n,
    available_order,
    inner_product,
    inner_product_bruteforce,
    lambda_path_modsq,
    norm_sq,
)
from treeshift.truncate import truncate_triplet, verify_truncated

seeds = st.integers(min_value=0, max_value=10**6)
points = st.fractions(min_value=F(1, 4), max_value=6, max_denominator=6)


@st.composite
def atomic(draw, zero_atom=False):
    pts = draw(st.lists(points, min_size=1, max_size=4, unique=True))
    if zero_atom:
        pts.append(F(0))
    raw = draw(st.lists(st.integers(1, 9), min_size=len(pts), max_size=len(pts)))
    total = sum(raw)
    return measure([(p, F(r, total)) for p, r in zip(pts, raw)])


def small_shift(seed, max_depth=5):
    rng = random.Random(seed)
    region = random_region(rng, max_depth, 200)
    return ShiftRegion(region, random_weights(rng, region)), rng


# --- trees ---------------------------------------------------------------------


@given(seeds)
def test_region_structure(seed):
    shift, _ = small_shift(seed)
    r = shift.region
    assert r.parent[0] is None
    seen = set()
    for u in r.vertices:
        for c in r.children[u]:
            assert r.parent[c] == u and c not in seen
            seen.add(c)
        if not r.children[u] and not r.frontier[u]:
            t = r.template
            assert (not t.kids().get(t.labels.index(r.label(u)) if t.labels else r.label(u))
                    if hasattr(t, "kids") else t.child_count(r.level[u]) == 0)
    assert seen == set(r.non_root)


@given(seeds)
def test_partition_and_composition(seed):
    shift, _ = small_shift(seed)
    r = shift.region
    for u in r.vertices:
        top = available_order(shift, u, 6)
        for n in range(top):
            nxt = r.chi_n(u, n + 1)
            by_children = [r.chi_n(v, n) for v in r.children[u]]
            by_layer = [frozenset(r.children[w]) for w in r.chi_n(u, n)]
            for parts in (by_children, by_layer):
                assert frozenset().union(*parts) == nxt
                assert sum(map(len, parts)) == len(nxt)
        for n in range(top + 1):
            for m in range(top - n + 1):
                assert frozenset().union(*(r.chi_n(w, m) for w in r.chi_n(u, n))) == r.chi_n(u, n + m)
            assert all(oracles.par_chain(r, w, n) == u for w in r.chi_n(u, n))
        kids = r.children[u]
        k = max(0, top - 1)
        for i, a in enumerate(kids):
            for b in kids[i + 1:]:
                assert not (r.descendants(a, k) & r.descendants(b, k))


# --- measures ------------------------------------------------------------------


@given(atomic(), st.fractions(min_value=0, max_value=3, max_denominator=5))
def test_backward_extension_roundtrip(mu, extra):
    integral = moment(mu, -1)
    theta = integral + extra
    nu = backward_extend(mu, theta)
    assert forward_map(nu) == mu
    assert (mass_at_zero(nu) == 0) == (theta == integral)
    assert nu.total_mass() == theta


@given(atomic(zero_atom=True))
def test_forward_then_backward(nu):
    t0 = nu.total_mass()
    mu = forward_map(nu)
    t1 = mu.total_mass()
    back = backward_extend(scale(mu, 1 / t1), t0 / t1)
    assert scale(back, t1) == nu


@given(atomic(zero_atom=True), st.integers(0, 4))
def test_moment_shift(nu, n):
    assert moment(forward_map(nu), n) == moment(nu, n + 1)


@given(atomic(zero_atom=True))
def test_moment_shift_at_minus_one_sees_only_positive_mass(nu):
    # s^-1 * s dnu only charges (0, inf)
    assert moment(forward_map(nu), -1) == nu.total_mass() - mass_at_zero(nu)


@given(atomic())
def test_restriction_mass_monotone(mu):
    masses = [restrict_normalized(mu, i)[1] for i in (F(1, 2), 1, 2, 3, 4, 5, 6, 7)]
    assert masses == sorted(masses) and masses[-1] == 1


# --- moments -------------------------------------------------------------------


@given(st.one_of(atomic(), atomic(zero_atom=True)), st.integers(2, 9))
def test_measure_moments_are_stieltjes(mu, order):
    assert is_stieltjes_prefix([moment(mu, n) for n in range(order + 1)])


@given(atomic())
def test_theta_bound_below_integral(mu):
    t = [moment(mu, n) for n in range(9)]
    assert theta_lower_bound(t) <= moment(mu, -1)


@given(st.lists(st.fractions(min_value=0, max_value=5, max_denominator=4), min_size=3, max_size=8))
def test_shift_necessity(t):
    if is_stieltjes_prefix(t):
        assert hankel_check(t[1:], 0)


@given(
    st.lists(st.fractions(min_value=0, max_value=5, max_denominator=4), min_size=2, max_size=8),
    st.fractions(min_value=F(1, 3), max_value=3, max_denominator=3),
)
def test_scaling_covariance(t, c):
    scaled = [x * c**n for n, x in enumerate(t)]
    for s in (0, 1):
        if len(t) > s:
            assert hankel_check(t, s).psd == hankel_check(scaled, s).psd


# --- shifts --------------------------------------------------------------------


@given(seeds)
def test_weight_path_identities(seed):
    shift, _ = small_shift(seed, 4)
    r = shift.region
    for u in r.vertices:
        top = available_order(shift, u, 4)
        for v in r.descendants(u, max(0, top - 1)):
            for w in r.children[v]:
                assert lambda_path_modsq(shift, u, w) == lambda_path_modsq(shift, u, v) * shift.modsq(w)
        for v in r.children[u]:
            for w in r.descendants(v, max(0, top - 1)):
                assert lambda_path_modsq(shift, u, w) == shift.modsq(v) * lambda_path_modsq(shift, v, w)
        for n in range(top):
            assert norm_sq(shift, u, n + 1) == sum(
                (shift.modsq(v) * norm_sq(shift, v, n) for v in r.children[u]), F(0)
            )
        for n in range(top + 1):
            coeffs = apply_n(shift, u, n)
            assert set(coeffs) <= r.chi_n(u, n)
            assert sum((c.modsq for c in coeffs.values()), F(0)) == norm_sq(shift, u, n)
            assert norm_sq(shift, u, n) == oracles.norm_sq(shift, u, n)


@given(seeds)
def test_inner_product_oracle(seed):
    shift, rng = small_shift(seed, 3)
    r = shift.region
    vs = list(r.vertices)
    for _ in range(12):
        u, v = rng.choice(vs), rng.choice(vs)
        m = rng.randint(0, available_order(shift, u, 3))
        n = rng.randint(0, available_order(shift, v, 3))
        assert inner_product(shift, m, u, n, v) == inner_product_bruteforce(shift, m, u, n, v)


# --- consistency and truncation ------------------------------------------------


@given(seeds)
def test_propagation_properties(seed):
    rng = random.Random(seed)
    region = random_region(rng, 4, 150)
    frontier = random_frontier(rng, region)
    shift = consistent_shift(rng, region, frontier)
    system = propagate(shift, frontier)
    report = verify_system(shift, system, iter_depth=3)
    assert report and report.max_residual == 0
    for u in region.vertices:
        for n in range(available_order(shift, u, 4) + 1):
            assert norm_sq(shift, u, n) == moment(system.mu[u], n)
        # every region-descendant dies out: mu is delta_0
        if not any(region.frontier[w] or shift.modsq(w) > 0 for w in region.descendants(u, available_order(shift, u, 6))
                   if w != u) and not region.frontier[u]:
            assert system.mu[u] == dirac(0)
        kids = region.children[u]
        if len(kids) == 1 and shift.modsq(kids[0]) == 1 and not region.frontier[u]:
            mu_u, _ = build_parent(shift, u, system.mu)
            assert mu_u == backward_extend(system.mu[kids[0]], 1)


@given(seeds, st.sampled_from([F(1, 2), 1, F(3, 2), 2, F(5, 2), 4, 6]))
def test_truncation_properties(seed, i):
    rng = random.Random(seed)
    region = random_region(rng, 3, 80)
    frontier = random_frontier(rng, region)
    shift = consistent_shift(rng, region, frontier)
    system = propagate(shift, frontier)
    trip = truncate_triplet(shift, system, i)
    assert verify_truncated(trip)
    for v in region.vertices:
        assert trip.system.mu[v].support_max() <= i
    for v in region.non_root:
        p = region.parent[v]
        if trip.restricted_mass[p] == 0:
            assert trip.shift.modsq(v) == 0
        else:
            ratio = trip.restricted_mass[v] / trip.restricted_mass[p]
            assert trip.shift.modsq(v) == shift.modsq(v) * ratio
            if i >= 6:
                assert trip.shift.modsq(v) == shift.modsq(v)
