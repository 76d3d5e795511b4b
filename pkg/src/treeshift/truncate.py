"""Bounded approximations of a shift built by cutting its measures at level i.

For a level i > 0 every measure is restricted to [0, i] and renormalized,
weights are rescaled by the ratio of restricted masses, and eps is divided by
the restricted mass.  The truncated triplet is again consistent and its shift
is bounded by sqrt(i); as i grows it recovers the original data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .consistency import ConsistencyReport, MeasureSystem, moments_match, verify_system
from .errors import KappaViolated
from .measure import Measure, dirac, moment, restrict_normalized
from .scalar import Surd, exact, is_exact
from .shift import (
    ShiftRegion,
    WeightFamily,
    _layer_products,
    available_order,
    inner_product,
    lambda_path_modsq,
    norm_bound,
    norm_sq,
)


def kappa(mu: Measure) -> int:
    """Smallest positive integer k with mu([0, k]) > 0."""
    cands = [math.ceil(p) for p, _ in mu.atoms] + [math.floor(bx.a) + 1 for bx in mu.boxes]
    return max(1, min(cands)) if cands else 1


@dataclass(frozen=True)
class TruncatedTriplet:
    level: object
    shift: ShiftRegion  # same region, truncated weights
    system: MeasureSystem
    kappa: dict
    restricted_mass: dict  # v -> mu_v([0, i]) of the source system
    source_shift: ShiftRegion = field(repr=False)
    source_system: MeasureSystem = field(repr=False)

    @property
    def weights(self) -> WeightFamily:
        return self.shift.weights


def truncate_triplet(shift: ShiftRegion, system: MeasureSystem, i) -> TruncatedTriplet:
    i = exact(i)
    if not i > 0:
        raise ValueError("level must be positive")
    region = shift.region
    mass = {}
    mu_i, eps_i = {}, {}
    for v in region.vertices:
        restricted, m = restrict_normalized(system.mu[v], i)
        mass[v] = m
        if m > 0:
            mu_i[v] = restricted
            eps_i[v] = system.eps[v] / m
        else:
            mu_i[v] = dirac(0)
            eps_i[v] = Fraction(1)
    modsq = [Fraction(0)]
    for v in region.non_root:
        mp = mass[region.parent[v]]
        modsq.append(shift.modsq(v) * mass[v] / mp if mp > 0 else Fraction(0))
    weights = WeightFamily(tuple(modsq), shift.weights.phase)
    return TruncatedTriplet(
        level=i,
        shift=ShiftRegion(region, weights),
        system=MeasureSystem(mu_i, eps_i),
        kappa={v: kappa(system.mu[v]) for v in region.vertices},
        restricted_mass=mass,
        source_shift=shift,
        source_system=system,
    )


@dataclass
class TruncationCheck:
    report: ConsistencyReport
    support_ok: bool
    norm_M: object
    norm_ok: bool
    moments_ok: bool
    passed: bool
    problems: list

    def __bool__(self):
        return self.passed


def verify_truncated(triplet: TruncatedTriplet, tol=0) -> TruncationCheck:
    """Consistency of the truncated triplet plus the sqrt(i) boundedness certificate."""
    report = verify_system(triplet.shift, triplet.system, tol)
    i = triplet.level
    problems = list(report.failures())
    support_ok = all(mu.support_max() <= i for mu in triplet.system.mu.values())
    if not support_ok:
        problems.append(f"some truncated measure reaches beyond {i}")
    nb = norm_bound(triplet.shift)
    norm_ok = nb.M <= i
    if not norm_ok:
        problems.append(f"children weight sum {nb.M} exceeds level {i}")
    moments_ok = True
    region = triplet.shift.region
    for u in region.vertices:
        order = available_order(triplet.shift, u, 4)
        if not moments_match(triplet.shift, triplet.system, u, order, tol):
            moments_ok = False
            problems.append(f"vertex {u}: truncated norms do not match moments")
    passed = report.passed and support_ok and norm_ok and moments_ok
    return TruncationCheck(report, support_ok, nb.M, norm_ok, moments_ok, passed, problems)


def truncated_lambda_path(triplet: TruncatedTriplet, u: int, u2: int):
    """Closed form |lambda_{u|u'}|^2 mu_{u'}([0,i]) / mu_u([0,i]) checked against the product.

    Raises KappaViolated when i < kappa_u and AssertionError when the two
    routes disagree.
    """
    if triplet.level < triplet.kappa[u]:
        raise KappaViolated(f"level {triplet.level} below kappa_{u} = {triplet.kappa[u]}")
    mass = triplet.restricted_mass
    closed = lambda_path_modsq(triplet.source_shift, u, u2) * mass[u2] / mass[u]
    direct = lambda_path_modsq(triplet.shift, u, u2)
    if closed != direct and not (
        not (is_exact(closed) and is_exact(direct)) and abs(closed - direct) <= 1e-12
    ):
        raise AssertionError(f"closed form {closed} != product {direct} for ({u}, {u2})")
    return closed


def _cross_inner(shift: ShiftRegion, trunc: ShiftRegion, u: int, n: int):
    """<S^n e_u, S_i^n e_u> = sum over Chi<n>(u) of |lambda_{u|w}| |lambda^(i)_{u|w}|.

    Phases agree between the two families, so they cancel.
    """
    a = _layer_products(shift, u, n)
    b = _layer_products(trunc, u, n)
    total = Surd()
    exact_ok = True
    fl = 0.0
    for w, x in a.items():
        y = b[w]
        if is_exact(x) and is_exact(y) and exact_ok:
            total = total + Surd.sqrt(x * y)
        else:
            exact_ok = False
        fl += math.sqrt(float(x) * float(y))
    return total if exact_ok else fl


def _as_float(x) -> float:
    return float(x) if not isinstance(x, complex) else abs(x)


def _gap(a, b):
    d = a - b
    if isinstance(d, Surd):
        return d if float(d) >= 0 else -d
    return abs(d)


@dataclass
class ConvergenceRow:
    level: object
    n: int
    truncated: object
    identity_value: object  # int_[0,i] s^n dmu_u / mu_u([0,i])
    target: object
    gap: object
    vector_distance: object
    inner_gap: object  # largest sampled inner-product gap
    above_kappa: bool


@dataclass
class ConvergenceTable:
    vertex: int
    rows: list
    monotone: bool
    zero_beyond_support: bool
    problems: list

    def __bool__(self):
        return self.monotone and self.zero_beyond_support and not self.problems


def _restricted_moment(mu: Measure, i, n: int):
    part, mass = restrict_normalized(mu, i)
    return moment(part, n) if mass > 0 else Fraction(0)


def _is_zero(x, tol=0.0) -> bool:
    if isinstance(x, Surd):
        return x.is_zero()
    if is_exact(x):
        return x == 0
    return abs(x) <= tol


def convergence_report(
    shift: ShiftRegion, system: MeasureSystem, u: int, n_max: int, levels, samples: int = 2
) -> ConvergenceTable:
    """Gaps between the truncated shifts and the original, level by level.

    Norm gaps must be non-increasing once the level passes every kappa and
    vanish once it passes the largest support point.
    """
    region = shift.region
    region._need(u, n_max)
    levels = sorted(exact(i) for i in levels)
    near = sorted(region.descendants(u, min(samples, max(0, available_order(shift, u, n_max) - 1))))
    max_kappa = max(kappa(system.mu[v]) for v in region.vertices)
    support = max(system.mu[v].support_max() for v in region.vertices)
    rows: list[ConvergenceRow] = []
    problems: list[str] = []
    for i in levels:
        trip = truncate_triplet(shift, system, i)
        for n in range(n_max + 1):
            tr = norm_sq(trip.shift, u, n)
            target = norm_sq(shift, u, n)
            ident = _restricted_moment(system.mu[u], i, n)
            if i >= trip.kappa[u] and not _is_zero(_gap(tr, ident), 1e-12):
                problems.append(f"level {i}, n={n}: truncated norm {tr} != restricted moment {ident}")
            cross = _cross_inner(shift, trip.shift, u, n)
            dist = target + tr - 2 * cross
            worst_inner = Fraction(0)
            for v1 in near:
                for v2 in near:
                    for m in range(0, n + 1):
                        if available_order(shift, v1, m) < m or available_order(shift, v2, n) < n:
                            continue
                        g = _gap(inner_product(shift, m, v1, n, v2), inner_product(trip.shift, m, v1, n, v2))
                        if _as_float(g) > _as_float(worst_inner):
                            worst_inner = g
            rows.append(
                ConvergenceRow(i, n, tr, ident, target, _gap(target, tr), dist, worst_inner, i >= max_kappa)
            )
    monotone = True
    for n in range(n_max + 1):
        seq = [r for r in rows if r.n == n and r.above_kappa]
        for r1, r2 in zip(seq, seq[1:]):
            if _as_float(r2.gap) > _as_float(r1.gap) + 1e-12:
                monotone = False
                problems.append(f"n={n}: gap grows from level {r1.level} to {r2.level}")
    zero = True
    for r in rows:
        if r.level > support:
            for name in ("gap", "vector_distance", "inner_gap"):
                val = getattr(r, name)
                if not _is_zero(val, 1e-12):
                    zero = False
                    problems.append(f"level {r.level}, n={r.n}: {name} = {val} beyond the support")
    return ConvergenceTable(u, rows, monotone, zero, problems)
