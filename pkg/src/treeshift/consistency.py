"""Consistent systems of measures on a shift region.

A system assigns every vertex u a probability measure mu_u and a number
eps_u >= 0 such that

    mu_u = sum_{v in Chi(u)} |lambda_v|^2 (1/s) dmu_v + eps_u delta_0.

Frontier vertices have no materialized children; their measures are inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import ConsistencyViolation, InfiniteMeasure
from .measure import (
    Measure,
    add,
    dirac,
    is_probability,
    mass_at_zero,
    measure_distance,
    moment,
    reweight,
    scale,
    worst_discrepancy,
)
from .scalar import INF, exact
from .shift import ShiftRegion, _layer_products, available_order, norm_sq


@dataclass(frozen=True)
class MeasureSystem:
    mu: Mapping[int, Measure]
    eps: Mapping[int, object]

    def __post_init__(self):
        for v, m in self.mu.items():
            if not is_probability(m):
                raise ValueError(f"mu_{v} is not a probability measure (mass {m.total_mass()})")
        for v, e in self.eps.items():
            if e < 0 or e > 1:
                raise ValueError(f"eps_{v} = {e} lies outside [0, 1]")


def _weighted(c, mu: Measure, power: int = 1) -> Measure:
    """c * (s^-power) dmu, with 0 * inf = 0."""
    if c == 0:
        return Measure()
    return scale(reweight(mu, -power), c)


def condition_value(shift: ShiftRegion, system_or_mu, u: int):
    """sum over children v of |lambda_v|^2 * integral of 1/s dmu_v (may be inf)."""
    mu = system_or_mu.mu if isinstance(system_or_mu, MeasureSystem) else system_or_mu
    total = Fraction(0)
    for v in shift.region.children[u]:
        w = shift.modsq(v)
        if w == 0:
            continue
        val = moment(mu[v], -1)
        if val == INF:
            return INF
        total = total + w * val
    return total


def build_parent(shift: ShiftRegion, u: int, child_measures: Mapping[int, Measure]):
    """Return (mu_u, eps_u) from the children's measures.

    Raises ConsistencyViolation when the consistency condition exceeds 1.
    """
    cond = condition_value(shift, child_measures, u)
    if cond > 1:
        raise ConsistencyViolation(u, cond - 1 if cond != INF else INF)
    eps = 1 - cond
    parts = [_weighted(shift.modsq(v), child_measures[v]) for v in shift.region.children[u]]
    mu = add(*parts, dirac(0, eps)) if eps else add(*parts)
    return mu, eps


def propagate(shift: ShiftRegion, frontier_measures: Mapping[int, Measure]) -> MeasureSystem:
    """Build the system bottom-up from measures on the frontier.

    Genuine leaves get (delta_0, 1).  A frontier vertex gets eps = mu({0}),
    the only value compatible with any consistent continuation below it.
    """
    region = shift.region
    missing = [v for v in region.frontier_vertices() if v not in frontier_measures]
    if missing:
        raise ValueError(f"no frontier measure for vertices {missing}")
    mu: dict[int, Measure] = {}
    eps: dict[int, object] = {}
    for u in reversed(region.vertices):
        if region.frontier[u]:
            mu[u] = frontier_measures[u]
            eps[u] = mass_at_zero(mu[u])
        elif not region.children[u]:
            mu[u], eps[u] = dirac(0), Fraction(1)
        else:
            mu[u], eps[u] = build_parent(shift, u, mu)
    return MeasureSystem(dict(sorted(mu.items())), dict(sorted(eps.items())))


def _rhs(shift: ShiftRegion, system: MeasureSystem, u: int, n: int = 1) -> Measure:
    """sum over Chi<n>(u) of |lambda_{u|v}|^2 (1/s^n) dmu_v + eps_u delta_0."""
    parts = [
        _weighted(c, system.mu[v], n) for v, c in _layer_products(shift, u, n).items()
    ]
    eps = system.eps[u]
    if eps:
        parts.append(dirac(0, eps))
    return add(*parts)


@dataclass
class VertexCheck:
    vertex: int
    residual: object = Fraction(0)
    where: object = None
    condition: object = None
    eps_expected: object = None
    eps_residual: object = Fraction(0)
    iterated: dict = field(default_factory=dict)  # n -> residual
    failures: list = field(default_factory=list)

    def worst(self):
        vals = [self.residual, self.eps_residual] + list(self.iterated.values())
        return max(vals)


@dataclass
class ConsistencyReport:
    vertices: dict
    tol: object
    passed: bool
    worst_vertex: int | None
    max_residual: object
    notes: list = field(default_factory=list)

    def __bool__(self):
        return self.passed

    def failures(self) -> list[str]:
        return [f"vertex {c.vertex}: {msg}" for c in self.vertices.values() for msg in c.failures]


def verify_system(shift: ShiftRegion, system: MeasureSystem, tol=0, iter_depth: int | None = None) -> ConsistencyReport:
    """Check the defining recursion and its consequences at every vertex.

    (a) the recursion as a measure identity at non-frontier vertices;
    (b) eps_u equals 1 minus the consistency sum;
    (c) mu_u({0}) = 0 exactly when eps_u = 0;
    (d) nonzero weight at v forces mu_v({0}) = 0;
    (e) the iterated identity with (1/s^n) for n = 2..K.
    """
    region = shift.region
    missing = [v for v in region.vertices if v not in system.mu or v not in system.eps]
    if missing:
        raise ValueError(f"system is missing vertices {missing}")
    if iter_depth is None:
        iter_depth = min(3, region.depth) if not region.complete else 3
    checks: dict[int, VertexCheck] = {}
    for u in region.vertices:
        chk = VertexCheck(u)
        mu_u, eps_u = system.mu[u], system.eps[u]
        if not region.frontier[u]:
            cond = condition_value(shift, system, u)
            chk.condition = cond
            if cond == INF or cond > 1:
                chk.residual = INF if cond == INF else cond - 1
                chk.failures.append(f"consistency sum {cond} exceeds 1")
            else:
                chk.eps_expected = 1 - cond
                chk.eps_residual = abs(eps_u - chk.eps_expected)
                if chk.eps_residual > tol:
                    chk.failures.append(f"eps = {eps_u}, recursion needs {chk.eps_expected}")
                rhs = _rhs(shift, system, u)
                chk.residual, chk.where = worst_discrepancy(mu_u, rhs, tol)
                if chk.residual > tol:
                    chk.failures.append(f"recursion residual {chk.residual} at {chk.where}")
        at0 = mass_at_zero(mu_u)
        if (at0 <= tol) != (eps_u <= tol):
            chk.failures.append(f"mu({{0}}) = {at0} but eps = {eps_u}")
        if u != 0 and shift.modsq(u) > 0 and at0 > tol:
            chk.failures.append(f"nonzero weight but mu({{0}}) = {at0}")
        if not chk.failures:
            for n in range(2, iter_depth + 1):
                if available_order(shift, u, n) < n:
                    break
                try:
                    rhs = _rhs(shift, system, u, n)
                except InfiniteMeasure:
                    chk.iterated[n] = INF
                    chk.failures.append(f"iterated identity n={n}: infinite right-hand side")
                    continue
                res = measure_distance(mu_u, rhs, tol)
                chk.iterated[n] = res
                if res > tol:
                    chk.failures.append(f"iterated identity n={n} residual {res}")
        checks[u] = chk
    worst_u = max(checks, key=lambda v: checks[v].worst(), default=None)
    worst = checks[worst_u].worst() if worst_u is not None else Fraction(0)
    passed = all(not c.failures for c in checks.values())
    notes = []
    if not region.complete:
        notes.append(
            f"frontier measures at depth {region.depth} are taken as given; "
            "the recursion is checked above them"
        )
    return ConsistencyReport(checks, tol, passed, worst_u, worst, notes)


@dataclass
class MomentsMatch:
    vertex: int
    order: int
    rows: list  # (n, norm_sq, moment, gap)
    passed: bool

    def __bool__(self):
        return self.passed


def moments_match(shift: ShiftRegion, system: MeasureSystem, u: int, order: int, tol=0) -> MomentsMatch:
    """||S^n e_u||^2 against the n-th moment of mu_u for n = 0..order."""
    shift.region._need(u, order)
    rows = []
    ok = True
    for n in range(order + 1):
        lhs = norm_sq(shift, u, n)
        rhs = moment(system.mu[u], n)
        gap = abs(lhs - rhs)
        ok = ok and gap <= tol
        rows.append((n, lhs, rhs, gap))
    return MomentsMatch(u, order, rows, ok)


@dataclass
class SpecializationReport:
    passed: bool
    applicable: bool
    offenders: list

    def __bool__(self):
        return self.passed


def nonzero_weight_specialization_check(shift: ShiftRegion, system: MeasureSystem) -> SpecializationReport:
    """With all weights nonzero, eps must vanish off the root."""
    if not shift.all_nonzero():
        return SpecializationReport(False, False, [])
    bad = [v for v in shift.region.non_root if system.eps[v] != 0]
    return SpecializationReport(not bad, True, bad)


def system_from_parts(mu: Mapping[int, Measure], eps: Mapping[int, object]) -> MeasureSystem:
    return MeasureSystem({int(k): v for k, v in mu.items()}, {int(k): exact(v) for k, v in eps.items()})
