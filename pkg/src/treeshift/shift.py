"""Weighted shifts on materialized tree regions.

Weights are stored as exact moduli squared plus an optional floating phase.
Every norm and consistency formula only needs ``|lambda_v|^2``; phases enter
only through inner products.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import NotDescendant
from .scalar import Surd, exact, is_exact
from .tree import TreeRegion


@dataclass(frozen=True)
class WeightFamily:
    """``modsq[v]`` and ``phase[v]`` for v in V°; index 0 holds a placeholder."""

    modsq: tuple
    phase: tuple = ()

    def __post_init__(self):
        for v, w in enumerate(self.modsq[1:], start=1):
            if w is None or w < 0 or (isinstance(w, float) and not math.isfinite(w)):
                raise ValueError(f"vertex {v}: modulus squared must be finite and >= 0, got {w}")

    def has_phase(self) -> bool:
        return any(p for p in self.phase)

    def phase_of(self, v: int) -> float:
        return self.phase[v] if self.phase else 0.0

    def nonzero(self, v: int) -> bool:
        return self.modsq[v] > 0


@dataclass(frozen=True)
class ShiftRegion:
    region: TreeRegion
    weights: WeightFamily

    def __post_init__(self):
        if len(self.weights.modsq) != len(self.region):
            raise ValueError("weights must cover exactly the region's vertices")

    def modsq(self, v: int):
        return self.weights.modsq[v]

    def all_nonzero(self) -> bool:
        return all(self.weights.modsq[v] > 0 for v in self.region.non_root)


# --- building weight families ------------------------------------------------


def weights_from_table(region: TreeRegion, modsq: Mapping, phase: Mapping | None = None) -> WeightFamily:
    missing = [region.label(v) for v in region.non_root if v not in modsq]
    if missing:
        raise ValueError(f"weight table is missing vertices {missing}")
    ms = [Fraction(0)] + [exact(modsq[v]) for v in region.non_root]
    ph: tuple = ()
    if phase:
        ph = tuple([0.0] + [float(phase.get(v, 0.0)) for v in region.non_root])
    return WeightFamily(tuple(ms), ph)


def weights_by_rule(region: TreeRegion, rule) -> WeightFamily:
    """``rule(v, depth)`` gives the modulus squared of vertex v."""
    ms = [Fraction(0)] + [exact(rule(v, region.level[v])) for v in region.non_root]
    return WeightFamily(tuple(ms))


def constant_weights(region: TreeRegion, c) -> WeightFamily:
    return weights_by_rule(region, lambda v, d: c)


def bergman_weights(region: TreeRegion) -> WeightFamily:
    return weights_by_rule(region, lambda v, d: Fraction(d, d + 1))


def geometric_weights(region: TreeRegion, r) -> WeightFamily:
    r = exact(r)
    return weights_by_rule(region, lambda v, d: r**d)


def by_depth_weights(region: TreeRegion, table: Mapping, default=None) -> WeightFamily:
    def rule(v, d):
        if d in table:
            return table[d]
        if default is None:
            raise ValueError(f"no weight for depth {d}")
        return default

    return weights_by_rule(region, rule)


# --- operations --------------------------------------------------------------


def lambda_path_modsq(shift: ShiftRegion, u: int, v: int):
    """|lambda_{u|v}|^2: product of moduli squared along the chain v -> u."""
    region = shift.region
    if not region.is_descendant(u, v):
        raise NotDescendant(f"{v} is not a descendant of {u}")
    out = Fraction(1)
    for w in region.path_up(u, v):
        out = out * shift.modsq(w)
    return out


def lambda_path_phase(shift: ShiftRegion, u: int, v: int) -> float:
    region = shift.region
    if not region.is_descendant(u, v):
        raise NotDescendant(f"{v} is not a descendant of {u}")
    return math.fsum(shift.weights.phase_of(w) for w in region.path_up(u, v))


@dataclass(frozen=True)
class Coefficient:
    modsq: object
    phase: float = 0.0

    @property
    def value(self):
        """Exact :class:`Surd` when the phase vanishes, else a complex float."""
        if self.phase == 0 and is_exact(self.modsq):
            return Surd.sqrt(self.modsq)
        return cmath.rect(math.sqrt(float(self.modsq)), self.phase)


def _layer_products(shift: ShiftRegion, u: int, n: int) -> dict:
    """{w: |lambda_{u|w}|^2} over Chi<n>(u), built level by level."""
    shift.region._need(u, n)
    layer = {u: Fraction(1)}
    for _ in range(n):
        nxt = {}
        for x, val in layer.items():
            for w in shift.region.children[x]:
                nxt[w] = val * shift.modsq(w)
        layer = nxt
    return layer


def apply_n(shift: ShiftRegion, u: int, n: int) -> dict[int, Coefficient]:
    """Coefficients of S^n e_u on the basis vectors e_v, v in Chi<n>(u)."""
    prods = _layer_products(shift, u, n)
    has_phase = shift.weights.has_phase()
    return {
        w: Coefficient(m, lambda_path_phase(shift, u, w) if has_phase else 0.0)
        for w, m in prods.items()
    }


def norm_sq(shift: ShiftRegion, u: int, n: int):
    """||S^n e_u||^2 = sum over Chi<n>(u) of |lambda_{u|v}|^2 (empty sum is 0)."""
    return sum(_layer_products(shift, u, n).values(), Fraction(0))


def norm_prefix(shift: ShiftRegion, u: int, order: int) -> list:
    """[||S^n e_u||^2 for n = 0..order]."""
    shift.region._need(u, order)
    out = []
    layer = {u: Fraction(1)}
    for n in range(order + 1):
        out.append(sum(layer.values(), Fraction(0)))
        if n == order:
            break
        nxt = {}
        for x, val in layer.items():
            for w in shift.region.children[x]:
                nxt[w] = val * shift.modsq(w)
        layer = nxt
    return out


def norm_table(shift: ShiftRegion, order: int) -> dict[int, list]:
    """Norm prefixes for every vertex, bottom-up in O(|V| * order).

    Each vertex gets ``norm_prefix`` up to its available order, using
    ||S^n e_u||^2 = sum over children v of |lambda_v|^2 ||S^(n-1) e_v||^2.
    """
    region = shift.region
    rows: dict[int, list] = {}
    for u in reversed(region.vertices):
        k = available_order(shift, u, order)
        row = [Fraction(1)]
        for n in range(1, k + 1):
            row.append(sum((shift.modsq(v) * rows[v][n - 1] for v in region.children[u]), Fraction(0)))
        rows[u] = row
    return dict(sorted(rows.items()))


def available_order(shift: ShiftRegion, u: int, wanted: int) -> int:
    limit = shift.region.answerable(u)
    return wanted if limit is None else max(0, min(wanted, limit))


def inner_product(shift: ShiftRegion, m: int, u: int, n: int, v: int):
    """<S^m e_u, S^n e_v> by the three-case closed form.

    Exact (a :class:`Surd`) when no phases are present, complex otherwise.
    """
    region = shift.region
    region._need(u, m)
    region._need(v, n)
    # C^{m,n}(u, v) is nonempty only if one vertex sits exactly |m - n| levels
    # below the other; an empty Chi<k>(lower) gives base == 0 below.
    if m <= n:
        anc, desc, k_small, gap = v, u, m, n - m
    else:
        anc, desc, k_small, gap = u, v, n, m - n
    if region.level[desc] - region.level[anc] != gap or region.par_n(desc, gap) != anc:
        return _zero(shift)
    base = norm_sq(shift, desc, k_small)
    if base == 0:
        return _zero(shift)
    path = lambda_path_modsq(shift, anc, desc)
    if shift.weights.has_phase():
        ph = lambda_path_phase(shift, anc, desc)
        # m <= n: conj(lambda_{v|u}); m > n: lambda_{u|v}
        sign = -1.0 if m <= n else 1.0
        return cmath.rect(math.sqrt(float(path)), sign * ph) * float(base)
    return Surd.sqrt(path) * base if is_exact(path) and is_exact(base) else math.sqrt(path) * base


def _zero(shift: ShiftRegion):
    return 0j if shift.weights.has_phase() else Surd()


def inner_product_bruteforce(shift: ShiftRegion, m: int, u: int, n: int, v: int):
    """Direct double sum over C^{m,n}(u, v) of lambda_{u|w} conj(lambda_{v|w})."""
    region = shift.region
    common = region.chi_n(u, m) & region.chi_n(v, n)
    has_phase = shift.weights.has_phase()
    total = 0j if has_phase else Surd()
    for w in sorted(common):
        a = lambda_path_modsq(shift, u, w)
        b = lambda_path_modsq(shift, v, w)
        if has_phase:
            pa = lambda_path_phase(shift, u, w)
            pb = lambda_path_phase(shift, v, w)
            total += cmath.rect(math.sqrt(float(a)), pa) * cmath.rect(math.sqrt(float(b)), pb).conjugate()
        else:
            total = total + Surd.sqrt(a) * Surd.sqrt(b)
    return total


@dataclass(frozen=True)
class NormBound:
    M: object
    bound: float  # sqrt(M)
    global_claim: bool  # False when frontier vertices leave the claim region-local


def norm_bound(shift: ShiftRegion) -> NormBound:
    """M = max over non-frontier u of the children's summed moduli squared."""
    region = shift.region
    best = Fraction(0)
    for u in region.vertices:
        if region.frontier[u]:
            continue
        s = sum((shift.modsq(v) for v in region.children[u]), Fraction(0))
        if s > best:
            best = s
    return NormBound(best, math.sqrt(best), region.complete)
