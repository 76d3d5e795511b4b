"""Verdict engine: necessary Stieltjes checks, leaf obstruction, consistent systems.

Every verdict is scoped to the materialized region and the order N used.
Negative verdicts carry a witness that a single independent oracle call
re-checks; positive verdicts carry a verified measure system.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .consistency import (
    ConsistencyReport,
    MeasureSystem,
    nonzero_weight_specialization_check,
    propagate,
    verify_system,
)
from .errors import ConsistencyViolation, InfiniteMeasure
from .measure import moment, to_json
from .moments import (
    StieltjesReport,
    divergence_certificate,
    hankel_matrix,
    is_stieltjes_prefix,
    theta_lower_bound,
)
from .scalar import INF, format_scalar, is_exact
from .shift import ShiftRegion, available_order, norm_sq, norm_table
from .tree import ExplicitFinite, is_leafless_within

EXIT_CODES = {"Subnormal": 0, "NotSubnormal": 1, "EvidenceUpToOrder": 2, "Undecided": 2}


# --- witnesses ----------------------------------------------------------------


@dataclass(frozen=True)
class HankelWitness:
    vertex: int
    shift: int
    indices: tuple
    value: object  # determinant of the minor, or the smallest eigenvalue when floating
    matrix: tuple  # the offending principal minor
    prefix: tuple
    exact: bool = True
    kind = "hankel"


@dataclass(frozen=True)
class LeafObstruction:
    vertex: int
    weight: object  # modsq of the leaf, nonzero
    kind = "leaf"


@dataclass(frozen=True)
class ThetaBoundWitness:
    vertex: int
    bound: object
    theta: object
    index: int  # n attaining the bound
    prefix: tuple  # t_n = ||S^(n+1) e_u||^2
    kind = "theta"


# --- verdicts -----------------------------------------------------------------


@dataclass
class Subnormal:
    shift: ShiftRegion = field(repr=False)
    order: int
    system: MeasureSystem
    report: ConsistencyReport
    annotations: dict
    scope: str
    kind = "Subnormal"


@dataclass
class NotSubnormal:
    shift: ShiftRegion = field(repr=False)
    order: int
    witness: object
    scope: str
    kind = "NotSubnormal"


@dataclass
class EvidenceUpToOrder:
    shift: ShiftRegion = field(repr=False)
    order: int
    notes: list
    missing: list
    scope: str
    kind = "EvidenceUpToOrder"


@dataclass
class Undecided:
    shift: ShiftRegion = field(repr=False)
    order: int
    reasons: list
    missing: list
    scope: str
    kind = "Undecided"


Verdict = Subnormal | NotSubnormal | EvidenceUpToOrder | Undecided


def exit_code(verdict) -> int:
    return EXIT_CODES[verdict.kind]


# --- stages -------------------------------------------------------------------


@lru_cache(maxsize=4096)
def _cached_stieltjes(prefix: tuple, tol: float) -> StieltjesReport:
    return is_stieltjes_prefix(list(prefix), tol)


def necessary_checks(shift: ShiftRegion, N: int, tol: float = 1e-9, table: dict | None = None) -> dict:
    """Run every vertex's norm prefix (to its available order <= N) through the Hankel tests.

    Identical prefixes are decided once.
    """
    if table is None:
        table = norm_table(shift, N)
    return {u: _cached_stieltjes(tuple(row), tol) for u, row in table.items()}


def leaf_obstruction(shift: ShiftRegion) -> LeafObstruction | None:
    """A genuine leaf refutes subnormality when every weight is nonzero."""
    region = shift.region
    if len(region) < 2 or not shift.all_nonzero():
        return None
    status = is_leafless_within(region)
    if status.kind != "has_leaf" or not status.witness:  # none in the region, or the root alone
        return None
    return LeafObstruction(status.witness, shift.modsq(status.witness))


def _hankel_witness(u: int, report: StieltjesReport, prefix) -> HankelWitness:
    bad = report.failure
    minor = tuple(tuple(row) for row in bad.witness_matrix())
    return HankelWitness(u, bad.shift, bad.indices, bad.value, minor, tuple(prefix), bad.exact)


def theta_check(shift: ShiftRegion, table: dict, tol: float = 1e-9) -> ThetaBoundWitness | None:
    """The measure sum |lambda_v|^2 mu_v over children has moments ||S^(n+1) e_u||^2
    and integral of 1/s at most 1, so t_n^2 / t_(2n+1) <= 1 for those moments."""
    theta = Fraction(1)
    for u, row in table.items():
        t = row[1:]
        if len(t) < 2 or t[0] == 0:
            continue
        try:
            bound = theta_lower_bound(t)
        except ZeroDivisionError:
            bound = INF
        exact = is_exact(bound)
        if bound > theta if exact else bound > theta + tol:
            return ThetaBoundWitness(u, bound, theta, _theta_index(t), tuple(t))
    return None


def _theta_index(t) -> int:
    best, arg = None, 0
    for n in range(len(t)):
        if 2 * n + 1 >= len(t):
            break
        val = INF if t[2 * n + 1] == 0 else t[n] ** 2 / t[2 * n + 1]
        if best is None or val > best:
            best, arg = val, n
    return arg


def _scope(shift: ShiftRegion, N: int, table: dict | None = None) -> str:
    region = shift.region
    extent = "the whole (finite) tree" if region.complete else f"the region of depth {region.depth}"
    out = f"certified on {extent} ({len(region)} vertices) to order {N}"
    if table is not None and len(table[0]) - 1 < N:
        out += f" (the root's norm prefix reaches order {len(table[0]) - 1})"
    return out


def _is_exact_system(shift: ShiftRegion, system: MeasureSystem) -> bool:
    return (
        all(is_exact(w) for w in shift.weights.modsq)
        and not shift.weights.has_phase()
        and all(mu.is_exact for mu in system.mu.values())
        and all(is_exact(e) for e in system.eps.values())
    )


def _moment_mismatches(system: MeasureSystem, table: dict, tol) -> list[str]:
    out = []
    for u, row in table.items():
        for n, t in enumerate(row):
            m = moment(system.mu[u], n)
            if abs(t - m) > tol:
                out.append(f"vertex {u}: ||S^{n} e_u||^2 = {t} but moment {n} of mu_u is {m}")
                break
    return out


def _probe_mismatches(probe: ShiftRegion, system: MeasureSystem, frontier: list, N: int, tol) -> list[str]:
    out = []
    for v in frontier:
        k = available_order(probe, v, N)
        for n in range(1, k + 1):
            t, m = norm_sq(probe, v, n), moment(system.mu[v], n)
            if abs(t - m) > tol:
                out.append(
                    f"frontier vertex {v}: weights below give ||S^{n} e_v||^2 = {t}, "
                    f"the supplied measure has moment {m}"
                )
                break
    return out


def _annotations(shift, system, table, support_bound, source, probed: bool) -> dict:
    region = shift.region
    support = max(mu.support_max() for mu in system.mu.values())
    route_bound = support if support_bound is None else support_bound
    certs = {u: divergence_certificate(row, route_bound) for u, row in table.items()}
    failed = [u for u, c in certs.items() if not c.certified]
    quasi = {
        "status": "certified" if not failed else "unknown",
        "support_bound": format_scalar(route_bound),
    }
    if failed:
        quasi["detail"] = f"vertex {failed[0]}: {certs[failed[0]].detail or 'no route applies'}"
    else:
        routes = sorted({c.route for c in certs.values()})
        quasi["routes"] = routes
    nz = nonzero_weight_specialization_check(shift, system)
    return {
        "source": source,
        "quasi_analytic": quasi,
        "determinacy": {
            "status": "certified",
            "route": "compact_support",
            "detail": f"every mu_u is supported in [0, {format_scalar(support)}]",
        },
        "nonzero_weights": {
            "applicable": nz.applicable,
            "eps_vanishes_off_root": nz.passed if nz.applicable else None,
        },
        "frontier": (
            "none: the region is the whole tree"
            if region.complete
            else f"measures at depth {region.depth} are inputs; the recursion is verified above them"
        ),
        "frontier_probe": (
            "not needed" if region.complete
            else "frontier moments match the weights below the region" if probed
            else "not run: the weights could not be extended below the region"
        ),
    }


def classify(
    shift: ShiftRegion,
    N: int = 8,
    system: MeasureSystem | None = None,
    frontier_measures: dict | None = None,
    support_bound=None,
    tol: float = 1e-9,
    probe: ShiftRegion | None = None,
):
    """Run the pipeline: leaf, Hankel, theta, then the consistent system.

    ``probe`` is an optional deeper materialization of the same shift; when
    given, frontier measures are checked against the weights below them.
    """
    region = shift.region
    scope = _scope(shift, N)

    leaf = leaf_obstruction(shift)
    if leaf is not None:
        return NotSubnormal(shift, N, leaf, scope)

    table = norm_table(shift, N)
    scope = _scope(shift, N, table)
    reports = necessary_checks(shift, N, tol, table)
    for u in region.vertices:
        if not reports[u].passed:
            return NotSubnormal(shift, N, _hankel_witness(u, reports[u], table[u]), scope)

    theta = theta_check(shift, table, tol)
    if theta is not None:
        return NotSubnormal(shift, N, theta, scope)

    source = "supplied"
    if system is None and (frontier_measures is not None or region.complete):
        source = "propagated"
        try:
            system = propagate(shift, frontier_measures or {})
        except ConsistencyViolation as exc:
            return Undecided(
                shift, N,
                [f"propagation from the frontier measures fails: {exc}"],
                ["frontier measures compatible with the weights"],
                scope,
            )
        except (InfiniteMeasure, ValueError) as exc:
            return Undecided(shift, N, [f"propagation failed: {exc}"], ["usable frontier measures"], scope)

    if system is None:
        root_order = len(table[0]) - 1
        notes = [f"all norm prefixes pass both Hankel tests (root order {root_order})"]
        if support_bound is not None:
            cert = divergence_certificate(table[0], support_bound)
            notes.append(
                f"quasi-analytic certificate at the root: {'certified' if cert else 'unknown'}"
                + (f" ({cert.detail})" if cert.detail else "")
            )
        return EvidenceUpToOrder(shift, min(N, root_order), notes, ["system or frontier_measures"], scope)

    vtol = 0 if _is_exact_system(shift, system) else tol
    try:
        report = verify_system(shift, system, vtol)
    except ValueError as exc:
        return Undecided(shift, N, [str(exc)], ["a system covering every vertex"], scope)
    reasons = report.failures()
    reasons += _moment_mismatches(system, table, vtol)
    if probe is not None and not region.complete:
        reasons += _probe_mismatches(probe, system, region.frontier_vertices(), N, vtol)
    if reasons:
        return Undecided(shift, N, reasons, ["a system that verifies"], scope)
    annotations = _annotations(shift, system, table, support_bound, source, probe is not None)
    return Subnormal(shift, N, system, report, annotations, scope)


# --- independent re-checks ----------------------------------------------------


def cofactor_det(matrix) -> Fraction:
    """Determinant by Laplace expansion along rows, memoized on column sets."""
    n = len(matrix)
    if n == 0:
        return Fraction(1)

    @lru_cache(maxsize=None)
    def det(row: int, cols: tuple):
        if row == n:
            return Fraction(1)
        total = Fraction(0)
        for pos, c in enumerate(cols):
            a = matrix[row][c]
            if a == 0:
                continue
            sign = -1 if pos % 2 else 1
            total += sign * a * det(row + 1, cols[:pos] + cols[pos + 1:])
        return total

    return det(0, tuple(range(n)))


def recheck_witness(shift: ShiftRegion, witness, tol: float = 1e-9) -> bool:
    """Re-verify a NotSubnormal witness from scratch (brute-force norms, cofactor minors)."""
    region = shift.region
    if isinstance(witness, HankelWitness):
        u = witness.vertex
        order = len(witness.prefix) - 1
        t = [norm_sq(shift, u, n) for n in range(order + 1)]
        if tuple(t) != tuple(witness.prefix):
            return False
        h = hankel_matrix(t, witness.shift)
        minor = [[h[i][j] for j in witness.indices] for i in witness.indices]
        if witness.exact:
            det = cofactor_det(minor)
            return det < 0 and det == witness.value
        lo = float(np.linalg.eigvalsh(np.array(minor, dtype=float))[0])
        return lo < -tol * max(1.0, max(float(minor[i][i]) for i in range(len(minor))))
    if isinstance(witness, LeafObstruction):
        v = witness.vertex
        template = region.template
        if isinstance(template, ExplicitFinite):
            # map back through the labels to the template's own indexing
            label = region.label(v)
            idx = template.labels.index(label) if template.labels else label
            genuinely_leaf = not template.kids().get(idx)
        else:
            genuinely_leaf = template.child_count(region.level[v]) == 0
        return v != 0 and genuinely_leaf and shift.all_nonzero() and shift.modsq(v) > 0
    if isinstance(witness, ThetaBoundWitness):
        u = witness.vertex
        t = [norm_sq(shift, u, n + 1) for n in range(len(witness.prefix))]
        if tuple(t) != tuple(witness.prefix):
            return False
        n = witness.index
        num, den = t[n] ** 2, t[2 * n + 1]
        if den == 0:
            return num > 0
        return num / den > witness.theta + (0 if is_exact(num / den) else tol)
    raise TypeError(f"unknown witness {witness!r}")


def recheck_certificate(shift: ShiftRegion, system: MeasureSystem, N: int, tol: float = 1e-9) -> list[str]:
    """Re-run the recursion and moment checks on a certificate; returns failures."""
    vtol = 0 if _is_exact_system(shift, system) else tol
    problems = verify_system(shift, system, vtol).failures()
    for u in shift.region.vertices:
        for n in range(available_order(shift, u, N) + 1):
            t, m = norm_sq(shift, u, n), moment(system.mu[u], n)
            if abs(t - m) > vtol:
                problems.append(f"vertex {u}: norm {t} != moment {m} at n={n}")
                break
    return problems


# --- rendering ----------------------------------------------------------------


def _key(region, v) -> str:
    return str(region.label(v))


def system_to_json(region, system: MeasureSystem) -> dict:
    return {
        "measures": {_key(region, v): to_json(system.mu[v]) for v in region.vertices},
        "eps": {_key(region, v): format_scalar(system.eps[v]) for v in region.vertices},
    }


def _matrix_json(m) -> list:
    return [[format_scalar(x) for x in row] for row in m]


def _witness_json(region, w) -> dict:
    if isinstance(w, HankelWitness):
        out = {
            "type": "hankel",
            "vertex": _key(region, w.vertex),
            "shift": w.shift,
            "indices": list(w.indices),
            "minor": _matrix_json(w.matrix),
            "prefix": [format_scalar(x) for x in w.prefix],
            "exact": w.exact,
            "recheck": (
                "recompute t_n = ||S^n e_u||^2 at the vertex, build H[k][l] = t[k+l+shift], "
                "keep rows and columns `indices`, and confirm the determinant of that minor is negative"
            ),
        }
        out["determinant" if w.exact else "min_eigenvalue"] = format_scalar(w.value)
        return out
    if isinstance(w, LeafObstruction):
        return {
            "type": "leaf",
            "vertex": _key(region, w.vertex),
            "weight_modsq": format_scalar(w.weight),
            "recheck": (
                "confirm the vertex has no children in the tree and that every weight is nonzero; "
                "a hyponormal shift with nonzero weights has no leaves"
            ),
        }
    if isinstance(w, ThetaBoundWitness):
        return {
            "type": "theta",
            "vertex": _key(region, w.vertex),
            "bound": format_scalar(w.bound),
            "theta": format_scalar(w.theta),
            "index": w.index,
            "prefix": [format_scalar(x) for x in w.prefix],
            "recheck": "with t_n = ||S^(n+1) e_u||^2 confirm t_n^2 / t_(2n+1) > theta at `index`",
        }
    raise TypeError(f"unknown witness {w!r}")


def verdict_to_json(verdict, problem: dict | None = None) -> dict:
    region = verdict.shift.region
    out: dict = {"verdict": verdict.kind, "order": verdict.order, "scope": verdict.scope}
    if isinstance(verdict, Subnormal):
        rep = verdict.report
        cert = {
            "system": system_to_json(region, verdict.system),
            "consistency": {
                "passed": rep.passed,
                "max_residual": format_scalar(rep.max_residual),
                "worst_vertex": None if rep.worst_vertex is None else _key(region, rep.worst_vertex),
                "tol": format_scalar(rep.tol if not isinstance(rep.tol, int) else Fraction(rep.tol)),
                "notes": rep.notes,
            },
            "annotations": verdict.annotations,
            "recheck": (
                "feed this report to `treeshift verify`; it re-runs the recursion at every vertex "
                "and matches norms against moments up to the stated order"
            ),
        }
        if problem is not None:
            embedded = {k: v for k, v in problem.items() if k not in ("system", "frontier_measures")}
            embedded["system"] = cert["system"]
            cert["problem"] = embedded
        out["certificate"] = cert
    elif isinstance(verdict, NotSubnormal):
        out["witness"] = _witness_json(region, verdict.witness)
        if problem is not None:
            out["witness"]["problem"] = problem
    elif isinstance(verdict, EvidenceUpToOrder):
        out["notes"] = verdict.notes
        out["missing"] = verdict.missing
    else:
        out["reasons"] = verdict.reasons
        out["missing"] = verdict.missing
    return out


def _text(data: dict, indent: int = 0) -> list[str]:
    lines = []
    pad = "  " * indent
    for key in sorted(data):
        val = data[key]
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_text(val, indent + 1))
        elif isinstance(val, list) and val and isinstance(val[0], (list, dict)):
            lines.append(f"{pad}{key}:")
            for item in val:
                lines.append(f"{pad}  - {json.dumps(item, sort_keys=True)}")
        elif isinstance(val, list):
            lines.append(f"{pad}{key}: {', '.join(str(x) for x in val) if val else '(none)'}")
        else:
            lines.append(f"{pad}{key}: {val}")
    return lines


def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def render_report(verdict, format: str = "json", problem: dict | None = None) -> str:
    """Deterministic JSON (sorted keys, rationals as "p/q") or an aligned text view."""
    data = verdict_to_json(verdict, problem)
    if format == "json":
        return dumps(data)
    if format == "text":
        head = [f"verdict: {data.pop('verdict')}", f"scope: {data.pop('scope')}", f"order: {data.pop('order')}"]
        if "certificate" in data:
            cert = dict(data["certificate"])
            cert.pop("problem", None)
            n = len(cert.pop("system")["measures"])
            cert["system"] = f"{n} vertices (full measures in the JSON report)"
            data["certificate"] = cert
        if "witness" in data:
            data["witness"] = {k: v for k, v in data["witness"].items() if k != "problem"}
        return "\n".join(head + _text(data)) + "\n"
    raise ValueError(f"unknown format {format!r}")
