"""Hankel positivity, Carleman data and the backward-extension lower bound.

Prefixes are finite, so every verdict here is evidence "up to order N".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .scalar import INF, exact, is_exact


def hankel_matrix(t: Sequence, shift: int = 0) -> list[list]:
    """Largest square Hankel matrix H[k][l] = t[k + l + shift] fitting in ``t``."""
    n = len(t) - 1
    if n < shift:
        raise ValueError(f"prefix of order {n} is too short for shift {shift}")
    size = (n - shift) // 2 + 1
    return [[t[k + l + shift] for l in range(size)] for k in range(size)]


def bareiss_det(matrix: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction-free elimination (Fractions allowed)."""
    m = [[exact(x) for x in row] for row in matrix]
    n = len(m)
    if n == 0:
        return Fraction(1)
    sign, prev = 1, Fraction(1)
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if m[r][k] != 0), None)
            if swap is None:
                return Fraction(0)
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


@dataclass(frozen=True)
class HankelResult:
    psd: bool
    shift: int
    size: int
    exact: bool
    indices: tuple = ()  # principal minor that fails (exact mode)
    value: object = None  # its determinant, or the smallest eigenvalue (floating)
    matrix: tuple = ()

    def __bool__(self):
        return self.psd

    def witness_matrix(self) -> list[list]:
        return [[self.matrix[i][j] for j in self.indices] for i in self.indices]


def _exact_psd(h: list[list]):
    """Decide PSD exactly by symmetric Schur complements.

    Returns None when PSD, else the index set of a principal minor with
    negative determinant.
    """
    n = len(h)
    a = [[exact(x) for x in row] for row in h]
    active = list(range(n))
    kept: list[int] = []
    while active:
        j = active[0]
        d = a[j][j]
        if d < 0:
            return tuple(kept + [j])
        rest = active[1:]
        if d == 0:
            bad = next((k for k in rest if a[j][k] != 0), None)
            if bad is not None:
                return tuple(sorted(kept + [j, bad]))
            active = rest
            continue
        for k in rest:
            if a[j][k] == 0:
                continue
            f = a[k][j] / d
            for l in rest:
                a[k][l] -= f * a[j][l]
        kept.append(j)
        active = rest
    return None


def hankel_check(t: Sequence, shift: int = 0, tol: float = 1e-9) -> HankelResult:
    """PSD test of the shifted Hankel matrix of the prefix ``t``.

    Exact prefixes get a complete decision with a failing principal minor as
    witness.  Floating prefixes use the smallest eigenvalue against
    ``-tol * max diagonal``.
    """
    h = hankel_matrix(t, shift)
    size = len(h)
    frozen = tuple(tuple(row) for row in h)
    if all(is_exact(x) for x in t):
        bad = _exact_psd(h)
        if bad is None:
            return HankelResult(True, shift, size, True, matrix=frozen)
        sub = [[h[i][j] for j in bad] for i in bad]
        return HankelResult(False, shift, size, True, bad, bareiss_det(sub), frozen)
    arr = np.array([[float(x) for x in row] for row in h])
    eig = np.linalg.eigvalsh(arr)
    lo = float(eig[0])
    scale = max(float(np.max(np.diag(arr))), 0.0)
    ok = lo >= -tol * scale if scale > 0 else lo >= -tol
    return HankelResult(ok, shift, size, False, tuple(range(size)) if not ok else (), lo, frozen)


@dataclass
class StieltjesReport:
    passed: bool
    order: int
    checks: list = field(default_factory=list)

    def __bool__(self):
        return self.passed

    @property
    def failure(self) -> HankelResult | None:
        return next((c for c in self.checks if not c.psd), None)


def is_stieltjes_prefix(t: Sequence, tol: float = 1e-9) -> StieltjesReport:
    """Both shifted Hankel matrices PSD.  Necessary evidence up to order N only."""
    checks = [hankel_check(t, 0, tol)]
    if len(t) >= 2:
        checks.append(hankel_check(t, 1, tol))
    return StieltjesReport(all(c.psd for c in checks), len(t) - 1, checks)


def carleman_terms(t: Sequence) -> list[float]:
    """Terms t_n ** (-1/(2n)), n = 1..N, with 1/0 = inf."""
    out = []
    for n in range(1, len(t)):
        tn = t[n]
        out.append(INF if tn == 0 else float(tn) ** (-1.0 / (2 * n)))
    return out


@dataclass(frozen=True)
class DivergenceCertificate:
    certified: bool
    route: str | None = None
    detail: str = ""

    def __bool__(self):
        return self.certified


def divergence_certificate(
    t: Sequence, support_bound=None, bounded_weights: bool = False
) -> DivergenceCertificate:
    """Rigorous witness that sum t_n^(-1/(2n)) diverges, or Unknown.

    Routes: a vanishing moment (all later terms are infinite); a support bound
    M with t_n <= t_0 M^n; terms bounded below together with a caller-asserted
    global weight bound.  Finitely many terms alone never certify.
    """
    if any(tn == 0 for tn in t[1:]):
        n = next(n for n in range(1, len(t)) if t[n] == 0)
        return DivergenceCertificate(True, "vanishing", f"t_{n} = 0 so every later term is infinite")
    if support_bound is not None:
        m = exact(support_bound)
        if m < 0:
            raise ValueError("support bound must be nonnegative")
        t0 = t[0]
        for n, tn in enumerate(t):
            if tn > t0 * m**n:
                return DivergenceCertificate(
                    False, None, f"t_{n} = {tn} exceeds t_0 M^n, support bound {m} is wrong"
                )
        return DivergenceCertificate(
            True, "support_bound", f"t_n <= t_0 {m}^n so terms stay above {m}^(-1/2) t_0^(-1/(2n))"
        )
    if bounded_weights:
        terms = carleman_terms(t)
        if terms and min(terms) > 0:
            return DivergenceCertificate(
                True, "bounded_weights", f"terms bounded below by {min(terms):.6g}"
            )
    return DivergenceCertificate(False)


def theta_lower_bound(t: Sequence):
    """sup over available n of t_n^2 / t_{2n+1}.

    Every representing measure has integral of 1/s at least this large.
    Raises ZeroDivisionError when some t_{2n+1} = 0 while t_n > 0 (the bound
    is infinite).
    """
    if not t or not t[0] > 0:
        raise ValueError("need t_0 > 0")
    best = Fraction(0)
    for n in range(len(t)):
        if 2 * n + 1 >= len(t):
            break
        num, den = t[n] ** 2, t[2 * n + 1]
        if den == 0:
            if num > 0:
                raise ZeroDivisionError(f"t_{2 * n + 1} = 0 while t_{n} > 0")
            continue
        ratio = num / den
        if ratio > best:
            best = ratio
    return best


def is_infinite(x) -> bool:
    return isinstance(x, float) and math.isinf(x)
