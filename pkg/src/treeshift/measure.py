"""Finite positive Borel measures on [0, inf): atoms plus power-law boxes.

A box ``(a, b, mass, e)`` is ``mass`` times the probability density
proportional to ``s**e`` on ``[a, b]``.  The class is closed under
restriction to ``[0, i]`` and under reweighting by ``s**k`` (which shifts the
exponent), so backward extension and its inverse stay inside it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import ExtensionImpossible, InfiniteMeasure
from .scalar import INF, Scalar, exact, format_scalar, is_exact, parse_scalar

FLOAT_TOL = 1e-12


def _pow(x, k: int):
    if k >= 0:
        return x**k
    if x == 0:
        raise ZeroDivisionError
    return (1 / x) ** (-k) if not is_exact(x) else Fraction(1) / x ** (-k)


def power_integral(a, b, p: int):
    """Integral of s**p over [a, b]; ``inf`` when it diverges at 0."""
    if a == 0 and p <= -1:
        return INF
    if p == -1:
        return math.log(b / a)
    return (_pow(b, p + 1) - _pow(a, p + 1)) / (p + 1)


@dataclass(frozen=True)
class Box:
    a: Scalar
    b: Scalar
    mass: Scalar
    exponent: int = 0

    def __post_init__(self):
        object.__setattr__(self, "a", exact(self.a))
        object.__setattr__(self, "b", exact(self.b))
        object.__setattr__(self, "mass", exact(self.mass))
        if not isinstance(self.exponent, int):
            raise ValueError("box profile exponent must be an integer")
        if not all(math.isfinite(x) for x in (self.a, self.b, self.mass)):
            raise ValueError("box endpoints and mass must be finite")
        if self.a < 0 or not self.b > self.a:
            raise ValueError(f"invalid box interval [{self.a}, {self.b}]")
        if self.mass <= 0:
            raise ValueError("box mass must be positive")
        if self.a == 0 and self.exponent < 0:
            raise ValueError("a box touching 0 needs a nonnegative exponent")

    def normalizer(self):
        return power_integral(self.a, self.b, self.exponent)

    def density_coef(self):
        """Constant c with density c * s**e on [a, b]."""
        return self.mass / self.normalizer()

    def moment(self, k: int):
        top = power_integral(self.a, self.b, self.exponent + k)
        if top == INF:
            return INF
        return self.mass * top / self.normalizer()

    def piece_mass(self, lo, hi):
        """Mass carried on [lo, hi] ∩ [a, b]."""
        lo, hi = max(lo, self.a), min(hi, self.b)
        if not hi > lo:
            return Fraction(0)
        if lo == self.a and hi == self.b:
            return self.mass
        return self.density_coef() * power_integral(lo, hi, self.exponent)


@dataclass(frozen=True)
class Measure:
    """Immutable atom/box mixture.  Build through :func:`measure`."""

    atoms: tuple = ()  # sorted ((point, mass), ...), distinct points
    boxes: tuple = ()  # tuple[Box, ...]

    def __add__(self, other: "Measure") -> "Measure":
        return measure(self.atoms + other.atoms, self.boxes + other.boxes)

    def __mul__(self, c) -> "Measure":
        return scale(self, c)

    __rmul__ = __mul__

    @property
    def is_exact(self) -> bool:
        vals = [x for p in self.atoms for x in p]
        vals += [x for bx in self.boxes for x in (bx.a, bx.b, bx.mass)]
        return all(is_exact(x) for x in vals)

    def total_mass(self):
        return sum((m for _, m in self.atoms), Fraction(0)) + sum(
            (bx.mass for bx in self.boxes), Fraction(0)
        )

    def support_max(self):
        pts = [p for p, _ in self.atoms] + [bx.b for bx in self.boxes]
        return max(pts) if pts else Fraction(0)

    def support_min(self):
        pts = [p for p, _ in self.atoms] + [bx.a for bx in self.boxes]
        return min(pts) if pts else None

    def __repr__(self):
        parts = [f"{format_scalar(m)}*δ{format_scalar(p)}" for p, m in self.atoms]
        parts += [
            f"{format_scalar(bx.mass)}*box[{format_scalar(bx.a)},{format_scalar(bx.b)}]^{bx.exponent}"
            for bx in self.boxes
        ]
        return "Measure(" + (" + ".join(parts) or "0") + ")"


def measure(atoms: Iterable = (), boxes: Iterable = ()) -> Measure:
    """Canonical constructor: merges coincident atoms, drops zero masses, sorts."""
    merged: dict = {}
    for p, m in atoms:
        p, m = exact(p), exact(m)
        if not (math.isfinite(p) and math.isfinite(m)):
            raise ValueError("atom point and mass must be finite")
        if p < 0:
            raise ValueError(f"atom at negative point {p}")
        if m < 0:
            raise ValueError(f"negative atom mass {m}")
        merged[p] = merged.get(p, Fraction(0)) + m
    clean_atoms = tuple(sorted((p, m) for p, m in merged.items() if m != 0))
    clean_boxes = []
    for bx in boxes:
        if not isinstance(bx, Box):
            bx = Box(*bx)
        clean_boxes.append(bx)
    clean_boxes.sort(key=lambda bx: (bx.exponent, bx.a, bx.b, bx.mass))
    return Measure(clean_atoms, tuple(clean_boxes))


ZERO = Measure()


def dirac(point=0, mass=1) -> Measure:
    return measure([(point, mass)])


def uniform(a, b, mass=1) -> Measure:
    return measure(boxes=[Box(a, b, mass, 0)])


def scale(mu: Measure, c) -> Measure:
    c = exact(c)
    if c < 0:
        raise ValueError("negative scale factor")
    if c == 0:
        return ZERO
    return measure(
        [(p, m * c) for p, m in mu.atoms],
        [Box(bx.a, bx.b, bx.mass * c, bx.exponent) for bx in mu.boxes],
    )


def add(*mus: Measure) -> Measure:
    atoms, boxes = [], []
    for mu in mus:
        atoms.extend(mu.atoms)
        boxes.extend(mu.boxes)
    return measure(atoms, boxes)


def total_mass(mu: Measure):
    return mu.total_mass()


def moment(mu: Measure, k: int):
    """Integral of s**k; ``inf`` for k < 0 when mass sits at or accumulates to 0."""
    total = Fraction(0)
    for p, m in mu.atoms:
        if k < 0 and p == 0:
            return INF
        total = total + m * _pow(p, k)
    for bx in mu.boxes:
        val = bx.moment(k)
        if val == INF:
            return INF
        total = total + val
    return total


def mass_at_zero(mu: Measure):
    for p, m in mu.atoms:
        if p == 0:
            return m
    return Fraction(0)


def mass_upto(mu: Measure, i):
    """mu([0, i])."""
    total = Fraction(0)
    for p, m in mu.atoms:
        if p <= i:
            total = total + m
    for bx in mu.boxes:
        total = total + bx.piece_mass(Fraction(0), i)
    return total


def reweight(mu: Measure, k: int) -> Measure:
    """The measure sigma -> integral over sigma of s**k dmu.

    Atoms at 0 are dropped for k > 0.  For k < 0 a result with infinite mass
    raises :class:`InfiniteMeasure`.
    """
    if k == 0:
        return mu
    atoms = []
    for p, m in mu.atoms:
        if p == 0:
            if k < 0:
                raise InfiniteMeasure(f"atom at 0 reweighted by s^{k}")
            continue
        atoms.append((p, m * _pow(p, k)))
    boxes = []
    for bx in mu.boxes:
        new_mass = bx.moment(k)
        if new_mass == INF:
            raise InfiniteMeasure(f"box on [{bx.a}, {bx.b}] reweighted by s^{k}")
        boxes.append(Box(bx.a, bx.b, new_mass, bx.exponent + k))
    return measure(atoms, boxes)


def backward_extend(mu: Measure, theta) -> Measure:
    """nu(sigma) = int_sigma (1/s) dmu + (theta - int (1/s) dmu) * delta_0(sigma)."""
    theta = exact(theta)
    if not theta > 0:
        raise ValueError("theta must be positive")
    integral = moment(mu, -1)
    if integral > theta:
        raise ExtensionImpossible(integral, theta)
    deficit = theta - integral
    return reweight(mu, -1) + dirac(0, deficit)


def forward_map(nu: Measure) -> Measure:
    """mu(sigma) = int_sigma s dnu(s)."""
    return reweight(nu, 1)


def restrict_normalized(mu: Measure, i):
    """Return (mu restricted to [0, i] and renormalized, mu([0, i])).

    When mu([0, i]) vanishes the first component is delta_0.
    """
    i = exact(i)
    atoms = [(p, m) for p, m in mu.atoms if p <= i]
    boxes = []
    for bx in mu.boxes:
        if bx.b <= i:
            boxes.append(bx)
        elif bx.a < i:
            boxes.append(Box(bx.a, i, bx.piece_mass(bx.a, i), bx.exponent))
    part = measure(atoms, boxes)
    mass = part.total_mass()
    if mass == 0:
        return dirac(0), mass
    return scale(part, 1 / mass), mass


def _atom_gaps(a1, a2, tol) -> list:
    pts = sorted({p for p, _ in a1} | {p for p, _ in a2})
    groups: list[list] = []
    for p in pts:
        if groups and abs(p - groups[-1][-1]) <= tol:
            groups[-1].append(p)
        else:
            groups.append([p])
    d1, d2 = dict(a1), dict(a2)
    out = []
    for g in groups:
        m1 = sum((d1.get(p, 0) for p in g), Fraction(0))
        m2 = sum((d2.get(p, 0) for p in g), Fraction(0))
        out.append((g[0], abs(m1 - m2)))
    return out


def _box_gaps(b1, b2) -> list:
    out = []
    for e in sorted({bx.exponent for bx in b1} | {bx.exponent for bx in b2}):
        s1 = [bx for bx in b1 if bx.exponent == e]
        s2 = [bx for bx in b2 if bx.exponent == e]
        cuts = sorted({x for bx in s1 + s2 for x in (bx.a, bx.b)})
        for lo, hi in zip(cuts, cuts[1:]):
            m1 = sum((bx.piece_mass(lo, hi) for bx in s1), Fraction(0))
            m2 = sum((bx.piece_mass(lo, hi) for bx in s2), Fraction(0))
            out.append(((lo, hi, e), abs(m1 - m2)))
    return out


def measure_distance(mu1: Measure, mu2: Measure, tol=0):
    """Largest mass discrepancy over atoms and elementary box pieces.

    Atoms closer than ``tol`` are identified; boxes are split at every
    breakpoint of either measure, separately per profile exponent.
    """
    gaps = [g for _, g in _atom_gaps(mu1.atoms, mu2.atoms, tol)]
    gaps += [g for _, g in _box_gaps(mu1.boxes, mu2.boxes)]
    return max(gaps, default=Fraction(0))


def worst_discrepancy(mu1: Measure, mu2: Measure, tol=0):
    """Like :func:`measure_distance` but also names where it happens."""
    cands = [(g, ("atom", p)) for p, g in _atom_gaps(mu1.atoms, mu2.atoms, tol)]
    cands += [(g, ("box",) + key) for key, g in _box_gaps(mu1.boxes, mu2.boxes)]
    if not cands:
        return Fraction(0), None
    return max(cands, key=lambda c: c[0])


def measures_equal(mu1: Measure, mu2: Measure, tol=0) -> bool:
    return measure_distance(mu1, mu2, tol) <= tol


def is_probability(mu: Measure, tol=FLOAT_TOL) -> bool:
    total = mu.total_mass()
    if is_exact(total):
        return total == 1
    return abs(total - 1) <= tol


# --- JSON ------------------------------------------------------------------


def to_json(mu: Measure) -> dict:
    return {
        "atoms": [[format_scalar(p), format_scalar(m)] for p, m in mu.atoms],
        "boxes": [
            [format_scalar(bx.a), format_scalar(bx.b), format_scalar(bx.mass), bx.exponent]
            for bx in mu.boxes
        ],
    }


def from_json(data) -> Measure:
    if not isinstance(data, dict):
        raise ValueError("a measure must be an object with 'atoms' and/or 'boxes'")
    unknown = set(data) - {"atoms", "boxes"}
    if unknown:
        raise ValueError(f"unknown measure keys {sorted(unknown)}")
    atoms = []
    for entry in data.get("atoms", []):
        if not isinstance(entry, list) or len(entry) != 2:
            raise ValueError(f"atom must be [point, mass], got {entry!r}")
        atoms.append((parse_scalar(entry[0]), parse_scalar(entry[1])))
    boxes = []
    for entry in data.get("boxes", []):
        if not isinstance(entry, list) or len(entry) not in (3, 4):
            raise ValueError(f"box must be [a, b, mass, exponent], got {entry!r}")
        e = entry[3] if len(entry) == 4 else 0
        if not isinstance(e, int) or isinstance(e, bool):
            raise ValueError("box exponent must be an integer")
        boxes.append(Box(parse_scalar(entry[0]), parse_scalar(entry[1]), parse_scalar(entry[2]), e))
    return measure(atoms, boxes)
