"""Scalars: exact rationals (``Fraction``) or floats, plus an exact surd type.

Exactness is tracked by type alone.  ``Fraction`` arithmetic stays exact and
any operation touching a ``float`` degrades to ``float``, which is exactly the
tagging rule the rest of the package relies on.  ``math.inf`` is the one
extended value.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Scalar = Union[Fraction, float]

INF = math.inf


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def exact(x) -> Scalar:
    """Coerce ints to Fraction; leave floats and Fractions alone."""
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, (Fraction, float)):
        return x
    if isinstance(x, Surd):
        return x.to_scalar()
    raise TypeError(f"not a scalar: {x!r}")


def parse_scalar(value) -> Scalar:
    """Parse a JSON scalar: ints and "p/q" strings are exact, floats stay floats."""
    if isinstance(value, bool):
        raise ValueError("boolean is not a scalar")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        text = value.strip()
        if text in ("inf", "+inf", "Infinity"):
            return INF
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse scalar {value!r}") from exc
    raise ValueError(f"cannot parse scalar {value!r}")


def format_scalar(x):
    """JSON encoding: exact values as canonical "p/q" strings, floats as numbers."""
    if isinstance(x, Surd):
        return str(x)
    if isinstance(x, bool):
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, complex):
        return {"re": format_scalar(x.real), "im": format_scalar(x.imag)}
    raise TypeError(f"not a scalar: {x!r}")


def _squarefree_split(n: int) -> tuple[int, int]:
    """Return (a, b) with n == a*a*b and b squarefree."""
    if n == 0:
        return 0, 1
    outer, free, rest = 1, 1, n
    p = 2
    while p * p * p <= rest:
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        outer *= p ** (e // 2)
        if e % 2:
            free *= p
        p += 1 if p == 2 else 2
    # every prime factor of rest now exceeds its cube root: rest is 1, q, q*r or q*q
    r = math.isqrt(rest)
    if r * r == rest:
        return outer * r, free
    return outer, free * rest


class Surd:
    """Exact real number of the form sum(c_r * sqrt(r)) with r squarefree.

    Used for products of weights whose moduli are square roots of rationals.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[int, Fraction] | None = None):
        self.terms = {r: Fraction(c) for r, c in (terms or {}).items() if c != 0}

    @classmethod
    def of(cls, q) -> "Surd":
        q = Fraction(q)
        return cls({1: q}) if q else cls()

    @classmethod
    def sqrt(cls, q) -> "Surd":
        q = Fraction(q)
        if q < 0:
            raise ValueError("square root of a negative rational")
        if q == 0:
            return cls()
        a, b = _squarefree_split(q.numerator * q.denominator)
        return cls({b: Fraction(a, q.denominator)})

    def _coerce(self, other) -> "Surd":
        if isinstance(other, Surd):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Surd.of(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return float(self) + other
        out = dict(self.terms)
        for r, c in other.terms.items():
            out[r] = out.get(r, Fraction(0)) + c
        return Surd(out)

    __radd__ = __add__

    def __neg__(self):
        return Surd({r: -c for r, c in self.terms.items()})

    def __sub__(self, other):
        other_s = self._coerce(other)
        if other_s is NotImplemented:
            return float(self) - other
        return self + (-other_s)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out: dict[int, Fraction] = {}
        for r1, c1 in self.terms.items():
            for r2, c2 in other.terms.items():
                g = math.gcd(r1, r2)
                r = (r1 // g) * (r2 // g)
                out[r] = out.get(r, Fraction(0)) + c1 * c2 * g
        return Surd(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        other = self._coerce(other) if not isinstance(other, float) else NotImplemented
        if other is NotImplemented:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __float__(self):
        return math.fsum(float(c) * math.sqrt(r) for r, c in self.terms.items())

    def __abs__(self):
        return self if float(self) >= 0 else -self

    def is_zero(self) -> bool:
        return not self.terms

    def is_rational(self) -> bool:
        return set(self.terms) <= {1}

    def to_scalar(self) -> Scalar:
        """Fraction when rational, otherwise a float approximation."""
        if self.is_rational():
            return self.terms.get(1, Fraction(0))
        return float(self)

    def conjugate(self) -> "Surd":
        return self

    def __str__(self):
        if not self.terms:
            return "0"
        out = ""
        for r in sorted(self.terms):
            c = self.terms[r]
            body = str(abs(c)) if r == 1 else f"{abs(c)}*sqrt({r})"
            if not out:
                out = body if c > 0 else f"-{body}"
            else:
                out += f" {'+' if c > 0 else '-'} {body}"
        return out

    def __repr__(self):
        return f"Surd({self})"
