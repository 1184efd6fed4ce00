"""Exact scalars of the form sum_k q_k * pi**p_k * i**m_k with rational q_k."""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Iterable, Union

Number = Union[int, Fraction, "Exact"]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot convert {x!r} to an exact rational")


class Exact:
    """Immutable finite sum of rational * pi^p * i^m terms, m in {0, 1}."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: dict | None = None):
        if terms is not None and not isinstance(terms, dict):
            terms = {(0, 0): _frac(terms)}
        clean = {}
        for (p, m), q in (terms or {}).items():
            q = _frac(q)
            m %= 4
            if m >= 2:
                q, m = -q, m - 2
            key = (int(p), m)
            clean[key] = clean.get(key, Fraction(0)) + q
        self._terms = {k: v for k, v in sorted(clean.items()) if v != 0}
        self._hash = None

    @classmethod
    def coerce(cls, x) -> "Exact":
        if isinstance(x, Exact):
            return x
        if isinstance(x, (int, Fraction, str)):
            return cls({(0, 0): _frac(x)})
        raise TypeError(f"cannot convert {x!r} to Exact")

    @classmethod
    def from_parts(cls, q, pi_pow: int = 0, i_pow: int = 0) -> "Exact":
        return cls({(pi_pow, i_pow): _frac(q)})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        try:
            other = Exact.coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __add__(self, other):
        other = Exact.coerce(other)
        out = dict(self._terms)
        for k, q in other._terms.items():
            out[k] = out.get(k, Fraction(0)) + q
        return Exact(out)

    __radd__ = __add__

    def __neg__(self):
        return Exact({k: -q for k, q in self._terms.items()})

    def __sub__(self, other):
        return self + (-Exact.coerce(other))

    def __rsub__(self, other):
        return Exact.coerce(other) - self

    def __mul__(self, other):
        other = Exact.coerce(other)
        out: dict = {}
        for (p1, m1), q1 in self._terms.items():
            for (p2, m2), q2 in other._terms.items():
                q, m = q1 * q2, m1 + m2
                if m >= 2:
                    q, m = -q, m - 2
                key = (p1 + p2, m)
                out[key] = out.get(key, Fraction(0)) + q
        return Exact(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Exact.coerce(other)
        if len(other._terms) != 1:
            raise ZeroDivisionError("only division by a single monomial is exact")
        ((p, m), q), = other._terms.items()
        # 1/i = -i
        inv = Exact({(-p, m): (1 / q) * (-1 if m else 1)})
        return self * inv

    def __pow__(self, n: int):
        if n < 0:
            return Exact(1) / (self ** (-n))
        out = Exact(1)
        for _ in range(n):
            out = out * self
        return out

    def conjugate(self) -> "Exact":
        return Exact({(p, m): (-q if m else q) for (p, m), q in self._terms.items()})

    def real_part(self) -> "Exact":
        return Exact({k: q for k, q in self._terms.items() if k[1] == 0})

    def imag_part(self) -> "Exact":
        return Exact({(p, 0): q for (p, m), q in self._terms.items() if m == 1})

    def __complex__(self):
        z = 0j
        for (p, m), q in self._terms.items():
            z += float(q) * math.pi ** p * (1j if m else 1)
        return z

    def to_complex(self) -> complex:
        return complex(self)

    def is_rational(self) -> bool:
        return all(k == (0, 0) for k in self._terms)

    def monomial(self):
        """Return (q, piPow, iPow) when the scalar is a single term."""
        if len(self._terms) != 1:
            raise ValueError(f"{self} is not a single monomial")
        ((p, m), q), = self._terms.items()
        return q, p, m

    def to_json(self, hbar_pow: int | None = None) -> list:
        out = []
        for (p, m), q in self._terms.items():
            entry = {"q": f"{q.numerator}/{q.denominator}", "piPow": p, "iPow": m}
            if hbar_pow is not None:
                entry["hbarPow"] = hbar_pow
            out.append(entry)
        return out

    @classmethod
    def from_json(cls, items: Iterable[dict]) -> "Exact":
        terms: dict = {}
        for it in items:
            key = (int(it.get("piPow", 0)), int(it.get("iPow", 0)))
            terms[key] = terms.get(key, Fraction(0)) + Fraction(it["q"])
        return cls(terms)

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for (p, m), q in self._terms.items():
            s = str(q)
            if p:
                s += "*pi" + (f"^{p}" if p != 1 else "")
            if m:
                s += "*I"
            parts.append(s)
        return " + ".join(parts)


ZERO = Exact()
ONE = Exact(1)
I = Exact.from_parts(1, 0, 1)
PI = Exact.from_parts(1, 1, 0)


def exact(x) -> Exact:
    return Exact.coerce(x)


def close(a: complex, b: complex, rel: float, abs_tol: float = 0.0) -> bool:
    return cmath.isclose(a, b, rel_tol=rel, abs_tol=abs_tol)
