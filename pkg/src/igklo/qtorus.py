"""Normal-form difference operators: finite sums of (scalar) * (shift
monomial u^e), with every coefficient written to the left.

Multiplication is normal ordering: pushing a shift monomial u^e through a
coefficient applies the q-shift automorphism to that coefficient, so the
product of single terms (a, e) * (b, f) is (a * shift_e(b), e + f).
Normal forms are unique, which makes equality coefficientwise.
"""

from __future__ import annotations

import json

from .scalars import Scalar, scalar_sum


def _eadd(a, b):
    return tuple(x + y for x, y in zip(a, b))


class TorusElement:
    """Map from u-exponent vectors (one slot per pair (i,k), in table
    order) to nonzero Scalar coefficients."""

    __slots__ = ("tab", "terms")

    def __init__(self, tab, terms: dict):
        self.tab = tab
        self.terms = terms

    @classmethod
    def zero(cls, tab):
        return cls(tab, {})

    @classmethod
    def from_scalar(cls, tab, s: Scalar):
        e0 = (0,) * len(tab.pairs)
        return cls(tab, {} if s.is_zero() else {e0: s})

    @classmethod
    def one(cls, tab):
        return cls.from_scalar(tab, Scalar.from_int(tab, 1))

    @classmethod
    def shift_gen(cls, tab, i, k, e: int = 1):
        """The generator u_{i,k}^e."""
        ev = [0] * len(tab.pairs)
        ev[tab.pair_pos[(i, k)]] = e
        return cls(tab, {tuple(ev): Scalar.from_int(tab, 1)})

    @classmethod
    def term(cls, tab, coeff: Scalar, evec):
        return cls(tab, {} if coeff.is_zero() else {tuple(evec): coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def single(self):
        """(coeff, evec) when the element has exactly one term."""
        if len(self.terms) != 1:
            raise ValueError("not a single-term element")
        (e, c), = self.terms.items()
        return c, e

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            if e in out:
                s = out[e] + c
                if s.is_zero():
                    del out[e]
                else:
                    out[e] = s
            else:
                out[e] = c
        return TorusElement(self.tab, out)

    def __neg__(self):
        return TorusElement(self.tab, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s: Scalar):
        if s.is_zero():
            return TorusElement.zero(self.tab)
        out = {}
        for e, c in self.terms.items():
            p = s * c
            if not p.is_zero():
                out[e] = p
        return TorusElement(self.tab, out)

    def scale_mono(self, key: int, c: int = 1):
        """Left-multiply by a t-free monomial."""
        return TorusElement(self.tab, {e: s.scale_mono(key, c) for e, s in self.terms.items()})

    def __mul__(self, other):
        acc = {}
        for ea, ca in self.terms.items():
            shifted_cache = {}
            for eb, cb in other.terms.items():
                sb = cb.shift_u(ea)
                p = ca * sb
                if p.is_zero():
                    continue
                k = _eadd(ea, eb)
                acc.setdefault(k, []).append(p)
        out = {}
        for k, parts in acc.items():
            s = parts[0] if len(parts) == 1 else scalar_sum(parts)
            if not s.is_zero():
                out[k] = s
        return TorusElement(self.tab, out)

    def shift_u(self, evec):
        """Conjugate every coefficient (used when commuting a shift past)."""
        return TorusElement(self.tab, {e: c.shift_u(evec) for e, c in self.terms.items()})

    def equals(self, other) -> bool:
        return (self - other).is_zero()

    def apply(self, p: Scalar) -> Scalar:
        """Act on a dense-module vector: u^e maps a v-monomial of v-degree n
        to q^{e.n} times it, i.e. each term acts by the shift automorphism
        followed by multiplication by the coefficient."""
        parts = []
        for e, c in self.terms.items():
            parts.append(c * p.shift_u(e))
        if not parts:
            return Scalar.from_int(self.tab, 0)
        return scalar_sum(parts)

    def u_support(self):
        return sorted(self.terms)

    def render(self, limit: int | None = None) -> str:
        if not self.terms:
            return "0"
        bits = []
        for e in sorted(self.terms):
            mono = "*".join(
                f"u_{v}_{k}[{x}]" for (v, k), x in zip(self.tab.pairs, e) if x
            )
            c = self.terms[e].render()
            bits.append(f"({c})" + (f"*{mono}" if mono else ""))
        s = " + ".join(bits)
        if limit is not None and len(s) > limit:
            s = s[:limit] + f"... (+{len(s) - limit} chars)"
        return s

    def to_json(self) -> str:
        obj = []
        for e in sorted(self.terms):
            obj.append({"u": list(e), "coeff": self.terms[e].render()})
        return json.dumps(obj, sort_keys=True)

    def __repr__(self):
        return f"TorusElement({self.render(limit=200)})"


def torus_mul(a: TorusElement, b: TorusElement) -> TorusElement:
    return a * b


def torus_equals(a: TorusElement, b: TorusElement) -> bool:
    return a.equals(b)


def torus_apply(a: TorusElement, p: Scalar) -> Scalar:
    return a.apply(p)


def q_bracket(a: TorusElement, b: TorusElement, s: Scalar) -> TorusElement:
    """a*b - s*(b*a)."""
    return a * b - (b * a).scale(s)
