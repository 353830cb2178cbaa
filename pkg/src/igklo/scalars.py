"""Exact commutative coefficient arithmetic.

Scalars live in the fraction field of integer-coefficient Laurent
polynomials over a per-instance symbol registry (VariableTable).  Square
roots never become radicals: C, the w-variables and the z-variables are
carried through adjoined half-power symbols (D, v_{i,k}, half-unit z
exponents), and each t_i is a plain symbol whose square rewrites to a
closed monomial expression, so no sign ambiguity can arise.

Polynomials are sparse dicts keyed by a single packed integer: every
symbol owns a fixed 16-bit slot holding exponent+HALF, which makes
monomial multiplication one big-int addition.
"""

from __future__ import annotations

from math import gcd

WIDTH = 16
HALF = 1 << (WIDTH - 1)
EMASK = (1 << WIDTH) - 1

SPECTRAL_NAMES = ("z", "w", "w1", "w2")


class VariableTable:
    """Ordered symbol registry derived from an Instance.

    Symbol order: q; D (= C^{1/2}); kappa per vertex; t per vertex with
    theta=1; half-power z symbols z_{i,l} (stored exponents count z^{1/2}
    units); half-power w symbols v_{i,k} (exponents count w^{1/2} units);
    then the four central spectral symbols z, w, w1, w2 used by the
    relation checkers.  The v/z/t/kappa population is exactly determined
    by the instance; the spectral block is fixed.
    """

    def __init__(self, inst):
        self.inst = inst
        names = ["q", "D"]
        self.iq = 0
        self.iD = 1
        self.kappa_idx = {}
        self.t_idx = {}
        self.z_idx = {}
        self.v_idx = {}
        for v in inst.vertices:
            self.kappa_idx[v] = len(names)
            names.append(f"k_{v}")
        for v in inst.vertices:
            if inst.theta[v]:
                self.t_idx[v] = len(names)
                names.append(f"t_{v}")
        for v in inst.vertices:
            for l in range(1, inst.lam[v] + 1):
                self.z_idx[(v, l)] = len(names)
                names.append(f"z_{v}_{l}")
        pairs = []
        for v in inst.vertices:
            for k in range(1, inst.m[v] + 1):
                self.v_idx[(v, k)] = len(names)
                names.append(f"v_{v}_{k}")
                pairs.append((v, k))
        self.spec_idx = {}
        for s in SPECTRAL_NAMES:
            self.spec_idx[s] = len(names)
            names.append(s)
        self.names = tuple(names)
        self.n = len(names)
        self.BIAS = sum(HALF << (WIDTH * i) for i in range(self.n))
        self.pairs = tuple(pairs)
        self.pair_pos = {p: i for i, p in enumerate(pairs)}
        self.pair_slots = tuple(self.v_idx[p] for p in pairs)
        # z symbols are stored in half-units; D and v print in their own units
        self.half_slots = frozenset(self.z_idx.values())
        self._tau_sq = {}
        self._one_plus_q = None
        self._tau_override = None

    # -- packed-key helpers -------------------------------------------------

    def mono(self, exps: dict) -> int:
        """Packed key for a monomial given {symbol index: exponent}."""
        k = self.BIAS
        for i, e in exps.items():
            k += e << (WIDTH * i)
        return k

    def unpack(self, key: int) -> tuple:
        return tuple(((key >> (WIDTH * i)) & EMASK) - HALF for i in range(self.n))

    def exp_at(self, key: int, i: int) -> int:
        return ((key >> (WIDTH * i)) & EMASK) - HALF

    def key_mul(self, a: int, b: int) -> int:
        return a + b - self.BIAS

    def key_pow(self, a: int, n: int) -> int:
        return self.BIAS + n * (a - self.BIAS)

    def q_key(self, e: int) -> int:
        return self.BIAS + (e << 0)  # q sits in slot 0

    def w_key(self, v, k, e=1) -> int:
        """Key of w_{v,k}^e (two half-units per w power)."""
        return self.mono({self.v_idx[(v, k)]: 2 * e})

    def z_key(self, v, l, e=1) -> int:
        return self.mono({self.z_idx[(v, l)]: 2 * e})

    def C_key(self, e=1) -> int:
        return self.mono({self.iD: 2 * e})

    def one_plus_q(self) -> "Poly":
        if self._one_plus_q is None:
            self._one_plus_q = Poly(self, {self.BIAS: 1, self.q_key(1): 1})
        return self._one_plus_q

    def tau_sq_parts(self, v) -> tuple:
        """(sign, monomial key, (1+q)-denominator power) with t_v^2 equal to
        sign * mono / (1+q)^dpow.

        The value is pinned by the fixed-point balance of the square-kernel
        relation: t^2 = (-1)^{mu} kappa C^mu q^{lam-mu} / (1+q)^2 (with the
        series normalization that makes the leading mode 1)."""
        if self._tau_override is not None and v in self._tau_override:
            return self._tau_override[v]
        if v not in self._tau_sq:
            inst = self.inst
            mu, lam = inst.mu[v], inst.lam[v]
            sign = -1 if mu % 2 else 1
            key = self.mono({self.kappa_idx[v]: 1, self.iD: 2 * mu, self.iq: lam - mu})
            self._tau_sq[v] = (sign, key, 2)
        return self._tau_sq[v]

    def override_tau_sq(self, v, scalar_int: int):
        """Test hook: replace t_v^2 by an integer constant."""
        if self._tau_override is None:
            self._tau_override = {}
        if scalar_int == 0:
            raise ValueError("tau^2 must be nonzero")
        self._tau_override[v] = (scalar_int, self.BIAS, 0)


def _treduce(tab: VariableTable, d: dict) -> tuple:
    """Rewrite every t_v^e with e outside {0,1} using the closed form of
    t_v^2.  Returns (reduced dict, p) meaning result = dict / (1+q)^p."""
    tslots = tab.t_idx
    if not tslots:
        return d, 0
    hit = False
    for key in d:
        for idx in tslots.values():
            e = ((key >> (WIDTH * idx)) & EMASK) - HALF
            if e != 0 and e != 1:
                hit = True
                break
        if hit:
            break
    if not hit:
        return d, 0
    onepq = tab.one_plus_q()
    items = []  # (poly-part dict, den_need)
    maxneed = 0
    for key, c in d.items():
        need = 0
        numer_pq = 0
        for v, idx in tslots.items():
            e = ((key >> (WIDTH * idx)) & EMASK) - HALF
            if e == 0 or e == 1:
                continue
            k = e >> 1
            r = e & 1
            sign, tkey, dpow = tab.tau_sq_parts(v)
            key += (r - e) << (WIDTH * idx)
            key += k * (tkey - tab.BIAS)
            if sign == -1:
                if k % 2:
                    c = -c
            elif sign != 1:
                if k < 0:
                    raise ValueError("non-unit tau^2 override with negative t power")
                c *= sign ** k
            if k >= 0:
                need += k * dpow
            else:
                numer_pq += -k * dpow
        items.append((c, key, need, numer_pq))
        maxneed = max(maxneed, need)
    out = {}
    for c, key, need, numer_pq in items:
        p = numer_pq + (maxneed - need)
        if p:
            part = _poly_pow_dict(tab, onepq.d, p)
            for pk, pc in part.items():
                nk = key + pk - tab.BIAS
                nv = out.get(nk, 0) + c * pc
                if nv:
                    out[nk] = nv
                elif nk in out:
                    del out[nk]
        else:
            nv = out.get(key, 0) + c
            if nv:
                out[key] = nv
            elif key in out:
                del out[key]
    return out, maxneed


def _poly_mul_dict(tab, a: dict, b: dict) -> dict:
    out = {}
    bias = tab.BIAS
    get = out.get
    if len(a) > len(b):
        a, b = b, a
    for ea, ca in a.items():
        ea -= bias
        for eb, cb in b.items():
            k = ea + eb
            v = get(k, 0) + ca * cb
            if v:
                out[k] = v
            elif k in out:
                del out[k]
    return out


def _poly_pow_dict(tab, a: dict, n: int) -> dict:
    out = {tab.BIAS: 1}
    base = a
    while n:
        if n & 1:
            out = _poly_mul_dict(tab, out, base)
        n >>= 1
        if n:
            base = _poly_mul_dict(tab, base, base)
    return out


class Poly:
    """Sparse Laurent polynomial: {packed exponent key: nonzero int}."""

    __slots__ = ("tab", "d", "_h", "_sk")

    def __init__(self, tab: VariableTable, d: dict):
        self.tab = tab
        self.d = d
        self._h = None
        self._sk = None

    @classmethod
    def zero(cls, tab):
        return cls(tab, {})

    @classmethod
    def const(cls, tab, c: int):
        return cls(tab, {tab.BIAS: c} if c else {})

    @classmethod
    def mono(cls, tab, key: int, c: int = 1):
        return cls(tab, {key: c} if c else {})

    def is_zero(self) -> bool:
        return not self.d

    def is_monomial(self) -> bool:
        return len(self.d) == 1

    def __eq__(self, other):
        return isinstance(other, Poly) and self.d == other.d

    def __hash__(self):
        if self._h is None:
            self._h = hash(frozenset(self.d.items()))
        return self._h

    def sort_key(self):
        if self._sk is None:
            self._sk = tuple(sorted(self.d.items()))
        return self._sk

    def __neg__(self):
        return Poly(self.tab, {k: -c for k, c in self.d.items()})

    def __add__(self, other):
        a, b = self.d, other.d
        if len(a) < len(b):
            a, b = b, a
        out = dict(a)
        get = out.get
        for k, c in b.items():
            v = get(k, 0) + c
            if v:
                out[k] = v
            elif k in out:
                del out[k]
        return Poly(self.tab, out)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        return Poly(self.tab, _poly_mul_dict(self.tab, self.d, other.d))

    def mul_int(self, c: int):
        if c == 0:
            return Poly.zero(self.tab)
        if c == 1:
            return self
        return Poly(self.tab, {k: c * v for k, v in self.d.items()})

    def scale(self, key: int, c: int = 1):
        """Multiply by the monomial c * key."""
        off = key - self.tab.BIAS
        if c == 1:
            return Poly(self.tab, {k + off: v for k, v in self.d.items()})
        return Poly(self.tab, {k + off: c * v for k, v in self.d.items()})

    def pow(self, n: int):
        if n < 0:
            raise ValueError("negative power on a polynomial")
        return Poly(self.tab, _poly_pow_dict(self.tab, self.d, n))

    def int_content(self) -> int:
        g = 0
        for c in self.d.values():
            g = gcd(g, c)
            if g == 1:
                break
        return g or 1

    def mono_content_key(self) -> int:
        """Componentwise minimum exponent, as a packed key."""
        tab = self.tab
        mins = None
        for k in self.d:
            exps = [((k >> (WIDTH * i)) & EMASK) - HALF for i in range(tab.n)]
            if mins is None:
                mins = exps
            else:
                mins = [m if m < e else e for m, e in zip(mins, exps)]
        return tab.mono({i: e for i, e in enumerate(mins) if e})

    def primitive(self) -> tuple:
        """Return (coeff, mono key, primitive poly): self = coeff * key * prim.

        The primitive part has integer content 1, no monomial divisor, and
        a positive coefficient on its largest key.
        """
        if not self.d:
            return 0, self.tab.BIAS, self
        g = self.int_content()
        mk = self.mono_content_key()
        if self.d[max(self.d)] < 0:
            g = -g
        off = mk - self.tab.BIAS
        prim = Poly(self.tab, {k - off: c // g for k, c in self.d.items()})
        return g, mk, prim

    def divide_exact(self, f: "Poly"):
        """Exact quotient self/f, or None when f does not divide (or the
        attempt exceeds its step budget; callers treat that as 'no')."""
        fd = f.d
        if not fd:
            raise ZeroDivisionError("division by zero polynomial")
        if not self.d:
            return Poly.zero(self.tab)
        if len(self.d) < len(fd):
            return None
        bias = self.tab.BIAS
        flead = max(fd)
        fc = fd[flead]
        r = dict(self.d)
        q = {}
        budget = 4 * len(r) + 32
        while r:
            budget -= 1
            if budget < 0:
                return None
            rlead = max(r)
            c, rem = divmod(r[rlead], fc)
            if rem:
                return None
            tk = rlead - flead  # quotient key offset from BIAS
            q[tk + bias] = c
            for k, v in fd.items():
                nk = k + tk
                nv = r.get(nk, 0) - c * v
                if nv:
                    r[nk] = nv
                elif nk in r:
                    del r[nk]
        return Poly(self.tab, q)

    def shift_u(self, evec) -> "Poly":
        """Conjugation by the shift monomial u^evec: each monomial gains
        q^{sum_j evec_j * (v_j-exponent)}."""
        tab = self.tab
        slots = tab.pair_slots
        out = {}
        for k, c in self.d.items():
            qb = 0
            for e, s in zip(evec, slots):
                if e:
                    qb += e * (((k >> (WIDTH * s)) & EMASK) - HALF)
            nk = k + qb  # q occupies slot 0
            nv = out.get(nk, 0) + c
            if nv:
                out[nk] = nv
            elif nk in out:
                del out[nk]
        return Poly(tab, out)

    def subst_monomial(self, idx: int, key: int, sign: int = 1) -> "Poly":
        """Substitute symbol idx by sign*key (a signed monomial)."""
        tab = self.tab
        off = key - tab.BIAS
        out = {}
        for k, c in self.d.items():
            e = ((k >> (WIDTH * idx)) & EMASK) - HALF
            if e:
                k += (-e) << (WIDTH * idx)
                k += e * off
                if sign < 0 and e % 2:
                    c = -c
            nv = out.get(k, 0) + c
            if nv:
                out[k] = nv
            elif k in out:
                del out[k]
        return Poly(tab, out)

    def max_exp(self, idx: int) -> int:
        return max((((k >> (WIDTH * idx)) & EMASK) - HALF for k in self.d), default=0)

    def involves(self, idx: int) -> bool:
        return any(((k >> (WIDTH * idx)) & EMASK) - HALF for k in self.d)

    def coeff_split(self, idx: int) -> dict:
        """Split into {exponent of symbol idx: Poly free of idx}."""
        tab = self.tab
        out = {}
        for k, c in self.d.items():
            e = ((k >> (WIDTH * idx)) & EMASK) - HALF
            out.setdefault(e, {})[k + ((-e) << (WIDTH * idx))] = c
        return {e: Poly(tab, d) for e, d in out.items()}

    def render(self) -> str:
        if not self.d:
            return "0"
        tab = self.tab
        bits = []
        for k in sorted(self.d, reverse=True):
            c = self.d[k]
            syms = []
            for i in range(tab.n):
                e = ((k >> (WIDTH * i)) & EMASK) - HALF
                if not e:
                    continue
                if i in tab.half_slots:
                    txt = str(e // 2) if e % 2 == 0 else f"{e}/2"
                else:
                    txt = str(e)
                syms.append(f"{tab.names[i]}[{txt}]")
            if not syms:
                bits.append(str(c))
            elif c == 1:
                bits.append("*".join(syms))
            elif c == -1:
                bits.append("-" + "*".join(syms))
            else:
                bits.append(f"{c}*" + "*".join(syms))
        s = " + ".join(bits)
        return s.replace("+ -", "- ")

    def __repr__(self):
        return f"Poly({self.render()})"


# cap on opportunistic numerator/denominator cancellation attempts
_CANCEL_LIMIT = 800


class Scalar:
    """Element of the coefficient field, kept as num / (den_int * prod of
    primitive polynomial factors).  Denominators are free of every t_i;
    numerators are t-reduced (each t exponent in {0,1})."""

    __slots__ = ("tab", "num", "den_int", "den")

    def __init__(self, tab, num: Poly, den_int: int, den: tuple):
        self.tab = tab
        self.num = num
        self.den_int = den_int
        self.den = den  # sorted tuple of (Poly, mult)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def make(tab, num: Poly, den_int: int = 1, den=None, cancel: bool = True) -> "Scalar":
        if den_int < 0:
            den_int = -den_int
            num = -num
        bag = dict(den) if den else {}
        nd, pq = _treduce(tab, num.d)
        num = Poly(tab, nd)
        if num.is_zero():
            return Scalar(tab, num, 1, ())
        if pq:
            bag[tab.one_plus_q()] = bag.get(tab.one_plus_q(), 0) + pq
        g = gcd(num.int_content(), den_int)
        if g > 1:
            num = Poly(tab, {k: c // g for k, c in num.d.items()})
            den_int //= g
        if bag and cancel and len(num.d) <= _CANCEL_LIMIT:
            changed = True
            while changed:
                changed = False
                for f in list(bag):
                    while bag.get(f, 0) > 0:
                        q = num.divide_exact(f)
                        if q is None:
                            break
                        num = q
                        bag[f] -= 1
                        changed = True
                    if bag.get(f) == 0:
                        del bag[f]
        den = tuple(sorted(((f, m) for f, m in bag.items() if m), key=lambda t: t[0].sort_key()))
        return Scalar(tab, num, den_int, den)

    @classmethod
    def from_int(cls, tab, c: int) -> "Scalar":
        return cls(tab, Poly.const(tab, c), 1, ())

    @classmethod
    def mono(cls, tab, key: int, c: int = 1) -> "Scalar":
        return cls.make(tab, Poly.mono(tab, key, c))

    @classmethod
    def from_poly(cls, tab, p: Poly) -> "Scalar":
        return cls.make(tab, p)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.den_int == 1 and not self.den and self.num.d == {self.tab.BIAS: 1}

    # -- arithmetic ---------------------------------------------------------

    def _den_poly(self) -> Poly:
        p = Poly.const(self.tab, self.den_int)
        for f, m in self.den:
            p = p * f.pow(m)
        return p

    def __add__(self, other: "Scalar") -> "Scalar":
        if self.den == other.den and self.den_int == other.den_int:
            n = self.num + other.num
            if n.is_zero():
                return Scalar(self.tab, n, 1, ())
            return Scalar.make(self.tab, n, self.den_int, self.den, cancel=False)
        g = gcd(self.den_int, other.den_int)
        ia, ib = other.den_int // g, self.den_int // g
        bag_a = dict(self.den)
        bag_b = dict(other.den)
        union = dict(bag_a)
        for f, m in bag_b.items():
            if union.get(f, 0) < m:
                union[f] = m
        na = self.num.mul_int(ia)
        for f, m in union.items():
            d = m - bag_a.get(f, 0)
            if d:
                na = na * f.pow(d)
        nb = other.num.mul_int(ib)
        for f, m in union.items():
            d = m - bag_b.get(f, 0)
            if d:
                nb = nb * f.pow(d)
        return Scalar.make(self.tab, na + nb, self.den_int * ia, union)

    def __neg__(self) -> "Scalar":
        return Scalar(self.tab, -self.num, self.den_int, self.den)

    def __sub__(self, other: "Scalar") -> "Scalar":
        return self + (-other)

    def __mul__(self, other: "Scalar") -> "Scalar":
        if self.num.is_zero() or other.num.is_zero():
            return Scalar(self.tab, Poly.zero(self.tab), 1, ())
        bag = dict(self.den)
        for f, m in other.den:
            bag[f] = bag.get(f, 0) + m
        return Scalar.make(self.tab, self.num * other.num, self.den_int * other.den_int, bag)

    def mul_int(self, c: int) -> "Scalar":
        if c == 0:
            return Scalar(self.tab, Poly.zero(self.tab), 1, ())
        g = gcd(c, self.den_int)
        return Scalar(self.tab, self.num.mul_int(c // g), self.den_int // g, self.den)

    def scale_mono(self, key: int, c: int = 1) -> "Scalar":
        """Multiply by a t-free monomial c*key (fast path: bag unchanged)."""
        return Scalar.make(self.tab, self.num.scale(key, c), self.den_int, self.den, cancel=False)

    def inv(self) -> "Scalar":
        if self.num.is_zero():
            raise ZeroDivisionError("inversion of zero scalar")
        num = self.num
        for v, idx in self.tab.t_idx.items():
            if num.involves(idx):
                return self._inv_with_t(idx)
        co, mk, prim = num.primitive()
        bag = {}
        if not prim.is_monomial():
            bag[prim] = 1
        new_num = self._den_poly().scale(self.tab.key_pow(mk, -1))
        if co < 0:
            co = -co
            new_num = -new_num
        g = gcd(co, new_num.int_content())
        if g > 1:
            new_num = Poly(self.tab, {k: c // g for k, c in new_num.d.items()})
            co //= g
        return Scalar.make(self.tab, new_num, co, bag)

    def _inv_with_t(self, idx: int) -> "Scalar":
        # rationalize: 1/(P + Q t) = (P - Q t) / (P^2 - Q^2 t^2), with t^2
        # rewritten to its closed form so the new denominator drops t.
        parts = self.num.coeff_split(idx)
        P = parts.get(0, Poly.zero(self.tab))
        Q = parts.get(1, Poly.zero(self.tab))
        if set(parts) - {0, 1}:
            raise ValueError("numerator not t-reduced")
        tkey = self.tab.mono({idx: 1})
        conj = Scalar.make(self.tab, P - Q.scale(tkey), 1, ())
        sq = Scalar.make(self.tab, P * P - (Q * Q).scale(self.tab.mono({idx: 2})), 1, ())
        dens = Scalar(self.tab, self._den_poly(), 1, ())
        return dens * conj * sq.inv()

    def mul_poly(self, f: Poly) -> "Scalar":
        return Scalar.make(self.tab, self.num * f, self.den_int, self.den)

    def div_poly(self, f: Poly) -> "Scalar":
        """Divide by a nonzero polynomial, keeping the denominator factored."""
        if f.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        co, mk, prim = f.primitive()
        bag = dict(self.den)
        if not prim.is_monomial():
            bag[prim] = bag.get(prim, 0) + 1
        num = self.num.scale(self.tab.key_pow(mk, -1))
        if co < 0:
            num = -num
            co = -co
        return Scalar.make(self.tab, num, self.den_int * co, bag)

    def pow(self, n: int) -> "Scalar":
        if n < 0:
            return self.inv().pow(-n)
        out = Scalar.from_int(self.tab, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def equals(self, other: "Scalar") -> bool:
        return (self - other).is_zero()

    # -- symbol operations ---------------------------------------------------

    def shift_u(self, evec) -> "Scalar":
        num = self.num.shift_u(evec)
        bag = {}
        extra_key = self.tab.BIAS
        neg = 1
        for f, m in self.den:
            sf = f.shift_u(evec)
            co, mk, prim = sf.primitive()
            bag[prim] = bag.get(prim, 0) + m
            extra_key += m * (mk - self.tab.BIAS)
            if co == -1:
                neg *= (-1) ** m
            elif co != 1:
                raise AssertionError("u-shift changed integer content")
        num = num.scale(self.tab.key_pow(extra_key, -1), neg)
        return Scalar.make(self.tab, num, self.den_int, bag, cancel=False)

    def subst_monomial(self, idx: int, key: int, sign: int = 1) -> "Scalar":
        """Substitute the (central) symbol idx by the signed monomial."""
        num = self.num.subst_monomial(idx, key, sign)
        bag = {}
        extra_key = self.tab.BIAS
        co_all = 1
        for f, m in self.den:
            sf = f.subst_monomial(idx, key, sign)
            if sf.is_zero():
                raise ZeroDivisionError("substitution kills a denominator factor")
            co, mk, prim = sf.primitive()
            if not prim.is_monomial():
                bag[prim] = bag.get(prim, 0) + m
            extra_key += m * (mk - self.tab.BIAS)
            co_all *= co ** m
        num = num.scale(self.tab.key_pow(extra_key, -1))
        if co_all < 0:
            num = -num
            co_all = -co_all
        return Scalar.make(self.tab, num, self.den_int * co_all, bag)

    def t_degree(self, v) -> int:
        idx = self.tab.t_idx.get(v)
        return self.num.max_exp(idx) if idx is not None else 0

    # -- rendering ------------------------------------------------------------

    def render(self) -> str:
        n = self.num.render()
        if self.den_int == 1 and not self.den:
            return n
        bits = []
        if self.den_int != 1:
            bits.append(str(self.den_int))
        for f, m in self.den:
            s = f"({f.render()})"
            bits.append(s if m == 1 else s + f"^{m}")
        return f"({n}) / ({'*'.join(bits)})"

    def __repr__(self):
        return f"Scalar({self.render()})"


def scalar_sum(terms) -> "Scalar":
    """Sum a list of Scalars, grouping equal denominators first."""
    terms = list(terms)
    if not terms:
        raise ValueError("empty sum needs a table")
    tab = terms[0].tab
    groups = {}
    for s in terms:
        key = (s.den_int, s.den)
        if key in groups:
            groups[key] = groups[key] + s.num
        else:
            groups[key] = s.num
    folded = [Scalar.make(tab, n, di, d, cancel=False) for (di, d), n in groups.items()]
    folded.sort(key=lambda s: (s.den_int, tuple(f.sort_key() for f, _ in s.den)))
    out = folded[0]
    for s in folded[1:]:
        out = out + s
    return out


# -- spec-facing operation names -------------------------------------------


def scalar_arith(op: str, a: Scalar, b: Scalar | None = None) -> Scalar:
    """Field arithmetic dispatch: add | mul | neg | inv."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "inv":
        return a.inv()
    raise ValueError(f"unknown scalar op {op!r}")


def scalar_equals(a: Scalar, b: Scalar) -> bool:
    return a.equals(b)


def t_reduce(a: Scalar) -> Scalar:
    """Rewrite every square of a t symbol; idempotent (Scalars maintain the
    reduced form as an invariant, so this re-normalizes)."""
    return Scalar.make(a.tab, a.num, a.den_int, a.den, cancel=False)


def u_shift(a: Scalar, i, k: int, e: int) -> Scalar:
    """Apply v_{i,k} -> q^e v_{i,k} (the shift-conjugation automorphism)."""
    tab = a.tab
    pos = tab.pair_pos[(i, k)]
    evec = [0] * len(tab.pairs)
    evec[pos] = e
    return a.shift_u(tuple(evec))
