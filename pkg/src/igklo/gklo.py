"""Builders for the difference-operator image: root polynomials, the
normalized series factor, the raising/lowering/fixed operators, the
normalizing constants, the spectral rational function and its mode tables,
and the mode images of the A-series.

Mode conventions used throughout the package (recorded once, here):
the delta series are read as delta(z/a) = sum_r z^r a^{-r} and
delta(z*b) = sum_r z^r b^r, and f(z) delta(z/a) = f(a) delta(z/a).  A-mode
r therefore collects kappa_i rho'_i w_{i,k}^{-r-mu_i} on the raising
terms, (q^{-2} C w_{i,k})^r on the lowering terms and t_i D^r on the
theta term.
"""

from __future__ import annotations

from dataclasses import dataclass

from .qtorus import TorusElement
from .scalars import Poly, Scalar, VariableTable, scalar_sum


class SpectralRational:
    """Ratio of Laurent polynomials in one central spectral variable with
    Scalar coefficients; supports exact substitution and series expansion
    (the canonical expansion in nonnegative powers around 0)."""

    __slots__ = ("tab", "num", "den")

    def __init__(self, tab, num: dict, den: dict):
        self.tab = tab
        self.num = {d: c for d, c in num.items() if not c.is_zero()}
        self.den = {d: c for d, c in den.items() if not c.is_zero()}
        if not self.den:
            raise ZeroDivisionError("zero denominator")

    @classmethod
    def one(cls, tab):
        o = Scalar.from_int(tab, 1)
        return cls(tab, {0: o}, {0: o})

    @classmethod
    def from_zpoly(cls, tab, num: dict):
        return cls(tab, num, {0: Scalar.from_int(tab, 1)})

    def __mul__(self, other: "SpectralRational"):
        return SpectralRational(
            self.tab, _zp_mul(self.tab, self.num, other.num), _zp_mul(self.tab, self.den, other.den)
        )

    def scale(self, s: Scalar):
        return SpectralRational(self.tab, {d: c * s for d, c in self.num.items()}, dict(self.den))

    def substitute(self, s: Scalar) -> Scalar:
        """Exact value at the (invertible, if negative powers occur) point s."""
        return _zp_eval(self.tab, self.num, s) * _zp_eval(self.tab, self.den, s).inv()

    def substitute_inverse(self) -> "SpectralRational":
        """The transformation z -> C^{-1} z^{-1}."""
        return SpectralRational(
            self.tab, _zp_flip(self.tab, self.num), _zp_flip(self.tab, self.den)
        )

    def equals(self, other: "SpectralRational") -> bool:
        lhs = _zp_mul(self.tab, self.num, other.den)
        rhs = _zp_mul(self.tab, other.num, self.den)
        degs = set(lhs) | set(rhs)
        zero = Scalar.from_int(self.tab, 0)
        return all((lhs.get(d, zero) - rhs.get(d, zero)).is_zero() for d in degs)

    def series(self, hi: int):
        """Exact Laurent coefficients at 0: returns (ord, coeffs) where
        coeffs[j] is the coefficient of z^(ord+j), up to degree hi."""
        tab = self.tab
        if not self.num:
            return hi + 1, []
        dmin = min(self.den)
        nmin = min(self.num)
        ord_ = nmin - dmin
        if ord_ > hi:
            return ord_, []
        d0inv = self.den[dmin].inv()
        coeffs = []
        zero = Scalar.from_int(tab, 0)
        for n in range(ord_, hi + 1):
            parts = [self.num.get(n + dmin, zero)]
            for ddeg, dval in self.den.items():
                if ddeg == dmin:
                    continue
                j = n - (ddeg - dmin)
                if ord_ <= j < n:
                    parts.append(-(dval * coeffs[j - ord_]))
            acc = scalar_sum(parts) if len(parts) > 1 else parts[0]
            coeffs.append(acc * d0inv)
        return ord_, coeffs

    def render(self) -> str:
        n = " + ".join(f"z^{d}*({self.num[d].render()})" for d in sorted(self.num))
        d = " + ".join(f"z^{k}*({self.den[k].render()})" for k in sorted(self.den))
        return f"({n}) / ({d})"


def _zp_mul(tab, a: dict, b: dict) -> dict:
    out = {}
    for da, ca in a.items():
        for db, cb in b.items():
            d = da + db
            p = ca * cb
            if d in out:
                s = out[d] + p
                if s.is_zero():
                    del out[d]
                else:
                    out[d] = s
            elif not p.is_zero():
                out[d] = p
    return out


def _zp_eval(tab, a: dict, s: Scalar) -> Scalar:
    parts = [c * s.pow(d) if d else c for d, c in a.items()]
    return scalar_sum(parts) if parts else Scalar.from_int(tab, 0)


def _zp_flip(tab, a: dict) -> dict:
    # z^d -> C^{-d} z^{-d}
    out = {}
    for d, c in a.items():
        out[-d] = c.scale_mono(tab.C_key(-d)) if d else c
    return out


@dataclass
class ModeTable:
    """Mode coefficients of a series image over an exact index range; the
    table is identically zero below `floor`."""

    vertex: object
    flavor: str
    lo: int
    hi: int
    modes: dict
    floor: int

    def dump(self) -> dict:
        return {
            "vertex": self.vertex,
            "flavor": self.flavor,
            "modes": {str(r): self.modes[r].render() for r in sorted(self.modes)},
        }


@dataclass(frozen=True)
class ATerm:
    """One structural summand of an A-mode: full coefficient at mode r is
    the monomial base_key * g_key^r times op_coeff, sitting on evec."""

    label: tuple
    base_key: int
    g_key: int
    op_coeff: Scalar
    evec: tuple


class GKLO:
    """Bundles one instance with its symbol table, tamper settings and the
    operator/series caches.  Pure builders; every returned object is
    immutable in practice."""

    def __init__(self, inst, tamper=None):
        self.inst = inst
        self.tamper = dict(tamper or {})
        self.tab = VariableTable(inst)
        if "tauSq" in self.tamper:
            for v in inst.vertices:
                if inst.theta[v]:
                    self.tab.override_tau_sq(v, int(self.tamper["tauSq"]))
        self._ops = {}
        self._acute = {}
        self._aterms = {}

    # -- scalar shorthands ---------------------------------------------------

    def one(self) -> Scalar:
        return Scalar.from_int(self.tab, 1)

    def sc_mono(self, key: int, c: int = 1) -> Scalar:
        return Scalar.mono(self.tab, key, c)

    # -- root data -------------------------------------------------------------

    def w_roots(self, i, sign: str, omit: int | None = None):
        """Monomial roots of the one-sided w products at vertex i."""
        tab, inst = self.tab, self.inst
        out = []
        for l in range(1, inst.m[i] + 1):
            if omit is not None and l == omit:
                continue
            if sign == "-":
                out.append(tab.mono({tab.iq: -2, tab.v_idx[(i, l)]: 2}))
            else:
                out.append(tab.mono({tab.iD: -2, tab.v_idx[(i, l)]: -2}))
        return out

    def z_roots(self, i, sign: str):
        tab, inst = self.tab, self.inst
        out = []
        for l in range(1, inst.lam[i] + 1):
            if sign == "-":
                out.append(tab.mono({tab.z_idx[(i, l)]: 2}))
            else:
                out.append(tab.mono({tab.iD: -2, tab.z_idx[(i, l)]: -2}))
        return out

    def eval_roots(self, roots, arg_key: int) -> Poly:
        """Product of (arg - root) over the given monomial roots."""
        tab = self.tab
        p = Poly.const(tab, 1)
        for r in roots:
            p = p * Poly(tab, {arg_key: 1, r: -1})
        return p

    def build_root_poly(self, kind: str, i, k: int | None = None) -> SpectralRational:
        inst = self.inst
        if kind in ("WminusHat", "WplusHat", "Wk") and not (k and 1 <= k <= inst.m[i]):
            raise ValueError("index out of range for a k-omitting product")
        roots = {
            "Wminus": lambda: self.w_roots(i, "-"),
            "Wplus": lambda: self.w_roots(i, "+"),
            "WminusHat": lambda: self.w_roots(i, "-", omit=k),
            "WplusHat": lambda: self.w_roots(i, "+", omit=k),
            "Zminus": lambda: self.z_roots(i, "-"),
            "Zplus": lambda: self.z_roots(i, "+"),
            "W": lambda: self.w_roots(i, "-") + self.w_roots(i, "+"),
            "Wk": lambda: self.w_roots(i, "-", omit=k) + self.w_roots(i, "+", omit=k),
            "Z": lambda: self.z_roots(i, "-") + self.z_roots(i, "+"),
        }
        if kind not in roots:
            raise ValueError(f"unknown root polynomial kind {kind!r}")
        return SpectralRational.from_zpoly(self.tab, self._zlinear_product(roots[kind]()))

    def _zlinear_product(self, roots, head: Scalar | None = None, arg_scale: int | None = None) -> dict:
        """z-polynomial prod (c*z - root) with c the monomial arg_scale."""
        tab = self.tab
        zp = {0: head if head is not None else self.one()}
        cz = self.sc_mono(arg_scale) if arg_scale is not None else self.one()
        for r in roots:
            zp = _zp_mul(tab, zp, {1: cz, 0: self.sc_mono(r, -1)})
        return zp

    # -- normalized series factor ------------------------------------------------

    def gamma_factor(self, i) -> SpectralRational:
        tab = self.tab
        one = SpectralRational.one(tab)
        if not self.inst.theta[i] or self.tamper.get("gamma") is not None:
            return one
        Dm1 = tab.mono({tab.iD: -1})
        qDm1 = tab.mono({tab.iq: 1, tab.iD: -1})
        qm1Dm1 = tab.mono({tab.iq: -1, tab.iD: -1})
        num = self._zlinear_product([qDm1, qm1Dm1], head=self.sc_mono(tab.q_key(1), -1))
        den = self._zlinear_product([Dm1, Dm1])
        return SpectralRational(tab, num, den)

    def frakW(self, i, k: int | None = None) -> SpectralRational:
        """Combined weight ratio at vertex i; with k it carries the
        normalized series factor and omits index k downstairs, without k it
        is the plain full ratio (no extra factor)."""
        tab, inst = self.tab, self.inst
        qm1 = tab.q_key(-1)
        num = self._zlinear_product(self.z_roots(i, "-") + self.z_roots(i, "+"))
        for j in inst.neighbors(i):
            num = _zp_mul(tab, num, self._zlinear_product(
                self.w_roots(j, "-") + self.w_roots(j, "+"), arg_scale=qm1))
        qm2 = tab.q_key(-2)
        if k is not None:
            if not 1 <= k <= inst.m[i]:
                raise ValueError("index out of range")
            wm = self.w_roots(i, "-", omit=k) + self.w_roots(i, "+", omit=k)
            den = self._zlinear_product(wm)
            den = _zp_mul(tab, den, self._zlinear_product(wm, arg_scale=qm2))
            out = SpectralRational(tab, num, den)
            return self.gamma_factor(i) * out
        wm = self.w_roots(i, "-") + self.w_roots(i, "+")
        den = self._zlinear_product(wm)
        den = _zp_mul(tab, den, self._zlinear_product(wm, arg_scale=qm2))
        return SpectralRational(tab, num, den)

    def frakW_at(self, i, k: int | None, arg_key: int) -> Scalar:
        """Exact evaluation of frakW at a monomial point (cheap path)."""
        tab, inst = self.tab, self.inst
        qm1arg = tab.key_mul(tab.q_key(-1), arg_key)
        qm2arg = tab.key_mul(tab.q_key(-2), arg_key)
        num = self.eval_roots(self.z_roots(i, "-") + self.z_roots(i, "+"), arg_key)
        for j in inst.neighbors(i):
            num = num * self.eval_roots(self.w_roots(j, "-") + self.w_roots(j, "+"), qm1arg)
        out = Scalar.from_poly(tab, num)
        wm = self.w_roots(i, "-", omit=k) + self.w_roots(i, "+", omit=k)
        out = out.div_poly(self.eval_roots(wm, arg_key))
        out = out.div_poly(self.eval_roots(wm, qm2arg))
        if k is not None and self.inst.theta[i] and self.tamper.get("gamma") is None:
            Dm1 = tab.mono({tab.iD: -1})
            gnum = self.eval_roots([tab.mono({tab.iq: 1, tab.iD: -1}),
                                    tab.mono({tab.iq: -1, tab.iD: -1})], arg_key)
            out = out.mul_poly(gnum.mul_int(-1).scale(tab.q_key(1)))
            out = out.div_poly(self.eval_roots([Dm1], arg_key).pow(2))
        return out

    # -- normalizing constants ------------------------------------------------

    def constant(self, kind: str, i=None) -> Scalar:
        tab, inst = self.tab, self.inst
        if kind == "rho":
            if "rho" in self.tamper:
                return Scalar.from_int(tab, int(self.tamper["rho"]))
            num = Poly.mono(tab, tab.q_key(1))
            den = Poly(tab, {tab.q_key(2): 1, tab.BIAS: -1})
            return Scalar.from_poly(tab, num).div_poly(den)
        if i is None:
            raise ValueError(f"constant {kind!r} needs a vertex")
        mu, lam, m = inst.mu[i], inst.lam[i], inst.m[i]
        if kind == "rhoPrime":
            # carries (-q)^{-theta} so the series leading mode is exactly 1
            th = inst.theta[i]
            return self.sc_mono(tab.mono({tab.iD: 2 * mu, tab.iq: -2 * (lam - mu) - th}),
                                -1 if th else 1)
        if kind == "tauSq":
            sign, key, dpow = tab.tau_sq_parts(i)
            out = self.sc_mono(key, sign)
            if dpow:
                return out.div_poly(tab.one_plus_q().pow(dpow))
            return out
        if kind in ("eta", "etaPrime"):
            msum = sum(inst.m[j] for j in inst.neighbors(i))
            exps = {}
            if kind == "eta":
                sign = -1 if (mu - m) % 2 else 1
                exps[tab.iq] = -2 * m + 2 * msum
                exps[tab.iD] = -m
                zdir, wdir = -1, -1
            else:
                sign = -1 if m % 2 else 1
                exps[tab.iq] = -4 * m + msum
                exps[tab.iD] = lam - m + msum
                zdir, wdir = 1, 1
            for j in inst.neighbors(i):
                for l in range(1, inst.m[j] + 1):
                    exps[tab.v_idx[(j, l)]] = wdir
            for l in range(1, lam + 1):
                exps[tab.z_idx[(i, l)]] = zdir
            return self.sc_mono(tab.mono({k: v for k, v in exps.items() if v}), sign)
        raise ValueError(f"unknown constant kind {kind!r}")

    # -- the three special operators -------------------------------------------

    def build_gklo_operator(self, kind: str, i, k: int | None = None) -> TorusElement:
        if kind == "X":
            return self.x_op(i, k)
        if kind == "Xprime":
            return self.xprime_op(i, k)
        if kind == "Xsecond":
            return self.xsecond_op(i)
        raise ValueError(f"unknown operator kind {kind!r}")

    def x_op(self, i, k: int) -> TorusElement:
        key = ("X", i, k)
        if key in self._ops:
            return self._ops[key]
        tab, inst = self.tab, self.inst
        if not 1 <= k <= inst.m[i]:
            raise ValueError("index out of range")
        wk = tab.w_key(i, k)
        exps = {tab.iq: 0, tab.v_idx[(i, k)]: -2}
        for l in range(1, inst.m[i] + 1):
            exps[tab.v_idx[(i, l)]] = exps.get(tab.v_idx[(i, l)], 0) - 1
        for j in inst.arrows_in(i):
            for l in range(1, inst.m[j] + 1):
                exps[tab.v_idx[(j, l)]] = exps.get(tab.v_idx[(j, l)], 0) + 1
        coeff = self.constant("rho").scale_mono(tab.q_key(1))
        coeff = coeff.scale_mono(tab.mono({a: e for a, e in exps.items() if e}))
        coeff = coeff.mul_poly(self.eval_roots(self.z_roots(i, "-") + self.z_roots(i, "+"), wk))
        qm1wk = tab.key_mul(tab.q_key(-1), wk)
        for j in inst.arrows_out(i):
            coeff = coeff.mul_poly(self.eval_roots(self.w_roots(j, "-") + self.w_roots(j, "+"), qm1wk))
        for j in inst.arrows_in(i):
            coeff = coeff.mul_poly(self.eval_roots(self.w_roots(j, "+"), qm1wk))
        if inst.theta[i]:
            coeff = coeff.mul_poly(Poly(tab, {wk: 1, tab.mono({tab.iq: 1, tab.iD: -1}): -1}))
            coeff = coeff.div_poly(Poly(tab, {wk: 1, tab.mono({tab.iD: -1}): -1}))
        coeff = coeff.div_poly(Poly(tab, {tab.key_mul(tab.q_key(-2), wk): 1,
                                          tab.mono({tab.iD: -2, tab.v_idx[(i, k)]: -2}): -1}))
        qm2wk = tab.key_mul(tab.q_key(-2), wk)
        hat = self.w_roots(i, "-", omit=k) + self.w_roots(i, "+", omit=k)
        coeff = coeff.div_poly(self.eval_roots(hat, qm2wk))
        out = TorusElement.term(tab, coeff, self._evec(i, k, +1))
        self._ops[key] = out
        return out

    def xprime_op(self, i, k: int) -> TorusElement:
        key = ("Xp", i, k)
        if key in self._ops:
            return self._ops[key]
        tab, inst = self.tab, self.inst
        if not 1 <= k <= inst.m[i]:
            raise ValueError("index out of range")
        wk = tab.w_key(i, k)
        exps = {tab.v_idx[(i, k)]: -2}
        for l in range(1, inst.m[i] + 1):
            exps[tab.v_idx[(i, l)]] = exps.get(tab.v_idx[(i, l)], 0) + 1
        for j in inst.arrows_in(i):
            for l in range(1, inst.m[j] + 1):
                exps[tab.v_idx[(j, l)]] = exps.get(tab.v_idx[(j, l)], 0) - 1
        coeff = self.constant("rho").scale_mono(tab.q_key(1), -1)
        coeff = coeff.scale_mono(tab.mono({a: e for a, e in exps.items() if e}))
        qm3wk = tab.key_mul(tab.q_key(-3), wk)
        for j in inst.arrows_in(i):
            coeff = coeff.mul_poly(self.eval_roots(self.w_roots(j, "-"), qm3wk))
        if inst.theta[i]:
            coeff = coeff.mul_poly(Poly(tab, {tab.mono({tab.iD: -1}): 1,
                                              tab.key_mul(tab.q_key(-1), wk): -1}))
            coeff = coeff.div_poly(Poly(tab, {tab.key_mul(tab.q_key(-2), wk): 1,
                                              tab.mono({tab.iD: -1}): -1}))
        coeff = coeff.div_poly(Poly(tab, {tab.key_mul(tab.q_key(-2), wk): 1,
                                          tab.mono({tab.iD: -2, tab.v_idx[(i, k)]: -2}): -1}))
        qm2wk = tab.key_mul(tab.q_key(-2), wk)
        hat = self.w_roots(i, "-", omit=k) + self.w_roots(i, "+", omit=k)
        coeff = coeff.div_poly(self.eval_roots(hat, qm2wk))
        out = TorusElement.term(tab, coeff, self._evec(i, k, -1))
        self._ops[key] = out
        return out

    def xsecond_op(self, i) -> TorusElement:
        key = ("Xpp", i)
        if key in self._ops:
            return self._ops[key]
        tab, inst = self.tab, self.inst
        if not inst.theta[i]:
            raise ValueError("fixed-point operator requires theta = 1")
        num = Poly.const(tab, 1)
        for l in range(1, inst.lam[i] + 1):
            zh = tab.z_idx[(i, l)]
            num = num * Poly(tab, {tab.mono({zh: 1}): 1, tab.mono({zh: -1, tab.iD: -1}): -1})
        for j in inst.neighbors(i):
            for l in range(1, inst.m[j] + 1):
                vv = tab.v_idx[(j, l)]
                num = num * Poly(tab, {tab.mono({vv: 1}): 1,
                                       tab.mono({vv: -1, tab.iq: 1, tab.iD: -1}): -1})
        coeff = Scalar.from_poly(tab, num)
        for l in range(1, inst.m[i] + 1):
            vv = tab.v_idx[(i, l)]
            coeff = coeff.div_poly(Poly(tab, {tab.mono({vv: 1}): 1,
                                              tab.mono({vv: -1, tab.iD: -1}): -1}))
            coeff = coeff.div_poly(Poly(tab, {tab.mono({vv: 1}): 1,
                                              tab.mono({vv: -1, tab.iq: 2, tab.iD: -1}): -1}))
        out = TorusElement.term(tab, coeff, (0,) * len(tab.pairs))
        self._ops[key] = out
        return out

    def _evec(self, i, k, e):
        ev = [0] * len(self.tab.pairs)
        ev[self.tab.pair_pos[(i, k)]] = e
        return tuple(ev)

    # -- spectral rational and modes -------------------------------------------

    def theta_rational(self, i) -> SpectralRational:
        tab, inst = self.tab, self.inst
        mu = inst.mu[i]
        if "rhoPrime" in self.tamper:
            pref = Scalar.from_int(tab, int(self.tamper["rhoPrime"]))
        else:
            pref = self.constant("rhoPrime", i)
        out = self.frakW(i, None).scale(pref)
        out = self.gamma_factor(i) * out
        # the full-ratio builder has no extra factor; divide by z^mu
        return SpectralRational(tab, out.num, _zp_mul(tab, out.den, {mu: self.one()}))

    def acute_series(self, i, hi: int):
        cached = self._acute.get(i)
        if cached is None or cached[2] < hi:
            ord_, coeffs = self.theta_rational(i).series(hi)
            cached = (ord_, coeffs, hi)
            self._acute[i] = cached
        return cached[0], cached[1]

    def acute_mode(self, i, r: int) -> Scalar:
        ord_, coeffs = self.acute_series(i, r)
        if r < ord_ or r - ord_ >= len(coeffs):
            return Scalar.from_int(self.tab, 0)
        return coeffs[r - ord_]

    def plain_mode(self, i, r: int) -> Scalar:
        """Mode of the un-normalized series: acute multiplied by the
        expansion of (1 - C z^2)/(1 - q^{-2} C z^2)."""
        tab = self.tab
        ord_, coeffs = self.acute_series(i, r)
        parts = []
        n = 0
        while r - 2 * n >= ord_:
            a = self.acute_mode(i, r - 2 * n)
            if not a.is_zero():
                parts.append(a.scale_mono(tab.mono({tab.iq: -2 * n, tab.iD: 2 * n})))
            if r - 2 * n - 2 >= ord_:
                b = self.acute_mode(i, r - 2 * n - 2)
                if not b.is_zero():
                    parts.append(b.scale_mono(tab.mono({tab.iq: -2 * n, tab.iD: 2 * n + 2}), -1))
            n += 1
        if not parts:
            return Scalar.from_int(tab, 0)
        return scalar_sum(parts)

    def theta_modes(self, i, lo: int, hi: int, flavor: str = "acute") -> ModeTable:
        if lo > hi:
            raise ValueError("empty mode window")
        if flavor not in ("acute", "plain"):
            raise ValueError(f"unknown flavor {flavor!r}")
        fn = self.acute_mode if flavor == "acute" else self.plain_mode
        modes = {r: fn(i, r) for r in range(lo, hi + 1)}
        return ModeTable(i, flavor, lo, hi, modes, floor=-self.inst.mu[i])

    # -- A-series modes ---------------------------------------------------------

    def a_term_specs(self, i):
        if i in self._aterms:
            return self._aterms[i]
        tab, inst = self.tab, self.inst
        mu, lam, th = inst.mu[i], inst.lam[i], inst.theta[i]
        terms = []
        for k in range(1, inst.m[i] + 1):
            base = tab.mono({tab.kappa_idx[i]: 1, tab.iD: 2 * mu,
                             tab.iq: -2 * (lam - mu) - th, tab.v_idx[(i, k)]: -2 * mu})
            g = tab.mono({tab.v_idx[(i, k)]: -2})
            op = self.x_op(i, k)
            c, e = op.single()
            if th:
                c = -c  # the sign of the series normalization constant
            terms.append(ATerm(("X", k), base, g, c, e))
        for k in range(1, inst.m[i] + 1):
            g = tab.mono({tab.iq: -2, tab.iD: 2, tab.v_idx[(i, k)]: 2})
            op = self.xprime_op(i, k)
            c, e = op.single()
            terms.append(ATerm(("Xp", k), tab.BIAS, g, c, e))
        if inst.theta[i]:
            base = tab.mono({tab.t_idx[i]: 1})
            g = tab.mono({tab.iD: 1})
            op = self.xsecond_op(i)
            c, e = op.single()
            terms.append(ATerm(("Xpp",), base, g, c, e))
        self._aterms[i] = tuple(terms)
        return self._aterms[i]

    def A_mode(self, i, r: int) -> TorusElement:
        tab = self.tab
        out = TorusElement.zero(tab)
        for t in self.a_term_specs(i):
            key = tab.key_mul(t.base_key, tab.key_pow(t.g_key, r))
            out = out + TorusElement.term(tab, t.op_coeff.scale_mono(key), t.evec)
        return out

    # -- localization diagnostic -------------------------------------------------

    def localization_check(self):
        """Check every denominator factor of the built operators against the
        inverted multiplicative set; returns offending factor strings."""
        tab, inst = self.tab, self.inst
        bad = []
        seen = set()

        def classify(f: Poly, ctx_i):
            if all(self._only_ground(k) for k in f.d):
                return True
            if len(f.d) != 2:
                return False
            (k1, c1), (k2, c2) = sorted(f.d.items(), reverse=True)
            if abs(c1) != 1 or abs(c2) != 1:
                return False
            diff = tab.unpack(tab.key_mul(k1, tab.key_pow(k2, -1)))
            qexp = diff[0]
            vexps = {}
            for (v, k), slot in zip(tab.pairs, tab.pair_slots):
                if diff[slot]:
                    vexps[(v, k)] = diff[slot]
            dexp = diff[1]
            others = [j for j in range(tab.n)
                      if diff[j] and j != 0 and j != 1 and j not in tab.pair_slots]
            if others:
                return False
            vs = sorted(vexps.items())
            if len(vs) == 2:
                (p1, e1), (p2, e2) = vs
                if p1[0] != p2[0]:
                    return False
                if {e1, e2} == {2, -2} and dexp == 0 and qexp % 2 == 0:
                    return True      # w_k - q^{even} w_l
                if e1 == 2 and e2 == 2 and dexp == 2 and qexp % 2 == 0:
                    return True      # C w_k w_l - q^{even}
                return False
            if len(vs) == 1:
                (p1, e1), = vs
                if e1 == 4 and dexp == 2 and qexp % 4 == 2:
                    return True      # C w_k^2 - q^{2 mod 4}
                if e1 == 2 and dexp == 1 and qexp % 2 == 0:
                    return inst.theta[p1[0]] == 1   # C^{1/2} w_k - q^{even}
                return False
            return False

        def scan(s: Scalar, ctx):
            for f, _m in s.den:
                if f in seen:
                    continue
                seen.add(f)
                if not classify(f, ctx):
                    bad.append(f"{ctx}: {f.render()}")

        for i in inst.vertices:
            for k in range(1, inst.m[i] + 1):
                scan(self.x_op(i, k).single()[0], f"X[{i},{k}]")
                scan(self.xprime_op(i, k).single()[0], f"X'[{i},{k}]")
            if inst.theta[i]:
                scan(self.xsecond_op(i).single()[0], f"X''[{i}]")
            for r in range(-2, 3):
                scan(self.plain_mode(i, r), f"mode[{i},{r}]")
        return bad

    def _only_ground(self, key: int) -> bool:
        exps = self.tab.unpack(key)
        return all(e == 0 for j, e in enumerate(exps) if j != 0)
