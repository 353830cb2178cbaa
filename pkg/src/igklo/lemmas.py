"""Exact checkers for the auxiliary operator identities: series symmetry,
the fixed-point operator closed forms, exchange coefficients, product
closed forms, the three-way square-kernel triangulation, the cubic-kernel
coefficient identities, the to-vanish delta families, and the composition
collapses used on both sides of the cubic relation."""

from __future__ import annotations

import time

from .gklo import SpectralRational
from .qtorus import TorusElement, q_bracket
from .scalars import Poly, Scalar, scalar_sum
from .verifier import CheckReport, DeltaSupport, GenTerm, Residual


def _sr_map(sr, fn):
    return SpectralRational(sr.tab, {d: fn(c) for d, c in sr.num.items()},
                            {d: fn(c) for d, c in sr.den.items()})


class LemmaChecker:
    def __init__(self, engine):
        self.engine = engine
        self.gk = engine.gk
        self.tab = engine.tab
        self.inst = engine.inst
        self._dressed_cache = {}

    # -- small builders --------------------------------------------------------

    def _sc(self, c=1):
        return Scalar.from_int(self.tab, c)

    def _qs(self, e):
        return self._sc().scale_mono(self.tab.q_key(e))

    def _ratio(self, num_factors, den_factors, head_key=None, head_sign=1):
        """Scalar prod(num)/prod(den) from binomial Poly factors."""
        out = Scalar.mono(self.tab, head_key, head_sign) if head_key is not None \
            else self._sc(head_sign)
        for f in num_factors:
            out = out.mul_poly(f)
        for f in den_factors:
            out = out.div_poly(f)
        return out

    def _bin(self, key1, key2, c1=1, c2=-1) -> Poly:
        if key1 == key2:
            c = c1 + c2
            return Poly(self.tab, {key1: c} if c else {})
        return Poly(self.tab, {key1: c1, key2: c2})

    def _spec_key(self, name, e=1):
        return self.tab.mono({self.tab.spec_idx[name]: e})

    def _support(self, **assignments) -> DeltaSupport:
        return DeltaSupport(self.tab, assignments)

    # -- report plumbing -------------------------------------------------------

    def _report(self, ident, window, fails, skipped=False, t0=None, note=""):
        status = "skipped" if skipped else ("pass" if not fails else "fail")
        elapsed = int((time.monotonic() - t0) * 1000) if t0 else 0
        return CheckReport(ident, self.inst.digest(), window or 0, status,
                           fails, elapsed, note)

    # -- series symmetry ----------------------------------------------------------

    def check_cinv(self, i) -> CheckReport:
        t0 = time.monotonic()
        gk = self.gk
        fails = []
        th = gk.theta_rational(i)
        if not th.equals(th.substitute_inverse()):
            fails.append((("invariance",), "rational function not fixed by z -> C^-1 z^-1"))
        mu = self.inst.mu[i]
        ord_, coeffs = gk.acute_series(i, -mu)
        if ord_ != -mu:
            fails.append((("order",), f"series order {ord_} != {-mu}"))
        elif not coeffs or not (coeffs[0] - self._sc()).is_zero():
            r = coeffs[0].render() if coeffs else "<empty>"
            fails.append((("leading",), f"leading mode {r}"))
        return self._report(f"cinv[i={i}]", 0, fails, t0=t0)

    # -- fixed-point operator -------------------------------------------------------

    def check_xsecond(self, i) -> CheckReport:
        t0 = time.monotonic()
        gk, tab = self.gk, self.tab
        if not self.inst.theta[i]:
            return self._report(f"xsecond[i={i}]", 0, [], skipped=True, t0=t0)
        phi, _ = gk.xsecond_op(i).single()
        Dm1 = tab.mono({tab.iD: -1})
        qm1D = tab.key_mul(tab.q_key(-1), Dm1)
        fails = []

        alt = gk.constant("eta", i)
        alt = alt.mul_poly(gk.eval_roots(gk.z_roots(i, "-"), Dm1))
        for j in self.inst.neighbors(i):
            alt = alt.mul_poly(gk.eval_roots(gk.w_roots(j, "-"), qm1D))
        alt = alt.div_poly(gk.eval_roots(gk.w_roots(i, "-") + gk.w_roots(i, "+"), Dm1))
        if not phi.equals(alt):
            fails.append((("first-form",), (phi - alt).render()))

        alt2 = gk.constant("etaPrime", i)
        alt2 = alt2.mul_poly(gk.eval_roots(gk.z_roots(i, "+"), Dm1))
        for j in self.inst.neighbors(i):
            alt2 = alt2.mul_poly(gk.eval_roots(gk.w_roots(j, "+"), qm1D))
        qm2D = tab.key_mul(tab.q_key(-2), Dm1)
        alt2 = alt2.div_poly(gk.eval_roots(gk.w_roots(i, "-") + gk.w_roots(i, "+"), qm2D))
        if not phi.equals(alt2):
            fails.append((("second-form",), (phi - alt2).render()))

        mu, lam = self.inst.mu[i], self.inst.lam[i]
        sq = gk.frakW_at(i, None, Dm1).scale_mono(
            tab.mono({tab.iD: mu, tab.iq: 3 * (mu - lam)}), -1 if mu % 2 else 1)
        if not (phi * phi).equals(sq):
            fails.append((("square",), (phi * phi - sq).render()))
        return self._report(f"xsecond[i={i}]", 0, fails, t0=t0)

    # -- series exchange -----------------------------------------------------------

    def _alpha_sr(self, i, j, wkey: int, primed: bool) -> SpectralRational:
        tab = self.tab
        a = 2 if i == j else (-1 if self.inst.adjacent(i, j) else 0)
        winv = tab.key_pow(wkey, -1)
        Cm1 = tab.C_key(-1)
        if not primed:
            nroots = [tab.key_mul(tab.q_key(-a), wkey),
                      tab.key_mul(tab.q_key(a), tab.key_mul(Cm1, winv))]
            droots = [tab.key_mul(tab.q_key(a), wkey),
                      tab.key_mul(tab.q_key(-a), tab.key_mul(Cm1, winv))]
        else:
            nroots = [tab.key_mul(tab.q_key(a - 2), wkey),
                      tab.key_mul(tab.q_key(2 - a), tab.key_mul(Cm1, winv))]
            droots = [tab.key_mul(tab.q_key(-2 - a), wkey),
                      tab.key_mul(tab.q_key(2 + a), tab.key_mul(Cm1, winv))]
        return SpectralRational(tab, self.gk._zlinear_product(nroots),
                                self.gk._zlinear_product(droots))

    def check_alpha(self, i, j) -> CheckReport:
        t0 = time.monotonic()
        gk, tab = self.gk, self.tab
        th = gk.theta_rational(i)
        fails = []
        wsym = self._spec_key("w")
        generic = self._alpha_sr(i, j, wsym, primed=False)
        for k in range(1, self.inst.m[j] + 1):
            wkey = tab.w_key(j, k)
            ev = gk._evec(j, k, +1)
            shifted = _sr_map(th, lambda s: s.shift_u(ev))
            alpha = self._alpha_sr(i, j, wkey, primed=False)
            if not shifted.equals(alpha * th):
                fails.append((("exchange", k), "raising exchange coefficient mismatch"))
            evm = gk._evec(j, k, -1)
            shifted_m = _sr_map(th, lambda s: s.shift_u(evm))
            alpha_p = self._alpha_sr(i, j, wkey, primed=True)
            if not shifted_m.equals(alpha_p * th):
                fails.append((("exchange-prime", k), "lowering exchange coefficient mismatch"))
            sup1 = self._support(w=(wkey, 1))
            if not sup1.apply(generic).equals(alpha):
                fails.append((("collapse", k), "support collapse (raising) mismatch"))
            low = tab.key_mul(tab.q_key(2), tab.key_mul(tab.C_key(-1), tab.key_pow(wkey, -1)))
            sup2 = self._support(w=(low, 1))
            if not sup2.apply(generic).equals(alpha_p):
                fails.append((("collapse-prime", k), "support collapse (lowering) mismatch"))
        if self.inst.theta[j]:
            sup3 = self._support(w=(tab.mono({tab.iD: -1}), 1))
            if not sup3.apply(generic).equals(SpectralRational.one(tab)):
                fails.append((("collapse-fixed",), "fixed-point support collapse not 1"))
        return self._report(f"alpha[i={i},j={j}]", 0, fails, t0=t0)

    # -- operator exchange ------------------------------------------------------------

    def _beta(self, i, k, j, l) -> Scalar:
        tab = self.tab
        a = 2 if i == j else (-1 if self.inst.adjacent(i, j) else 0)
        wik, wjl = tab.w_key(i, k), tab.w_key(j, l)
        num = self._bin(wik, tab.key_mul(tab.q_key(-a), wjl))
        den = self._bin(wik, tab.key_mul(tab.q_key(a), wjl))
        return self._ratio([num], [den], head_key=tab.q_key(a))

    def _beta_prime(self, i, k, j, l) -> Scalar:
        tab = self.tab
        a = 2 if i == j else (-1 if self.inst.adjacent(i, j) else 0)
        wik = tab.w_key(i, k)
        wjl_inv = tab.key_mul(tab.C_key(-1), tab.w_key(j, l, -1))
        num = self._bin(wik, tab.key_mul(tab.q_key(2 - a), wjl_inv))
        den = self._bin(wik, tab.key_mul(tab.q_key(2 + a), wjl_inv))
        return self._ratio([num], [den], head_key=tab.q_key(a))

    def _beta_generic(self) -> tuple:
        """(a-dependent) generic exchange ratio in the spectral symbols z, w."""
        tab = self.tab
        zs, ws = self._spec_key("z"), self._spec_key("w")

        def build(a):
            num = self._bin(zs, tab.key_mul(tab.q_key(-a), ws))
            den = self._bin(zs, tab.key_mul(tab.q_key(a), ws))
            return self._ratio([num], [den], head_key=tab.q_key(a))

        return build

    def check_beta(self, i, j) -> CheckReport:
        t0 = time.monotonic()
        gk, tab = self.gk, self.tab
        a = 2 if i == j else (-1 if self.inst.adjacent(i, j) else 0)
        build = self._beta_generic()
        generic = build(a)
        fails = []
        low = lambda key: tab.key_mul(tab.q_key(2), tab.key_mul(tab.C_key(-1), tab.key_pow(key, -1)))
        for k in range(1, self.inst.m[i] + 1):
            for l in range(1, self.inst.m[j] + 1):
                if i == j and k == l:
                    continue
                Xik, Xjl = gk.x_op(i, k), gk.x_op(j, l)
                Xpik, Xpjl = gk.xprime_op(i, k), gk.xprime_op(j, l)
                beta = self._beta(i, k, j, l)
                if not (Xjl * Xik).equals((Xik * Xjl).scale(beta)):
                    fails.append((("xx", k, l), "raising/raising exchange mismatch"))
                if not (Xpjl * Xpik).equals((Xpik * Xpjl).scale(beta.inv())):
                    fails.append((("xpxp", k, l), "lowering/lowering exchange mismatch"))
                betap = self._beta_prime(i, k, j, l)
                if not (Xpjl * Xik).equals((Xik * Xpjl).scale(betap)):
                    fails.append((("xpx", k, l), "mixed exchange mismatch"))
                wik, wjl = tab.w_key(i, k), tab.w_key(j, l)
                c1 = self._support(z=(wik, 1), w=(wjl, 1)).apply_scalar(generic)
                if not c1.equals(beta):
                    fails.append((("collapse-xx", k, l), "support collapse mismatch"))
                c2 = self._support(z=(low(wik), 1), w=(low(wjl), 1)).apply_scalar(generic)
                if not c2.equals(beta.inv()):
                    fails.append((("collapse-xpxp", k, l), "support collapse mismatch"))
                c3 = self._support(z=(wik, 1), w=(low(wjl), 1)).apply_scalar(generic)
                if not c3.equals(betap):
                    fails.append((("collapse-xpx", k, l), "support collapse mismatch"))
                c4 = self._support(z=(low(wik), 1), w=(wjl, 1)).apply_scalar(generic)
                betap_rev = self._beta_prime(j, l, i, k)
                if not c4.equals(betap_rev.inv()):
                    fails.append((("collapse-xxp", k, l), "support collapse mismatch"))
        if self.inst.theta[j]:
            Dm1 = tab.mono({tab.iD: -1})
            Xpp = gk.xsecond_op(j)
            for k in range(1, self.inst.m[i] + 1):
                Xik, Xpik = gk.x_op(i, k), gk.xprime_op(i, k)
                wik = tab.w_key(i, k)
                b1 = self._support(z=(wik, 1), w=(Dm1, 1)).apply_scalar(generic)
                if not (Xpp * Xik).equals((Xik * Xpp).scale(b1)):
                    fails.append((("fixed-x", k), "fixed-point exchange mismatch"))
                b2 = self._support(z=(low(wik), 1), w=(Dm1, 1)).apply_scalar(generic)
                if not (Xpp * Xpik).equals((Xpik * Xpp).scale(b2)):
                    fails.append((("fixed-xp", k), "fixed-point exchange mismatch"))
        return self._report(f"beta[i={i},j={j}]", 0, fails, t0=t0)

    # -- product closed forms -----------------------------------------------------------

    def check_xxprime(self, i) -> CheckReport:
        t0 = time.monotonic()
        gk, tab = self.gk, self.tab
        rho = gk.constant("rho")
        fails = []
        for k in range(1, self.inst.m[i] + 1):
            wk = tab.w_key(i, k)
            wkinv = tab.w_key(i, k, -1)
            Cinv = tab.C_key(-1)
            X, Xp = gk.x_op(i, k), gk.xprime_op(i, k)
            f1 = self._bin(tab.key_mul(tab.q_key(-2), wk), tab.key_mul(Cinv, wkinv))
            f2 = self._bin(wk, tab.key_mul(tab.q_key(-2), tab.key_mul(Cinv, wkinv)))
            coef = (rho * rho * gk.frakW_at(i, k, wk)).scale_mono(
                tab.key_mul(tab.q_key(1), tab.w_key(i, k, -2)), -1)
            coef = coef.div_poly(f1).div_poly(f2)
            got, _ = (X * Xp).single()
            if not got.equals(coef):
                fails.append((("forward", k), (got - coef).render()))
            f3 = self._bin(tab.key_mul(tab.q_key(-4), wk),
                           tab.key_mul(tab.q_key(2), tab.key_mul(Cinv, wkinv)))
            coef2 = (rho * rho * gk.frakW_at(i, k, tab.key_mul(tab.q_key(-2), wk))).scale_mono(
                tab.key_mul(tab.q_key(5), tab.w_key(i, k, -2)), -1)
            coef2 = coef2.div_poly(f1).div_poly(f3)
            got2, _ = (Xp * X).single()
            if not got2.equals(coef2):
                fails.append((("reverse", k), (got2 - coef2).render()))
        return self._report(f"xxprime[i={i}]", 0, fails, t0=t0)

    # -- three-way square-kernel triangulation ---------------------------------------------

    def _frakX_mode(self, i, m, n) -> Scalar:
        """The closed delta-supported form of the square-kernel combination,
        read off at modes (m, n)."""
        gk, tab = self.gk, self.tab
        inst = self.inst
        mu = inst.mu[i]
        rho = gk.constant("rho")
        parts = []
        lam = inst.lam[i]
        krp = self.gk.constant("rhoPrime", i).scale_mono(tab.mono({tab.kappa_idx[i]: 1}))
        for k in range(1, inst.m[i] + 1):
            wk = tab.w_key(i, k)
            wkinv = tab.w_key(i, k, -1)
            pref = (rho * rho * krp).scale_mono(tab.w_key(i, k, -2 - mu))
            pref = pref.div_poly(self._bin(tab.key_mul(tab.q_key(-2), wk),
                                           tab.key_mul(tab.C_key(-1), wkinv)))
            WK1 = gk.frakW_at(i, k, wk)
            WK2 = gk.frakW_at(i, k, tab.key_mul(tab.q_key(-2), wk))
            # delta coefficient monomials at modes (m, n)
            d1 = tab.mono({tab.v_idx[(i, k)]: 2 * (n - m), tab.iD: 2 * n})
            d3 = tab.mono({tab.v_idx[(i, k)]: 2 * (m - n), tab.iD: 2 * m})
            d2 = tab.mono({tab.iq: -2 * m + 2 * n, tab.iD: 2 * m,
                           tab.v_idx[(i, k)]: 2 * (m - n)})
            d4 = tab.mono({tab.iq: 2 * m - 2 * n, tab.iD: 2 * n,
                           tab.v_idx[(i, k)]: 2 * (n - m)})
            s13 = Scalar.mono(tab, tab.key_mul(d1, tab.q_key(3)), -1) + \
                Scalar.mono(tab, tab.key_mul(d3, tab.q_key(3)), -1)
            s24 = Scalar.mono(tab, tab.key_mul(d2, tab.q_key(7 + 2 * mu))) + \
                Scalar.mono(tab, tab.key_mul(d4, tab.q_key(7 + 2 * mu)))
            parts.append(pref * (s13 * WK1 + s24 * WK2))
        if inst.theta[i]:
            Dm1 = tab.mono({tab.iD: -1})
            WFULL = gk.frakW_at(i, None, Dm1)
            # fixed-point term 2 q (1-q)/(1+q) kappa rho' C^{(mu-1)/2} D^{m+n}
            one_minus_q = Poly(tab, {tab.BIAS: 1, tab.q_key(1): -1})
            head = tab.mono({tab.iD: mu - 1 + m + n, tab.iq: 1})
            pref = (krp * WFULL).scale_mono(head).mul_poly(one_minus_q)
            pref = pref.div_poly(tab.one_plus_q()).mul_int(2)
            parts.append(pref)
        if not parts:
            return self._sc(0)
        return scalar_sum(parts)

    def check_frakx(self, i, window: int) -> CheckReport:
        t0 = time.monotonic()
        eng = self.engine
        fails = []
        rng = range(-window, window + 1)
        zero_e = eng._zero_e
        for m in rng:
            for n in rng:
                if n < m:
                    continue  # symmetric in (m, n) by construction
                lhs, rhs = eng.relation_sides("AATheta", i, i, (m, n))
                closed = self._frakX_mode(i, m, n)
                diff = lhs - TorusElement.from_scalar(self.tab, closed)
                if not diff.is_zero():
                    fails.append(((m, n, "direct-vs-closed"), diff.render(limit=2000)))
                diff2 = rhs - TorusElement.from_scalar(self.tab, closed)
                if not diff2.is_zero():
                    fails.append(((m, n, "modes-vs-closed"), diff2.render(limit=2000)))
        return self._report(f"frakx[i={i}]", window, fails, t0=t0)

    # -- cubic-kernel coefficient identities ---------------------------------------------------

    def _gamma(self, i, k, l, j, m) -> Scalar:
        tab = self.tab
        wk, wl = tab.w_key(i, k), tab.w_key(i, l)
        wminv = tab.key_mul(tab.C_key(-1), tab.w_key(j, m, -1))
        qsq = Poly(tab, {tab.q_key(2): 1, tab.BIAS: -1})  # q^2 - 1
        num = Poly(tab, {tab.key_mul(tab.q_key(3), wminv): 1,
                         tab.key_mul(tab.q_key(1), wminv): 1, wk: -1, wl: -1})
        out = Scalar.from_poly(tab, (qsq * qsq) * num).scale_mono(
            tab.key_mul(tab.key_mul(wk, wl), tab.q_key(-2)), -1)
        out = out.div_poly(self._bin(wl, tab.key_mul(tab.q_key(1), wminv)))
        out = out.div_poly(self._bin(tab.key_mul(tab.q_key(2), wl), wk))
        out = out.div_poly(self._bin(wk, tab.key_mul(tab.q_key(1), wminv)))
        return out

    def _gamma_prime(self, i, k, l, j, m) -> Scalar:
        tab = self.tab
        wk, wm = tab.w_key(i, k), tab.w_key(j, m)
        wlinv = tab.key_mul(tab.C_key(-1), tab.w_key(i, l, -1))
        qsq = Poly(tab, {tab.q_key(2): 1, tab.BIAS: -1})
        num = Poly(tab, {tab.key_mul(tab.q_key(3), wlinv): 1,
                         tab.key_mul(tab.q_key(1), wk): 1,
                         tab.key_mul(tab.q_key(2), wm): -1, wm: -1})
        head = tab.key_mul(tab.key_mul(tab.q_key(3 - 2), wk),
                           tab.key_mul(tab.C_key(-1), tab.w_key(i, l, -1)))
        out = Scalar.from_poly(tab, (qsq * qsq) * num).scale_mono(head)
        out = out.div_poly(self._bin(tab.key_mul(tab.q_key(4), wlinv), wk))
        out = out.div_poly(self._bin(tab.key_mul(tab.q_key(3), wlinv), wm))
        out = out.div_poly(self._bin(tab.key_mul(tab.q_key(1), wk), wm))
        return out

    def _gamma_second(self, i, k, l, j, m) -> Scalar:
        tab = self.tab
        wl, wm = tab.w_key(i, l), tab.w_key(j, m)
        wkinv = tab.key_mul(tab.C_key(-1), tab.w_key(i, k, -1))
        qsq = Poly(tab, {tab.q_key(2): 1, tab.BIAS: -1})
        num = Poly(tab, {tab.key_mul(tab.q_key(3), wkinv): 1,
                         tab.key_mul(tab.q_key(1), wl): 1,
                         tab.key_mul(tab.q_key(2), wm): -1, wm: -1})
        head = tab.key_mul(tab.key_mul(tab.q_key(1 - 2), wl),
                           tab.key_mul(tab.C_key(-1), tab.w_key(i, k, -1)))
        out = Scalar.from_poly(tab, (qsq * qsq) * num).scale_mono(head)
        out = out.div_poly(self._bin(wl, wkinv))
        out = out.div_poly(self._bin(tab.key_mul(tab.q_key(3), wkinv), wm))
        out = out.div_poly(self._bin(tab.key_mul(tab.q_key(1), wl), wm))
        return out

    def check_serre_aux(self, i, j) -> CheckReport:
        t0 = time.monotonic()
        gk = self.gk
        fails = []
        qp, qm = self._qs(1), self._qs(-1)
        for m in range(1, self.inst.m[j] + 1):
            Xm, Xpm = gk.x_op(j, m), gk.xprime_op(j, m)
            for k in range(1, self.inst.m[i] + 1):
                Xk, Xpk = gk.x_op(i, k), gk.xprime_op(i, k)
                z = q_bracket(Xk, q_bracket(Xk, Xpm, qm), qp)
                if not z.is_zero():
                    fails.append((("aux1", k, m), z.render(limit=2000)))
                for l in range(1, self.inst.m[i] + 1):
                    if l == k:
                        continue
                    Xl, Xpl = gk.x_op(i, l), gk.xprime_op(i, l)
                    lhs2 = q_bracket(Xk, q_bracket(Xl, Xpm, qm), qp)
                    rhs2 = (Xk * Xl * Xpm).scale(self._gamma(i, k, l, j, m))
                    if not lhs2.equals(rhs2):
                        fails.append((("aux2", k, l, m), (lhs2 - rhs2).render(limit=2000)))
                    lhs3 = q_bracket(Xk, q_bracket(Xpl, Xm, qm), qp)
                    rhs3 = (Xk * Xpl * Xm).scale(self._gamma_prime(i, k, l, j, m))
                    if not lhs3.equals(rhs3):
                        fails.append((("aux3", k, l, m), (lhs3 - rhs3).render(limit=2000)))
                    lhs4 = q_bracket(Xpk, q_bracket(Xl, Xm, qm), qp)
                    rhs4 = (Xpk * Xl * Xm).scale(self._gamma_second(i, k, l, j, m))
                    if not lhs4.equals(rhs4):
                        fails.append((("aux4", k, l, m), (lhs4 - rhs4).render(limit=2000)))
        return self._report(f"serre-aux[i={i},j={j}]", 0, fails, t0=t0)

    # -- to-vanish delta families -----------------------------------------------------

    def _dressed(self, kind, v, k) -> GenTerm:
        """Operator with its delta insertion: plain kind reads off g = w^{-1}
        (from delta(x / w_{v,k})), starred kind g = q^{-2} C w_{v,k}."""
        key = (kind, v, k)
        out = self._dressed_cache.get(key)
        if out is not None:
            return out
        tab = self.tab
        if kind == "X":
            op = self.gk.x_op(v, k)
            g = tab.w_key(v, k, -1)
        elif kind == "Xp":
            op = self.gk.xprime_op(v, k)
            g = tab.mono({tab.iq: -2, tab.iD: 2, tab.v_idx[(v, k)]: 2})
        else:
            raise ValueError(kind)
        c, e = op.single()
        out = GenTerm(tab.BIAS, g, c, e)
        self._dressed_cache[key] = out
        return out

    def _vanishing_cases(self, i, j):
        """(case id, [(slotA, slotB, slotC), ...]) with the residual being the
        sum of the symmetrized nested brackets over the listed slot triples."""
        mi, mj = self.inst.m[i], self.inst.m[j]
        D = self._dressed
        cases = []
        for st, a_kind, c_kind in (("", "X", "Xp"), ("*", "Xp", "X")):
            # same-kind C slot uses a_kind's delta flavor, mixed uses c_kind's
            for m in range(1, mj + 1):
                for k in range(1, mi + 1):
                    cases.append((f"M{st}[k={k},m={m}]",
                                  [(D(a_kind, i, k), D(a_kind, i, k), D(a_kind, j, m))]))
                    cases.append((f"P{st}[k={k},m={m}]",
                                  [(D(a_kind, i, k), D(a_kind, i, k), D(c_kind, j, m))]))
                for k in range(1, mi + 1):
                    for l in range(1, mi + 1):
                        if k == l:
                            continue
                        cases.append((f"N{st}[k={k},l={l},m={m}]",
                                      [(D(a_kind, i, k), D(a_kind, i, l), D(a_kind, j, m)),
                                       (D(a_kind, i, l), D(a_kind, i, k), D(a_kind, j, m))]))
                        cases.append((f"R{st}[k={k},l={l},m={m}]",
                                      [(D(a_kind, i, k), D(a_kind, i, l), D(c_kind, j, m)),
                                       (D(a_kind, i, l), D(a_kind, i, k), D(c_kind, j, m))]))
                        cases.append((f"ST{st}[k={k},l={l},m={m}]",
                                      [(D(a_kind, i, k), D(c_kind, i, l), D(a_kind, j, m)),
                                       (D(c_kind, i, l), D(a_kind, i, k), D(a_kind, j, m))]))
        return cases

    def _vanishing_residual(self, triples, a, b, c) -> TorusElement:
        eng = self.engine
        res = Residual(self.tab)
        for (tA, tB, tC) in triples:
            for (x, y) in ((a, b), (b, a)):
                # [A, [B, C]_{q^{-1}}]_q = ABC - q^{-1} ACB - q BCA + CBA
                eng.stream(res, (tA, tB, tC), (x, y, c), 1)
                eng.stream(res, (tA, tC, tB), (x, c, y), -1, qpow=-1)
                eng.stream(res, (tB, tC, tA), (y, c, x), -1, qpow=1)
                eng.stream(res, (tC, tB, tA), (c, y, x), 1)
        return res.to_torus()

    def check_vanishing(self, i, j, window: int):
        reports = []
        rng = range(-window, window + 1)
        for case_id, triples in self._vanishing_cases(i, j):
            t0 = time.monotonic()
            fails = []
            for a in rng:
                for b in rng:
                    if b < a:
                        continue
                    for c in rng:
                        r = self._vanishing_residual(triples, a, b, c)
                        if not r.is_zero():
                            fails.append(((a, b, c), r.render(limit=2000)))
            reports.append(self._report(f"vanishing:{case_id}[i={i},j={j}]",
                                        window, fails, t0=t0))
        return reports

    # -- composition collapse identities -------------------------------------------------

    def check_f(self, i, j) -> CheckReport:
        t0 = time.monotonic()
        gk, tab = self.gk, self.tab
        inst = self.inst
        rho = gk.constant("rho")
        two = self._qs(1) + self._qs(-1)
        fails = []
        Dm1 = tab.mono({tab.iD: -1})

        def F(x, y, w):
            return x * y * w - (x * w * y).scale(two) + w * x * y

        ys = []
        for m in range(1, inst.m[j] + 1):
            ys.append((("Y", m), gk.x_op(j, m), tab.w_key(j, m)))
            ys.append((("Yp", m), gk.xprime_op(j, m), tab.w_key(j, m)))
        if inst.theta[j]:
            ys.append((("Ypp",), gk.xsecond_op(j), Dm1))

        for k in range(1, inst.m[i] + 1):
            X, Xp = gk.x_op(i, k), gk.xprime_op(i, k)
            wk = tab.w_key(i, k)
            omega_den = self._bin(tab.key_mul(tab.q_key(-2), wk),
                                  tab.key_mul(tab.C_key(-1), tab.w_key(i, k, -1)))
            WK1 = gk.frakW_at(i, k, wk)
            WK2 = gk.frakW_at(i, k, tab.key_mul(tab.q_key(-2), wk))
            for label, Y, Wkey in ys:
                Winv = tab.key_pow(Wkey, -1)
                den1a = self._bin(tab.key_mul(tab.q_key(-1), wk),
                                  tab.key_mul(tab.q_key(-2), Wkey))
                den1b = self._bin(tab.key_mul(tab.q_key(-1), wk),
                                  tab.key_mul(tab.C_key(-1), Winv))
                coef1 = (rho * WK1).scale_mono(tab.w_key(i, k, -1))
                coef1 = coef1.div_poly(omega_den).div_poly(den1a).div_poly(den1b)
                got = F(X, Xp, Y)
                if not got.equals(Y.scale(coef1)):
                    fails.append((("F1", k) + label, (got - Y.scale(coef1)).render(limit=2000)))
                den2a = self._bin(tab.key_mul(tab.q_key(-3), wk),
                                  tab.key_mul(tab.q_key(-2), Wkey))
                den2b = self._bin(tab.key_mul(tab.q_key(-3), wk),
                                  tab.key_mul(tab.C_key(-1), Winv))
                coef2 = (rho * WK2).scale_mono(tab.key_mul(tab.q_key(2), tab.w_key(i, k, -1)), -1)
                coef2 = coef2.div_poly(omega_den).div_poly(den2a).div_poly(den2b)
                got2 = F(Xp, X, Y)
                if not got2.equals(Y.scale(coef2)):
                    fails.append((("F2", k) + label, (got2 - Y.scale(coef2)).render(limit=2000)))

        if inst.theta[i]:
            mu, lam = inst.mu[i], inst.lam[i]
            Xpp = gk.xsecond_op(i)
            WFULL = gk.frakW_at(i, None, Dm1)
            qsq = Poly(tab, {tab.q_key(2): 1, tab.BIAS: -1})
            for label, Y, Wkey in ys:
                if label[0] == "Ypp":
                    continue
                head = tab.key_mul(tab.mono({tab.iD: mu - 1, tab.iq: 3 * (mu - lam) - 1}), Wkey)
                coef3 = Scalar.from_poly(tab, qsq * qsq).scale_mono(head, -1 if mu % 2 else 1)
                coef3 = coef3 * WFULL
                coef3 = coef3.div_poly(self._bin(Wkey, tab.key_mul(tab.q_key(1), Dm1)).pow(2))
                got3 = F(Xpp, Xpp, Y)
                if not got3.equals(Y.scale(coef3)):
                    fails.append((("F3",) + label, (got3 - Y.scale(coef3)).render(limit=2000)))
        return self._report(f"f[i={i},j={j}]", 0, fails, t0=t0)

    # -- G collapses -----------------------------------------------------------------

    def _g_bracket_mode(self, res, a_val: Scalar, j, c_idx, pref: Scalar,
                        key_off: int, sgn: int, variant: str):
        """Stream pref * [a, A_j]-type mode c_idx (variant L: [a, A],
        R: [A, a], both with the q^{-2} weight)."""
        eng, tab = self.engine, self.tab
        q2 = tab.q_key(-2)
        for term in eng.aterms(j):
            sh = eng._shift(a_val, term.evec)
            if variant == "L":
                d = (a_val - sh.scale_mono(q2)) * term.op_coeff
            else:
                d = (sh - a_val.scale_mono(q2)) * term.op_coeff
            d = d * pref
            off = key_off + (eng._mode_key(term, c_idx) - tab.BIAS)
            res.add(term.evec, d, off, sgn)

    def check_g(self, i, j, window: int):
        gk, tab, eng = self.gk, self.tab, self.engine
        inst = self.inst
        mu = inst.mu[i]
        rho = gk.constant("rho")
        rhop = gk.constant("rhoPrime", i)
        kap = Scalar.mono(tab, tab.mono({tab.kappa_idx[i]: 1}))
        reports = []
        rng = range(-window, window + 1)
        Dm1 = tab.mono({tab.iD: -1})

        def run_case(case_id, a_val, supp_key, pref_qpow, rhs_arg_qpow, rhs_extra_q):
            t0 = time.monotonic()
            # LHS prefactor P(w2) at the support value
            w2sq = tab.key_pow(supp_key, 2)
            p = (kap * rhop * rho * rho).scale_mono(
                tab.key_mul(tab.key_mul(supp_key, tab.C_key(1)),
                            tab.key_mul(tab.w_key(i, k, -2 - mu), tab.q_key(pref_qpow))))
            p = p.div_poly(self._bin(tab.BIAS, tab.key_mul(tab.q_key(2),
                                                           tab.key_mul(tab.C_key(1), w2sq)),
                                     1, -1))
            p = p.div_poly(self._bin(tab.BIAS, tab.key_mul(tab.q_key(-2),
                                                           tab.key_mul(tab.C_key(1), w2sq)),
                                     1, -1))
            # kernel (q^{rhs_arg_qpow - 1} w_k - q^{-2} z)(same - C^{-1} z^{-1})
            wfac = tab.key_mul(tab.q_key(rhs_arg_qpow - 1), tab.w_key(i, k))
            # expanded kernel Laurent coefficients in z
            K = {
                1: Scalar.mono(tab, tab.key_mul(wfac, tab.q_key(-2)), -1),
                0: Scalar.mono(tab, tab.key_pow(wfac, 2)) +
                Scalar.mono(tab, tab.mono({tab.iq: -2, tab.iD: -2})),
                -1: Scalar.mono(tab, tab.key_mul(wfac, tab.C_key(-1)), -1),
            }
            # RHS coefficient kappa rho' rho w^{-1-mu} q^{rhs_extra_q} * frakW-value
            rcoef = (kap * rhop * rho * a_val).scale_mono(
                tab.key_mul(tab.w_key(i, k, -1 - mu), tab.q_key(rhs_extra_q)))
            fails = []
            c2supp = tab.key_mul(tab.C_key(1), w2sq)
            for c in rng:
                res = Residual(tab)
                for d, kd in K.items():
                    cm = c - d
                    # [2] z w2 C [a, A_j] part at z-mode cm-1
                    for qq in (1, -1):
                        self._g_bracket_mode(
                            res, a_val, j, cm - 1,
                            p * kd, tab.key_mul(tab.key_mul(supp_key, tab.C_key(1)),
                                                tab.q_key(qq)) - tab.BIAS, 1, "L")
                    # (1 + C w2^2) [A_j, a] part at z-mode cm
                    self._g_bracket_mode(res, a_val, j, cm, p * kd, 0, 1, "R")
                    self._g_bracket_mode(res, a_val, j, cm, p * kd,
                                         c2supp - tab.BIAS, 1, "R")
                for term in eng.aterms(j):
                    res.add(term.evec, rcoef * term.op_coeff,
                            eng._mode_key(term, c) - tab.BIAS, -1)
                r = res.to_torus()
                if not r.is_zero():
                    fails.append(((c,), r.render(limit=2000)))
            reports.append(self._report(f"g:{case_id}[i={i},j={j}]", window, fails, t0=t0))

        for k in range(1, inst.m[i] + 1):
            wk = tab.w_key(i, k)
            WK1 = gk.frakW_at(i, k, wk)
            WK2 = gk.frakW_at(i, k, tab.key_mul(tab.q_key(-2), wk))
            cw_inv = tab.key_mul(tab.C_key(-1), tab.w_key(i, k, -1))
            run_case(f"A1[k={k}]", WK1, cw_inv, 3, 0, 0)
            run_case(f"A3[k={k}]", WK1, wk, 3, 0, 0)
            run_case(f"A2[k={k}]", WK2, tab.key_mul(tab.q_key(2), cw_inv),
                     7 + 2 * mu, -2, 2 + 2 * mu)
            run_case(f"A4[k={k}]", WK2, tab.key_mul(tab.q_key(-2), wk),
                     7 + 2 * mu, -2, 2 + 2 * mu)

        # the theta-gated collapse at the double support point
        t0 = time.monotonic()
        if inst.theta[i]:
            WFULL = gk.frakW_at(i, None, Dm1)
            lam = inst.lam[i]
            one_minus_q = Poly(tab, {tab.BIAS: 1, tab.q_key(1): -1})
            qsq = Poly(tab, {tab.q_key(2): 1, tab.BIAS: -1})  # q^2 - 1
            # LHS prefactor: 2 q kappa rho' (1-q) C^{mu/2} / ((1+q)(q-q^{-1})^2)
            p5 = (kap * rhop).mul_int(2).mul_poly(one_minus_q)
            p5 = p5.scale_mono(tab.mono({tab.iD: mu, tab.iq: 3}))
            p5 = p5.div_poly(tab.one_plus_q()).div_poly(qsq).div_poly(qsq)
            # RHS: -2 C^{(mu-1)/2} (1-q)^2 kappa rho' z * value / (z - q C^{-1/2})^2
            r5 = (kap * rhop * WFULL).mul_int(-2).mul_poly(one_minus_q * one_minus_q)
            r5 = r5.scale_mono(tab.mono({tab.iD: mu - 1}))
            K = {2: self._sc(), 1: Scalar.mono(tab, tab.key_mul(tab.q_key(1), Dm1), -2),
                 0: Scalar.mono(tab, tab.key_mul(tab.q_key(2), tab.key_pow(Dm1, 2)))}
            fails = []
            for c in rng:
                res = Residual(tab)
                for d, kd in K.items():
                    cm = c - d
                    for qq in (1, -1):
                        self._g_bracket_mode(res, WFULL, j, cm - 1, p5 * kd,
                                             tab.key_mul(tab.key_mul(Dm1, tab.C_key(1)),
                                                         tab.q_key(qq)) - tab.BIAS, 1, "L")
                    self._g_bracket_mode(res, WFULL, j, cm, p5 * kd, 0, 1, "R")
                    self._g_bracket_mode(res, WFULL, j, cm, p5 * kd,
                                         tab.key_mul(tab.C_key(1), tab.key_pow(Dm1, 2)) - tab.BIAS,
                                         1, "R")
                for term in eng.aterms(j):
                    res.add(term.evec, r5 * term.op_coeff,
                            eng._mode_key(term, c - 1) - tab.BIAS, -1)
                r = res.to_torus()
                if not r.is_zero():
                    fails.append(((c,), r.render(limit=2000)))
            reports.append(self._report(f"g:A5[i={i},j={j}]", window, fails, t0=t0))
        else:
            reports.append(self._report(f"g:A5[i={i},j={j}]", window, [],
                                        skipped=True, t0=t0))
        return reports
