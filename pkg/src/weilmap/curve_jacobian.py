"""Elliptic and hyperelliptic Jacobian arithmetic with explicit functions.

Univariate polynomials over K are little-endian lists of K ints with no
trailing zeros.  A reduced divisor div(a, b) stands for D+ - r*inf with
r = deg a.  Additions return a FunctionRecord h with D1 + D2 = D3 + (h).
"""

from dataclasses import dataclass, field

from .descent_core import PolyK, monomials_up_to as _monos_up_to, multiple_witness
from .field_tower import make_rng, mat_det, mat_inv, mat_vec


class SupportCollision(ArithmeticError):
    """A function was evaluated at one of its zeros or poles."""


class SiteViolation(ArithmeticError):
    """An addition left the principal site (e.g. doubling a 2-torsion point)."""


# --- univariate polynomials over K --------------------------------------

def ptrim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def pdeg(a):
    return len(a) - 1


def padd(F, a, b):
    n = max(len(a), len(b))
    return ptrim([F.add(a[i] if i < len(a) else 0, b[i] if i < len(b) else 0) for i in range(n)])


def pneg(F, a):
    return [F.neg(c) for c in a]


def psub(F, a, b):
    return padd(F, a, pneg(F, b))


def pscale(F, a, c):
    return ptrim([F.mul(c, x) for x in a])


def pmul(F, a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = F.add(out[i + j], F.mul(x, y))
    return ptrim(out)


def pdivmod(F, a, b):
    b = ptrim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(ptrim(a))
    inv = F.inv(b[-1])
    db = len(b) - 1
    if len(a) - 1 < db:
        return [], a
    quo = [0] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = F.mul(a[i], inv)
        if c:
            quo[i - db] = c
            for j in range(db + 1):
                a[i - db + j] = F.sub(a[i - db + j], F.mul(c, b[j]))
    return ptrim(quo), ptrim(a[:db])


def pmod(F, a, b):
    return pdivmod(F, a, b)[1]


def pmonic(F, a):
    a = ptrim(a)
    if not a:
        return a
    return pscale(F, a, F.inv(a[-1]))


def pxgcd(F, a, b):
    """(g, s, t) with s*a + t*b = g, g monic (or zero)."""
    r0, r1 = ptrim(a), ptrim(b)
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while r1:
        qt, r = pdivmod(F, r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, psub(F, s0, pmul(F, qt, s1))
        t0, t1 = t1, psub(F, t0, pmul(F, qt, t1))
    if not r0:
        return [], [], []
    inv = F.inv(r0[-1])
    return pscale(F, r0, inv), pscale(F, s0, inv), pscale(F, t0, inv)


def peval(F, a, x):
    acc = 0
    for c in reversed(a):
        acc = F.add(F.mul(acc, x), c)
    return acc


def resultant_monic(F, a, g):
    """prod g(gamma) over the roots gamma of the monic polynomial a (with multiplicity)."""
    a, g = ptrim(a), ptrim(g)
    da = pdeg(a)
    if da <= 0:
        return 1
    g = pmod(F, g, a)
    if not g:
        return 0
    dg = pdeg(g)
    lc = g[-1]
    scale = F.pow(lc, da)
    if dg == 0:
        return scale
    g0 = pmonic(F, g)
    sign = F.neg(1) if (da * dg) % 2 else 1
    return F.mul(F.mul(scale, sign), resultant_monic(F, g0, a))


def sym_eval(F, f_coeffs, a):
    """f(D+) for D+ the zero set of the monic a; computed without root finding."""
    return resultant_monic(F, a, f_coeffs)


# --- curve models ---------------------------------------------------------

class CurveModel:
    """y^2 = f(x) with f monic of degree 2g+1 over K."""

    def __init__(self, F, f, shield=None):
        self.F = F
        self.f = ptrim(f)
        if pdeg(self.f) % 2 != 1 or self.f[-1] != 1:
            raise ValueError("f must be monic of odd degree")
        self.genus = (pdeg(self.f) - 1) // 2
        g, _, _ = pxgcd(F, self.f, pderiv(F, self.f))
        if pdeg(g) > 0:
            raise ValueError("f is not squarefree")
        self.shield = shield

    @classmethod
    def elliptic(cls, F, a, b):
        return cls(F, [b, a, 0, 1])

    @property
    def a(self):
        return self.f[1] if len(self.f) > 1 else 0

    @property
    def b(self):
        return self.f[0] if self.f else 0

    def on_curve(self, P):
        if P is None:
            return True
        x, y = P
        F = self.F
        return F.mul(y, y) == peval(F, self.f, x)

    def points(self):
        """All affine points over K (naive enumeration)."""
        F = self.F
        out = []
        for x in range(F.order):
            v = peval(F, self.f, x)
            if v == 0:
                out.append((x, 0))
                continue
            r = F.sqrt(v)
            if r is not None:
                out.append((x, r))
                out.append((x, F.neg(r)))
        return out

    def count_points(self):
        return len(self.points()) + 1

    def to_dict(self):
        return {"f": [self.F.coords(c) for c in self.f]}

    def __repr__(self):
        return f"CurveModel(genus={self.genus}, f={self.f})"


def pderiv(F, a):
    return ptrim([F.mul(F.scalar(i), a[i]) for i in range(1, len(a))])


# --- function records --------------------------------------------------

@dataclass
class FunctionRecord:
    """h = (h1 / h3) * prod (y - beta_i)."""

    h1: list = field(default_factory=lambda: [1])
    betas: list = field(default_factory=list)
    h3: list = field(default_factory=lambda: [1])

    def scaled(self, F, c):
        return FunctionRecord(pscale(F, self.h1, c), list(self.betas), pscale(F, self.h3, c))

    def infinity_coefficient(self, F, genus):
        """Leading coefficient at infinity w.r.t. the uniformizer x^g / y."""
        val = F.div(self.h1[-1], self.h3[-1])
        for beta in self.betas:
            if pdeg(beta) > genus:
                val = F.mul(val, F.neg(beta[-1]))
        return val

    def valuation_at_infinity(self, genus):
        v = -2 * pdeg(self.h1) + 2 * pdeg(self.h3)
        for beta in self.betas:
            v += -2 * pdeg(beta) if pdeg(beta) > genus else -(2 * genus + 1)
        return v

    def evaluate_point(self, F, P):
        x, y = P
        num = peval(F, self.h1, x)
        den = peval(F, self.h3, x)
        for beta in self.betas:
            num = F.mul(num, F.sub(y, peval(F, beta, x)))
        if den == 0 or num == 0:
            raise SupportCollision("function has a zero or pole at the point")
        return F.div(num, den)


# --- reduced divisors and Cantor's algorithm -------------------------------

@dataclass(frozen=True)
class ReducedDivisor:
    a: tuple
    b: tuple

    @classmethod
    def zero(cls):
        return cls((1,), ())

    @classmethod
    def from_point(cls, F, P):
        if P is None:
            return cls.zero()
        x, y = P
        return cls((F.neg(x), 1), tuple(ptrim([y])))

    def is_zero(self):
        return self.a == (1,)

    @property
    def degree(self):
        return len(self.a) - 1

    def to_point(self, F):
        if self.is_zero():
            return None
        if self.degree != 1:
            raise ValueError("not a single point")
        x = F.neg(self.a[0])
        y = self.b[0] if self.b else 0
        return (x, y)

    def to_dict(self, F):
        return {"a": [F.coords(c) for c in self.a], "b": [F.coords(c) for c in self.b]}


def divisor_is_valid(model, D):
    F = model.F
    a, b = list(D.a), list(D.b)
    if not a or a[-1] != 1 or pdeg(b) >= pdeg(a) and b:
        return False
    if pdeg(a) > model.genus:
        return False
    return not pmod(F, psub(F, model.f, pmul(F, b, b)), a)


def negate_divisor(model, D):
    return ReducedDivisor(D.a, tuple(pneg(model.F, list(D.b))))


def cantor_compose(D1, D2, model):
    """(semireduced (a, b), h) with D1 + D2 = div(a, b) + (h)."""
    F = model.F
    a1, b1 = list(D1.a), list(D1.b)
    a2, b2 = list(D2.a), list(D2.b)
    d1, e1, e2 = pxgcd(F, a1, a2)
    h, c1, c2 = pxgcd(F, d1, padd(F, b1, b2))
    if not h:
        h, c1, c2 = d1, [1], []
    s1 = pmul(F, c1, e1)
    s2 = pmul(F, c1, e2)
    s3 = c2
    a = pdivmod(F, pmul(F, a1, a2), pmul(F, h, h))[0]
    num = padd(F, padd(F, pmul(F, pmul(F, s1, a1), b2), pmul(F, pmul(F, s2, a2), b1)),
               pmul(F, s3, padd(F, pmul(F, b1, b2), model.f)))
    b = pmod(F, pdivmod(F, num, h)[0], a)
    return (a, b), h


def cantor_reduce(D, model):
    """One reduction step; returns ((a', b'), (beta, a')) or (D, None) if already reduced."""
    F = model.F
    a, b = D
    if pdeg(a) <= model.genus:
        return D, None
    ap = pdivmod(F, psub(F, model.f, pmul(F, b, b)), a)[0]
    ap = pmonic(F, ap)
    bp = pmod(F, pneg(F, b), ap)
    return (ap, bp), (list(b), ap)


def jacobian_add(D1, D2, model):
    """(D3, h) with D1 + D2 = D3 + (h) and D3 reduced."""
    F = model.F
    (a, b), h1 = cantor_compose(D1, D2, model)
    betas, h3 = [], [1]
    D = (a, b)
    while pdeg(D[0]) > model.genus:
        D, step = cantor_reduce(D, model)
        betas.append(step[0])
        h3 = pmul(F, h3, step[1])
    a, b = D
    a = pmonic(F, a)
    b = pmod(F, b, a) if pdeg(a) > 0 else []
    return ReducedDivisor(tuple(a), tuple(b)), FunctionRecord(h1 or [1], betas, h3)


def jacobian_mul(D, n, model):
    n = int(n)
    if n < 0:
        D, n = negate_divisor(model, D), -n
    result = ReducedDivisor.zero()
    base = D
    while n:
        if n & 1:
            result = jacobian_add(result, base, model)[0]
        base = jacobian_add(base, base, model)[0]
        n >>= 1
    return result


def evaluate_function(model, h, D, include_infinity=None):
    """h(D+) via resultants; optionally divided by h_inf^r for the degree r of D."""
    F = model.F
    a, b = list(D.a), list(D.b)
    if pdeg(a) <= 0:
        val = 1
    else:
        num = sym_eval(F, h.h1, a)
        den = sym_eval(F, h.h3, a)
        for beta in h.betas:
            num = F.mul(num, sym_eval(F, psub(F, b, beta), a))
        if num == 0 or den == 0:
            raise SupportCollision("divisor meets a zero or pole of the function")
        val = F.div(num, den)
    if include_infinity:
        val = F.div(val, F.pow(h.infinity_coefficient(F, model.genus), pdeg(a)))
    return val


# --- elliptic curves --------------------------------------------------------

def elliptic_neg(model, P):
    if P is None:
        return None
    return (P[0], model.F.neg(P[1]))


def elliptic_add(P, Q, model):
    F = model.F
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if F.add(y1, y2) == 0:
            return None
        return elliptic_double_with_function(P, model)[0]
    lam = F.div(F.sub(y2, y1), F.sub(x2, x1))
    x3 = F.sub(F.sub(F.mul(lam, lam), x1), x2)
    y3 = F.sub(F.mul(lam, F.sub(x1, x3)), y1)
    return (x3, y3)


def elliptic_double_with_function(P, model):
    """(2P, h_P) with h_P = (y - lam x - nu)/(x - x(2P)), so (h_P) = 2(P) - (2P) - (inf)."""
    F = model.F
    if P is None:
        return None, FunctionRecord()
    x1, y1 = P
    if y1 == 0:
        raise SiteViolation("doubling a 2-torsion point")
    lam = F.div(F.add(F.mul(F.scalar(3), F.mul(x1, x1)), model.a), F.mul(F.scalar(2), y1))
    nu = F.sub(y1, F.mul(lam, x1))
    x3 = F.sub(F.mul(lam, lam), F.mul(F.scalar(2), x1))
    y3 = F.sub(F.mul(lam, F.sub(x1, x3)), y1)
    rec = FunctionRecord([1], [ptrim([nu, lam])], [F.neg(x3), 1])
    return (x3, y3), rec


def elliptic_line_coefficients(P, model):
    """(lam, nu) of the tangent line at P."""
    F = model.F
    x1, y1 = P
    lam = F.div(F.add(F.mul(F.scalar(3), F.mul(x1, x1)), model.a), F.mul(F.scalar(2), y1))
    return lam, F.sub(y1, F.mul(lam, x1))


def elliptic_mul(P, n, model):
    n = int(n)
    if n < 0:
        P, n = elliptic_neg(model, P), -n
    R = None
    while n:
        if n & 1:
            R = elliptic_add(R, P, model)
        P = elliptic_add(P, P, model)
        n >>= 1
    return R


def elliptic_order(P, model, bound):
    Q = P
    for k in range(1, bound + 1):
        if Q is None:
            return k
        Q = elliptic_add(Q, P, model)
    raise ValueError("order exceeds bound")


def torsion_points(model, ell):
    return [P for P in model.points() if elliptic_mul(P, ell, model) is None]


# --- shielded model -----------------------------------------------------

class ShieldedSystem:
    """The shielded curve E2 = iota(E) in three variables z with its tracked maps.

    iota(x, y) = mu (x, y, t) + c with t = -Qf(x, y)/Bf(x, y).  The inverse is
    affine: (x, y, t) = L(z).  E2 is cut out by F' = f_E(L) and the quadric
    R' = Qf(L_x, L_y) + L_t Bf(L_x, L_y).
    """

    def __init__(self, model, qf, bf, mu, c):
        F = model.F
        self.F = F
        self.model = model
        self.qf = list(qf)
        self.bf = list(bf)
        self.mu = [list(r) for r in mu]
        self.c = list(c)
        self.mu_inv = mat_inv(F, self.mu)
        # L(z) = mu_inv (z - c)
        shift = mat_vec(F, self.mu_inv, self.c)
        self.L = [PolyK.affine(F, 3, self.mu_inv[r], F.neg(shift[r])) for r in range(3)]
        x, y, t = self.L
        self.F_eq = y * y - (x * x * x + x.scale(model.a) + model.b)
        self.R_eq = self._quad(x, y) + t * self._lin(x, y)
        self._maps = None

    def _quad(self, x, y):
        return x * x * self.qf[0] + x * y * self.qf[1] + y * y * self.qf[2]

    def _lin(self, x, y):
        return x.scale(self.bf[0]) + y.scale(self.bf[1])

    @property
    def equations(self):
        return [self.F_eq, self.R_eq]

    def exceptional(self, P):
        F = self.F
        x, y = P
        return F.add(F.mul(self.bf[0], x), F.mul(self.bf[1], y)) == 0

    def to_e2(self, P):
        """iota(P); None for the zero point, error on the exceptional line."""
        if P is None:
            return None
        F = self.F
        x, y = P
        bv = F.add(F.mul(self.bf[0], x), F.mul(self.bf[1], y))
        if bv == 0:
            raise SiteViolation("point on the exceptional line of the shield")
        qv = F.add(F.add(F.mul(self.qf[0], F.mul(x, x)), F.mul(self.qf[1], F.mul(x, y))), F.mul(self.qf[2], F.mul(y, y)))
        t = F.neg(F.div(qv, bv))
        v = mat_vec(F, self.mu, [x, y, t])
        return tuple(F.add(a, b) for a, b in zip(v, self.c))

    def from_e2(self, z):
        if z is None:
            return None
        F = self.F
        w = mat_vec(F, self.mu_inv, [F.sub(a, b) for a, b in zip(z, self.c)])
        return (w[0], w[1])

    def on_e2(self, z):
        return self.F_eq.evaluate(z) == 0 and self.R_eq.evaluate(z) == 0

    def add(self, z1, z2):
        return self.to_e2(elliptic_add(self.from_e2(z1), self.from_e2(z2), self.model))

    # -- tracked rational maps ------------------------------------------

    def _shield_output(self, X, Y, D):
        """Numerators and common denominator of iota(X/D^2, Y/D^3)."""
        q11, q12, q22 = self.qf
        b1, b2 = self.bf
        XD = X * D
        lin = XD.scale(b1) + Y.scale(b2)
        quad = (XD * XD).scale(q11) + (XD * Y).scale(q12) + (Y * Y).scale(q22)
        den = D * D * D * lin
        xnum = XD * lin
        ynum = Y * lin
        tnum = -quad
        nums = []
        for r in range(3):
            nums.append(xnum.scale(self.mu[r][0]) + ynum.scale(self.mu[r][1]) + tnum.scale(self.mu[r][2]) + den.scale(self.c[r]))
        return nums, den

    def raw_maps(self):
        """The tracked maps as plain compositions through L (no completion)."""
        F = self.F
        a = self.model.a
        two, three = F.scalar(2), F.scalar(3)
        Lz = [p.embed(6, 0) for p in self.L]
        Lw = [p.embed(6, 3) for p in self.L]
        # addition m2(z, z')
        x1, y1 = Lz[0], Lz[1]
        x2, y2 = Lw[0], Lw[1]
        D = x2 - x1
        nn = y2 - y1
        X = nn * nn - (x1 + x2) * D * D
        Y = nn * (x1 * D * D - X) - y1 * D * D * D
        add_nums, add_den = self._shield_output(X, Y, D)
        # doubling tau2(z)
        x, y = self.L[0], self.L[1]
        D2 = y.scale(two)
        s = (x * x).scale(three) + a
        Xd = s * s - (x * y * y).scale(F.scalar(8))
        Yd = s * (x * D2 * D2 - Xd) - y * D2 * D2 * D2
        dbl_nums, dbl_den = self._shield_output(Xd, Yd, D2)
        # h-function of the doubling at L(z), evaluated at L(z')
        u, v = x1, y1
        xp, yp = x2, y2
        diff = xp - u
        A = v.scale(two) * diff * diff * diff
        B = (v * yp).scale(two) + ((u * u).scale(three) + a) * diff + (v * v).scale(two)
        B = B * diff
        return {"add": (add_nums, add_den), "double": (dbl_nums, dbl_den), "phi": (A, B)}

    def ideal_generators(self, nvars):
        if nvars == 3:
            return [self.R_eq, self.F_eq]
        return [self.R_eq.embed(6, 0), self.R_eq.embed(6, 3), self.F_eq.embed(6, 0), self.F_eq.embed(6, 3)]

    def complete(self, P, rng):
        """P plus a random multiple of R' (in each point block) up to deg P."""
        F = self.F
        gens = self.ideal_generators(P.n)[: 1 if P.n == 3 else 2]
        out = P
        for g in gens:
            deg = P.degree() - g.degree()
            if deg < 0:
                continue
            mult = PolyK(F, P.n, {e: rng.randrange(F.order) for e in _monos_up_to(P.n, deg)})
            out = out + mult * g
        return out

    def build_maps(self, rng=None):
        if self._maps is not None:
            return self._maps
        raw = self.raw_maps()
        if rng is None:
            self._maps = raw
            return raw
        maps = {}
        for key in ("add", "double"):
            nums, den = raw[key]
            maps[key] = ([self.complete(n, rng) for n in nums], self.complete(den, rng))
        maps["phi"] = tuple(self.complete(p, rng) for p in raw["phi"])
        self._maps = maps
        return maps

    def tracked_functions(self):
        """The seven tracked rational functions as (numerator, denominator) pairs."""
        maps = self.build_maps()
        out = [(n, maps["add"][1]) for n in maps["add"][0]]
        out += [(n, maps["double"][1]) for n in maps["double"][0]]
        out.append(maps["phi"])
        return out

    def phi_value(self, z, zp):
        """phi(z, z') through the E model (trusted)."""
        P = self.from_e2(z)
        Q = self.from_e2(zp)
        _, rec = elliptic_double_with_function(P, self.model)
        return rec.evaluate_point(self.F, Q)

    def to_dict(self):
        F = self.F
        return {
            "qf": [F.coords(v) for v in self.qf], "bf": [F.coords(v) for v in self.bf],
            "mu": [[F.coords(v) for v in r] for r in self.mu], "c": [F.coords(v) for v in self.c],
        }

    @classmethod
    def from_dict(cls, model, data):
        F = model.F
        fc = F.from_coords
        return cls(model, [fc(v) for v in data["qf"]], [fc(v) for v in data["bf"]],
                   [[fc(v) for v in r] for r in data["mu"]], [fc(v) for v in data["c"]])


def _dense_somewhere(P):
    return bool(P.dense_degrees())


def _has_witness(P, generators):
    return multiple_witness(set(P.terms), generators) is not None


def shielded_curve_system(model, seed, avoid=(), budget=200, check_maps=True):
    """Draw a random shield for an elliptic model.

    Retries until both equations are dense in some degree >= 2, R' has a
    constant term, no point of ``avoid`` lies on the exceptional line and
    (with check_maps) the support of every tracked numerator and denominator
    contains a monomial multiple of R'.  Tracked maps are completed by a random
    multiple of R' so their supports are dense up to their degree.
    """
    F = model.F
    if F.q in (2, 3):
        raise ValueError("characteristic 2 or 3 not supported")
    if model.genus != 1:
        raise ValueError("shield is built for elliptic models")
    rng = make_rng(seed)
    for _ in range(budget):
        qf = [rng.randrange(1, F.order) for _ in range(3)]
        bf = [rng.randrange(1, F.order) for _ in range(2)]
        mu = [[rng.randrange(F.order) for _ in range(3)] for _ in range(3)]
        if mat_det(F, mu) == 0:
            continue
        c = [rng.randrange(1, F.order) for _ in range(3)]
        S = ShieldedSystem(model, qf, bf, mu, c)
        if any(S.exceptional(P) for P in avoid):
            continue
        if S.R_eq.coeff((0, 0, 0)) == 0:
            continue
        if not (_dense_somewhere(S.F_eq) and _dense_somewhere(S.R_eq)):
            continue
        S.build_maps(rng)
        if check_maps:
            one = [S.R_eq]
            two = [S.R_eq.embed(6, 0), S.R_eq.embed(6, 3)]
            ok = True
            for num, den in S.tracked_functions():
                gens = two if num.n == 6 else one
                if not (_has_witness(num, gens) and _has_witness(den, gens)):
                    ok = False
                    break
            if not ok:
                continue
        return S
    raise RuntimeError("density retry budget exhausted while drawing the shield")
