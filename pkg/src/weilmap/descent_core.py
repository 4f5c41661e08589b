"""Weil descent of points, polynomials and algebraic sets.

Hatted variables are laid out block by block: the hatted variable x_{c,j}
(coordinate j of the block replacing original variable x_c) sits in column
c*d + j.  A descended monomial m of exponent e expands over the compositions
k of each e_c into d parts; the multinomial coefficient is reduced mod p and
compositions with vanishing coefficient are dropped.
"""

import itertools
import math

import numpy as np

from .field_tower import (
    THETA,
    DescentBasis,
    make_rng,
    mat_vec,
    random_descent_basis,
)


# --- sparse polynomials over K ------------------------------------------

class PolyK:
    """Sparse polynomial over K in n variables; terms map exponent tuples to K ints."""

    __slots__ = ("F", "n", "terms")

    def __init__(self, F, n, terms=None):
        self.F = F
        self.n = n
        self.terms = {}
        if terms:
            for e, c in terms.items():
                if c:
                    self.terms[tuple(e)] = c

    @classmethod
    def const(cls, F, n, c):
        return cls(F, n, {(0,) * n: c})

    @classmethod
    def var(cls, F, n, i, c=1):
        e = [0] * n
        e[i] = 1
        return cls(F, n, {tuple(e): c})

    @classmethod
    def affine(cls, F, n, coeffs, const=0):
        """const + sum coeffs[i] x_i."""
        terms = {(0,) * n: const}
        for i, c in enumerate(coeffs):
            e = [0] * n
            e[i] = 1
            terms[tuple(e)] = c
        return cls(F, n, terms)

    def copy(self):
        return PolyK(self.F, self.n, dict(self.terms))

    def is_zero(self):
        return not self.terms

    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def monomials(self):
        return sorted(self.terms)

    def coeff(self, e):
        return self.terms.get(tuple(e), 0)

    def __add__(self, other):
        if not isinstance(other, PolyK):
            other = PolyK.const(self.F, self.n, other)
        F = self.F
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = F.add(out.get(e, 0), c)
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return PolyK(F, self.n, out)

    __radd__ = __add__

    def __neg__(self):
        F = self.F
        return PolyK(F, self.n, {e: F.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, PolyK):
            other = PolyK.const(self.F, self.n, other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, a):
        F = self.F
        if a == 0:
            return PolyK(F, self.n)
        return PolyK(F, self.n, {e: F.mul(a, c) for e, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, PolyK):
            return self.scale(other)
        F = self.F
        out = {}
        mul, add = F.mul, F.add
        items = list(other.terms.items())
        for e1, c1 in self.terms.items():
            for e2, c2 in items:
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = add(out.get(e, 0), mul(c1, c2))
        return PolyK(F, self.n, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        result = PolyK.const(self.F, self.n, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        return isinstance(other, PolyK) and self.n == other.n and self.terms == other.terms

    def conj(self, i):
        """Apply sigma_i to every coefficient."""
        F = self.F
        return PolyK(F, self.n, {e: F.frob(c, i) for e, c in self.terms.items()})

    def evaluate(self, point):
        F = self.F
        acc = 0
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v = F.mul(v, F.pow(x, k))
            acc = F.add(acc, v)
        return acc

    def compose(self, subs):
        """Substitute polynomials (all in the same number of variables) for the variables."""
        m = subs[0].n
        F = self.F
        out = PolyK(F, m)
        cache = {}
        for e, c in self.terms.items():
            term = PolyK.const(F, m, c)
            for i, k in enumerate(e):
                if k:
                    key = (i, k)
                    if key not in cache:
                        cache[key] = subs[i] ** k
                    term = term * cache[key]
            out = out + term
        return out

    def embed(self, n_total, offset):
        """View as a polynomial in n_total variables, ours starting at offset."""
        out = {}
        for e, c in self.terms.items():
            full = [0] * n_total
            full[offset:offset + self.n] = e
            out[tuple(full)] = c
        return PolyK(self.F, n_total, out)

    def exps_array(self):
        mons = self.monomials()
        return np.array(mons, dtype=np.int64).reshape(len(mons), self.n), [self.terms[m] for m in mons]

    def is_dense_in_degree(self, deg):
        for e in monomials_of_degree(self.n, deg):
            if e not in self.terms:
                return False
        return True

    def dense_degrees(self):
        return [t for t in range(2, self.degree() + 1) if self.is_dense_in_degree(t)]

    def to_list(self):
        return [[list(e), self.F.coords(c)] for e, c in sorted(self.terms.items())]

    @classmethod
    def from_list(cls, F, n, data):
        return cls(F, n, {tuple(e): F.from_coords(c) for e, c in data})

    def __repr__(self):
        return f"PolyK(n={self.n}, terms={len(self.terms)}, deg={self.degree()})"


def monomials_of_degree(n, deg):
    out = []
    for combo in itertools.combinations_with_replacement(range(n), deg):
        e = [0] * n
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return out


def monomials_up_to(n, deg):
    out = []
    for t in range(deg + 1):
        out.extend(monomials_of_degree(n, t))
    return out


def multiple_witness(support, generators):
    """A pair (m, g) with supp(m*g) inside ``support``, or None.

    ``support`` is a set of exponent tuples and each generator a PolyK.
    """
    for g in generators:
        gm = g.monomials()
        top = max(gm, key=sum)
        for s in support:
            m = tuple(a - b for a, b in zip(s, top))
            if min(m) < 0:
                continue
            if all(tuple(a + b for a, b in zip(m, e)) in support for e in gm):
                return m, g
    return None


def random_poly(F, n, deg, rng, dense=True):
    mons = monomials_up_to(n, deg)
    terms = {}
    for e in mons:
        if dense or rng.random() < 0.5:
            terms[e] = rng.randrange(F.order)
    return PolyK(F, n, terms)


# --- descent context ----------------------------------------------------

class DescentContext:
    """A secret basis u together with the maps delta, rho and their conjugates."""

    def __init__(self, tower, basis, label="u"):
        self.tower = tower
        self.basis = basis
        self.label = label
        self._expander = None

    @classmethod
    def random(cls, tower, seed, label="u"):
        return cls(tower, random_descent_basis(tower, seed), label)

    @property
    def d(self):
        return self.tower.d

    @property
    def u(self):
        return self.basis.u

    @property
    def gamma(self):
        return self.basis.gamma

    @property
    def w(self):
        return self.basis.w

    @property
    def expander(self):
        if self._expander is None:
            self._expander = Expander(self)
        return self._expander


def delta(ctx, xhat, i=0):
    """<xhat, u^{sigma_i}>; xhat entries may lie in K."""
    F = ctx.tower
    row = ctx.basis.conj(i)
    return F.sum(F.mul(x, r) for x, r in zip(xhat, row))


def rho(ctx, xhat):
    return mat_vec(ctx.tower, ctx.gamma, xhat)


def rho_inv(ctx, vec):
    return mat_vec(ctx.tower, ctx.w, vec)


def delta_point(ctx, point, i=0):
    """Apply delta^{sigma_i} block by block to a hatted point of length n*d."""
    d = ctx.d
    return [delta(ctx, point[c * d:(c + 1) * d], i) for c in range(len(point) // d)]


def lift_conjugates(ctx, comps):
    """Hatted point X with delta^{sigma_i} X = comps[i] (comps[i] a point with n coordinates)."""
    d = ctx.d
    n = len(comps[0])
    out = []
    for c in range(n):
        out.extend(rho_inv(ctx, [comps[i][c] for i in range(d)]))
    return out


def lift_orbit(ctx, point, tuple_points=None):
    """Hatted point whose conjugate components are sigma_i of the given points.

    With tuple_points=None every component uses ``point`` (a descent point).
    """
    F = ctx.tower
    pts = tuple_points if tuple_points is not None else [point] * ctx.d
    comps = [[F.frob(x, i) for x in pts[i]] for i in range(ctx.d)]
    return lift_conjugates(ctx, comps)


def lambda_components(ctx, xhat):
    """(sigma_{-i}(delta^{sigma_i} xhat))_i."""
    F = ctx.tower
    out = []
    for i in range(ctx.d):
        pt = delta_point(ctx, xhat, i)
        out.append([F.frob(x, -i) for x in pt])
    return out


# --- hatted polynomials ---------------------------------------------------

def _multinomial(e, k):
    v = math.factorial(e)
    for x in k:
        v //= math.factorial(x)
    return v


def _compositions(e, d):
    if d == 1:
        yield (e,)
        return
    for first in range(e, -1, -1):
        for rest in _compositions(e - first, d - 1):
            yield (first,) + rest


class Expander:
    """Cached expansion data for one descent basis."""

    def __init__(self, ctx):
        self.ctx = ctx
        self.F = ctx.tower
        self._comp = {}
        self._support = {}
        self._blocks = {}

    def compositions(self, e):
        """(k array, log of mult*prod u_j^{k_j}) for compositions with mult != 0 mod p."""
        if e not in self._comp:
            F = self.F
            n = F.order - 1
            ks, logs = [], []
            for k in _compositions(e, F.d):
                mult = _multinomial(e, k) % F.q
                if mult == 0:
                    continue
                lg = F.log[mult]
                for j, kj in enumerate(k):
                    lg += kj * self.ctx.basis.log_u[j]
                ks.append(k)
                logs.append(lg % max(n, 1))
            self._comp[e] = (np.array(ks, dtype=np.int64).reshape(len(ks), F.d), np.array(logs, dtype=np.int64))
        return self._comp[e]

    def support(self, monos):
        key = tuple(tuple(m) for m in monos)
        if key not in self._support:
            if len(self._support) > 64:
                self._support.clear()
            self._support[key] = HatSupport(self, [tuple(m) for m in monos])
        return self._support[key]

    def block(self, m):
        """(hatted exponent rows, logs of p_t) of one original monomial."""
        if m not in self._blocks:
            F = self.F
            d = F.d
            nmod = max(F.order - 1, 1)
            n = len(m)
            parts = [self.compositions(e) for e in m]
            sizes = [len(p[1]) for p in parts]
            total = int(np.prod(sizes)) if sizes else 1
            exps = np.zeros((total, n * d), dtype=np.int64)
            logs = np.zeros(total, dtype=np.int64)
            rep = total
            tile = 1
            for c, (ks, lg) in enumerate(parts):
                rep //= sizes[c]
                idx = np.tile(np.repeat(np.arange(sizes[c]), rep), tile)
                exps[:, c * d:(c + 1) * d] = ks[idx]
                logs += lg[idx]
                tile *= sizes[c]
            self._blocks[m] = (exps, logs % nmod)
        return self._blocks[m]


class HatSupport:
    """Hatted support of a list of original monomials, with per-term data."""

    def __init__(self, expander, monos):
        F = expander.F
        d = F.d
        self.F = F
        self.monos = monos
        self.index = {m: i for i, m in enumerate(monos)}
        n = len(monos[0]) if monos else 0
        self.n = n
        if monos:
            blocks = [expander.block(m) for m in monos]
            self.exps = np.concatenate([b[0] for b in blocks])
            self.logp = np.concatenate([b[1] for b in blocks])
            self.mono_index = np.repeat(np.arange(len(monos), dtype=np.int64), [len(b[1]) for b in blocks])
        else:
            self.exps = np.zeros((0, n * d), dtype=np.int64)
            self.mono_index = np.zeros(0, dtype=np.int64)
            self.logp = np.zeros(0, dtype=np.int64)
        self.size = len(self.mono_index)

    def conj_values(self, C, s):
        """K values of sigma_s(C[m_t] * p_t) for every hatted term t; C is a length-M array."""
        F = self.F
        nmod = max(F.order - 1, 1)
        c = np.asarray(C, dtype=np.int64)[self.mono_index]
        lg = (F.np_log[c] + self.logp) % nmod
        lg = (lg * pow(F.q, s % F.d, nmod)) % nmod
        vals = F.np_exp[lg]
        return np.where(c == 0, 0, vals)

    def expand_theta(self, Cmat):
        """theta-digit coefficients (T x d) of sum_s (Q_s)^{sigma_s} o delta^{sigma_s}.

        Cmat has shape (M, d): column s holds the coefficients of Q_s.
        """
        F = self.F
        acc = np.zeros((self.size, F.d), dtype=np.int64)
        Cmat = np.asarray(Cmat, dtype=np.int64)
        for s in range(F.d):
            if not Cmat[:, s].any():
                continue
            acc += F.digits[self.conj_values(Cmat[:, s], s)]
        return acc % F.q

    def values_theta(self, Cmat):
        """The K coefficients themselves."""
        F = self.F
        dig = self.expand_theta(Cmat)
        return dig @ F.weights


class HatPoly:
    """A d-tuple of polynomials over k in n*d hatted variables.

    ``coefs[t, j]`` is the coefficient of hatted monomial ``exps[t]`` in
    component j.  With basis THETA the tuple stands for the K-valued
    polynomial sum_j theta_j f_j; with basis "u" it is a descent tuple whose
    components are coordinates in the secret basis labelled ``label``.
    """

    def __init__(self, n, d, exps, coefs, q, basis=THETA, label=None):
        self.n = n
        self.d = d
        self.q = q
        exps = np.asarray(exps, dtype=np.int64).reshape(-1, n * d)
        coefs = np.asarray(coefs, dtype=np.int64).reshape(-1, d) % q
        keep = coefs.any(axis=1)
        self.exps = exps[keep]
        self.coefs = coefs[keep]
        self.basis = basis
        self.label = label

    @property
    def size(self):
        return len(self.exps)

    def is_zero(self):
        return self.size == 0

    def degree(self):
        return int(self.exps.sum(axis=1).max()) if self.size else -1

    def component(self, j):
        mask = self.coefs[:, j] != 0
        return [(tuple(int(v) for v in e), int(c)) for e, c in zip(self.exps[mask], self.coefs[mask, j])]

    def evaluate(self, F, point):
        """List of the d component values at a hatted point over K."""
        vals = monomial_values(F, self.exps, point)
        dig = F.digits[vals].astype(np.float64)
        S = np.rint(self.coefs.T.astype(np.float64) @ dig).astype(np.int64) % F.q
        return [int(v) for v in S @ F.weights]

    def evaluate_theta(self, F, point):
        comps = self.evaluate(F, point)
        return F.sum(F.mul(F.theta(j), v) for j, v in enumerate(comps))

    def map_components(self, mat):
        """New tuple with component i = sum_j mat[i][j] f_j (mat over k)."""
        M = np.asarray(mat, dtype=np.int64) % self.q
        return HatPoly(self.n, self.d, self.exps, (self.coefs @ M.T) % self.q, self.q, self.basis, self.label)

    def add(self, other):
        exps = np.concatenate([self.exps, other.exps])
        coefs = np.concatenate([self.coefs, other.coefs])
        return combine_terms(self.n, self.d, exps, coefs, self.q, self.basis, self.label)

    def canonical(self):
        return combine_terms(self.n, self.d, self.exps, self.coefs, self.q, self.basis, self.label)

    def block_keys(self):
        """Original exponent vector of each term (per-block degree)."""
        return self.exps.reshape(-1, self.n, self.d).sum(axis=2)

    def partial(self, col):
        """Formal derivative with respect to hatted variable ``col``."""
        e = self.exps[:, col]
        mask = e > 0
        exps = self.exps[mask].copy()
        coefs = (self.coefs[mask] * e[mask, None]) % self.q
        exps[:, col] -= 1
        return combine_terms(self.n, self.d, exps, coefs, self.q, self.basis, self.label)

    def restrict(self, col_values, F):
        """Substitute constants in k for some columns (dict col -> value), keeping the rest."""
        exps = self.exps.copy()
        coefs = self.coefs.copy()
        for col, val in col_values.items():
            e = exps[:, col]
            factor = np.array([pow(int(val), int(k), self.q) for k in e], dtype=np.int64)
            coefs = (coefs * factor[:, None]) % self.q
            exps[:, col] = 0
        return combine_terms(self.n, self.d, exps, coefs, self.q, self.basis, self.label)

    def to_dict(self):
        return {
            "n": self.n, "d": self.d, "basis": self.basis if self.basis == THETA else "u",
            "label": self.label,
            "terms": [[[int(v) for v in e], [int(c) for c in cs]] for e, cs in zip(self.exps, self.coefs)],
        }

    @classmethod
    def from_dict(cls, data, q):
        n, d = data["n"], data["d"]
        exps = [t[0] for t in data["terms"]]
        coefs = [t[1] for t in data["terms"]]
        basis = THETA if data["basis"] == THETA else "u"
        return cls(n, d, np.array(exps, dtype=np.int64).reshape(-1, n * d),
                   np.array(coefs, dtype=np.int64).reshape(-1, d), q, basis, data.get("label"))

    def __eq__(self, other):
        if not isinstance(other, HatPoly):
            return False
        a, b = self.canonical(), other.canonical()
        return (a.n, a.d, a.basis) == (b.n, b.d, b.basis) and np.array_equal(a.exps, b.exps) and np.array_equal(a.coefs, b.coefs)

    def __repr__(self):
        return f"HatPoly(n={self.n}, d={self.d}, terms={self.size}, basis={self.basis})"


DescentTuple = HatPoly


def combine_terms(n, d, exps, coefs, q, basis=THETA, label=None):
    if len(exps) == 0:
        return HatPoly(n, d, exps, coefs, q, basis, label)
    uniq, inv = np.unique(exps, axis=0, return_inverse=True)
    inv = np.asarray(inv).reshape(-1)
    acc = np.zeros((len(uniq), d), dtype=np.int64)
    np.add.at(acc, inv, coefs)
    return HatPoly(n, d, uniq, acc % q, q, basis, label)


def monomial_values(F, exps, point):
    """K values of the hatted monomials ``exps`` at a point over K."""
    point = np.asarray(point, dtype=np.int64)
    nmod = max(F.order - 1, 1)
    logs = F.np_log[point]
    zero = logs < 0
    logs = np.where(zero, 0, logs)
    exps = np.asarray(exps)
    lg = (exps.astype(np.int64) @ logs) % nmod
    vals = F.np_exp[lg]
    if zero.any():
        hit = (exps[:, zero] > 0).any(axis=1)
        vals = np.where(hit, 0, vals)
    return vals


def theta_change_matrix(basis):
    """k-matrix taking theta-digit rows to u-coordinate rows (row @ M)."""
    return np.array(basis.change_inv, dtype=np.int64).T


def expand_polynomial(ctx, P, conj=0, basis="u"):
    """Hatted tuple of P^{sigma_conj} o delta^{sigma_conj}; in basis u or theta."""
    F = ctx.tower
    if P.is_zero():
        return HatPoly(P.n, F.d, np.zeros((0, P.n * F.d)), np.zeros((0, F.d)), F.q,
                       basis if basis == THETA else "u", ctx.label)
    mons = P.monomials()
    sup = ctx.expander.support(mons)
    C = np.zeros((len(mons), F.d), dtype=np.int64)
    C[:, conj] = [P.terms[m] for m in mons]
    dig = sup.expand_theta(C)
    if basis == THETA:
        return HatPoly(P.n, F.d, sup.exps, dig, F.q, THETA, ctx.label)
    coefs = (dig @ theta_change_matrix(ctx.basis)) % F.q
    return HatPoly(P.n, F.d, sup.exps, coefs, F.q, "u", ctx.label)


def descend_polynomial(ctx, F_poly):
    """The tuple F-hat with F(delta x) = sum_i f_i(x) u_i."""
    return expand_polynomial(ctx, F_poly, 0, "u")


def descend_variety(ctx, generators):
    out = []
    for G in generators:
        T = descend_polynomial(ctx, G)
        for j in range(ctx.d):
            out.append(single_component(T, j))
    return out


def single_component(T, j):
    """Component j of a tuple as a one-row tuple (kept in HatPoly form with d=1 style coefs)."""
    coefs = np.zeros_like(T.coefs)
    coefs[:, 0] = T.coefs[:, j]
    return HatPoly(T.n, T.d, T.exps, coefs, T.q, "component", T.label)


def component_value(F, H, point):
    """Value of component 0 of a single-component HatPoly."""
    return H.evaluate(F, point)[0]


def on_variety(F, equations, point):
    return all(component_value(F, H, point) == 0 for H in equations)


def is_descent_point(ctx, xhat):
    """(is descent point, leaked vectors r with <r, u> = 0)."""
    F = ctx.tower
    d = ctx.d
    n = len(xhat) // d
    comps = [delta_point(ctx, xhat, i) for i in range(d)]
    # descent point iff comps[i] = sigma_i(comps[0]) for every i
    base = comps[0]
    for i in range(1, d):
        if any(F.frob(x, i) != y for x, y in zip(base, comps[i])):
            return False, []
    if all(F.in_prime_field(x) for x in xhat):
        return True, []
    leaks = []
    for i in range(1, d):
        for c in range(n):
            blk = xhat[c * d:(c + 1) * d]
            conj = [F.frob(x, i) for x in blk]
            diff = [F.sub(a, b) for a, b in zip(blk, conj)]
            if any(diff):
                leaks.append(diff)
    return True, leaks


def random_hatted_point(F, n, d, rng):
    return [rng.randrange(F.order) for _ in range(n * d)]


__all__ = [
    "PolyK", "DescentContext", "DescentBasis", "HatPoly", "DescentTuple", "HatSupport", "Expander",
    "delta", "rho", "rho_inv", "delta_point", "lift_conjugates", "lift_orbit", "lambda_components",
    "descend_polynomial", "descend_variety", "expand_polynomial", "is_descent_point",
    "monomial_values", "random_hatted_point", "monomials_of_degree", "monomials_up_to", "random_poly", "make_rng",
    "combine_terms", "multiple_witness", "single_component", "on_variety", "theta_change_matrix",
]
