"""Matrix maps on A[l]^d, their blinded versions Psi on the descent, and G2 arithmetic.

A (0,1)-matrix M with at most two ones per row acts on X in A^d by
phi_i(X) = X_{i1} + X_{i2}.  Its blinded version Psi = lambda^{-1} o phi o lambda,
with lambda_i(X) = sigma_{-i}(delta^{sigma_i} X), is evaluated publicly from
the addition descent m-hat and the matrices Omega_{a,b}.

Points of the descent are tuples over K.  Elements of the group generated by
them are kept as formal sums {affine point: multiplicity mod l} because a sum
may leave the affine site; ``G2Engine`` does the public arithmetic on them.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .curve_jacobian import SiteViolation, elliptic_add, jacobian_add, ReducedDivisor
from .descent_core import lambda_components, lift_conjugates
from .field_tower import make_rng


# --- matrices --------------------------------------------------------------

@dataclass
class BlindMatrix:
    rows: list
    d: int
    ell: int

    def __post_init__(self):
        self.rows = [tuple(r) for r in self.rows]
        for r in self.rows:
            if len(r) == 2 and r[0] >= r[1]:
                raise ValueError("weight-2 rows need i1 < i2")
        self.index_classes = {}
        for i, r in enumerate(self.rows):
            a = (i - r[0]) % self.d
            b = (i - r[1]) % self.d if len(r) == 2 else a
            self.index_classes.setdefault((a, b), []).append(i)
        self.e_set = sorted(self.index_classes)

    @property
    def matrix(self):
        M = np.zeros((self.d, self.d), dtype=np.int64)
        for i, r in enumerate(self.rows):
            for c in r:
                M[i, c] = 1
        return M

    def spread(self):
        return min(len(v) for v in self.index_classes.values())

    def to_dict(self):
        return {"rows": [list(r) for r in self.rows], "d": self.d, "ell": self.ell}

    @classmethod
    def from_dict(cls, data):
        return cls([tuple(r) for r in data["rows"]], data["d"], data["ell"])


def _rank_mod(rows, p):
    M = [list(map(int, r)) for r in rows]
    rank = 0
    cols = len(M[0]) if M else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(M)) if M[i][c] % p), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], p - 2, p)
        M[rank] = [x * inv % p for x in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][c] % p:
                f = M[i][c]
                M[i] = [(x - f * y) % p for x, y in zip(M[i], M[rank])]
        rank += 1
    return rank


def span_rank(matrices, d, ell):
    vecs = [np.eye(d, dtype=np.int64).reshape(-1)] + [m.matrix.reshape(-1) for m in matrices]
    return _rank_mod(vecs, ell)


def generate_blind_matrices(d, ell, N, seed=0, spread_target=2, budget=500):
    """N matrices with {I, M_1..M_N} spanning Mat_d(F_l).

    Rows have weight 1 or 2.  For d >= 4 every index class is asked to have
    at least ``spread_target`` rows; when that is not reached in budget the
    constraint is dropped with a warning.
    """
    if N < d * d - 1:
        raise ValueError("at least d^2 - 1 matrices are needed to span")
    rng = make_rng(("matrices", seed))
    want_spread = d >= 4
    for attempt in range(budget):
        mats = []
        for _ in range(N):
            for _ in range(2000):
                rows = []
                for _ in range(d):
                    if d > 1 and rng.random() < 0.6:
                        rows.append(tuple(sorted(rng.sample(range(d), 2))))
                    else:
                        rows.append((rng.randrange(d),))
                M = BlindMatrix(rows, d, ell)
                if not want_spread or M.spread() >= spread_target:
                    break
            mats.append(M)
        spread_ok = not want_spread or all(M.spread() >= spread_target for M in mats)
        if spread_ok and span_rank(mats, d, ell) == d * d:
            return mats
        if attempt == budget // 2 and want_spread:
            want_spread = False
            warnings.warn("index-class spread target waived", RuntimeWarning)
    raise RuntimeError("span of Mat_d(F_l) unreachable within budget")


def _add_points(model, P, Q):
    if isinstance(P, ReducedDivisor):
        return jacobian_add(P, Q, model)[0]
    return elliptic_add(P, Q, model)


def phi_of_matrix(M, X, model, add=None):
    """Coordinate i is X_{i1} + X_{i2} (or X_{i1} for weight-1 rows)."""
    add = add or (lambda P, Q: _add_points(model, P, Q))
    out = []
    for r in M.rows:
        P = X[r[0]]
        if len(r) == 2:
            P = add(P, X[r[1]])
        out.append(P)
    return out


# --- Psi -----------------------------------------------------------------

@dataclass
class PsiSpec:
    """Public data of one blinded map: E_M and Omega_{a,b} (K matrices, rows r, columns j)."""

    e_set: list
    omegas: dict
    d: int
    mhat_ref: str = "mhat"
    meta: dict = field(default_factory=dict)

    def to_dict(self, F):
        return {"e_set": [list(k) for k in self.e_set], "d": self.d, "mhat_ref": self.mhat_ref,
                "omegas": [[list(k), [[F.coords(v) for v in row] for row in self.omegas[k]]] for k in self.e_set]}

    @classmethod
    def from_dict(cls, data, F):
        omegas = {tuple(k): [[F.from_coords(v) for v in row] for row in mat] for k, mat in data["omegas"]}
        return cls([tuple(k) for k in data["e_set"]], omegas, data["d"], data.get("mhat_ref", "mhat"))


def make_psi(ctx, M, mhat_ref="mhat"):
    """Omega_{a,b} = W^I Gamma_I for each index class I (trusted)."""
    F = ctx.tower
    d = ctx.d
    W, G = ctx.w, ctx.gamma
    omegas = {}
    for key, idx in M.index_classes.items():
        omegas[key] = [[F.sum(F.mul(W[r][i], G[i][j]) for i in idx) for j in range(d)] for r in range(d)]
    return PsiSpec(list(M.e_set), omegas, d, mhat_ref)


def frob_point(F, X, a):
    return tuple(F.frob(x, a) for x in X)


def eval_psi_public(spec, X, mhat, F, nblocks=3):
    """Psi(X) from E_M, Omega and m-hat; SiteViolation when m-hat is undefined there."""
    d = spec.d
    out = [0] * (nblocks * d)
    for a, b in spec.e_set:
        Xa = frob_point(F, X, a)
        if a == b:
            Y = list(Xa)
        else:
            Y = mhat.evaluate(F, list(Xa) + list(frob_point(F, X, b)))
        Om = spec.omegas[(a, b)]
        for c in range(nblocks):
            blk = Y[c * d:(c + 1) * d]
            for r in range(d):
                s = F.sum(F.mul(y, w) for y, w in zip(blk, Om[r]))
                out[c * d + r] = F.add(out[c * d + r], s)
    return tuple(out)


def eval_psi_trusted(ctx, M, X, shield):
    """lambda^{-1}(phi_M(lambda X)) through the curve group law (trusted)."""
    F = ctx.tower
    comps = [tuple(c) for c in lambda_components(ctx, list(X))]
    Z = phi_of_matrix(M, comps, None, add=shield.add)
    if any(z is None for z in Z):
        raise SiteViolation("image leaves the affine site")
    return tuple(lift_conjugates(ctx, [[F.frob(c, i) for c in Z[i]] for i in range(ctx.d)]))


def torsion_coordinates(model, alpha, beta, ell, P):
    """(x, y) mod l with P = x*alpha + y*beta on the elliptic model (brute force)."""
    from .curve_jacobian import elliptic_mul
    for x in range(ell):
        for y in range(ell):
            if elliptic_add(elliptic_mul(alpha, x, model), elliptic_mul(beta, y, model), model) == P:
                return x, y
    raise ValueError("point is not in the span of the torsion basis")


def eval_psi_matrix(ctx, M, X, shield, alpha, beta, ell):
    """Psi via coordinate vectors over F_l: lambda, then M as a linear map, then back."""
    from .curve_jacobian import elliptic_mul
    F = ctx.tower
    model = shield.model
    comps = [shield.from_e2(tuple(c)) for c in lambda_components(ctx, list(X))]
    coords = np.array([torsion_coordinates(model, alpha, beta, ell, P) for P in comps], dtype=np.int64)
    new = (M.matrix @ coords) % ell
    Z = [elliptic_add(elliptic_mul(alpha, int(x), model), elliptic_mul(beta, int(y), model), model) for x, y in new]
    if any(z is None for z in Z):
        raise SiteViolation("image leaves the affine site")
    Z = [shield.to_e2(z) for z in Z]
    return tuple(lift_conjugates(ctx, [[F.frob(c, i) for c in Z[i]] for i in range(ctx.d)]))


def eval_psi(spec_or_ctx, X, path="public", **kw):
    """Dispatch to the public, trusted or matrix path."""
    if path == "public":
        return eval_psi_public(spec_or_ctx, X, kw["mhat"], kw["F"])
    if path == "trusted":
        return eval_psi_trusted(spec_or_ctx, kw["M"], X, kw["shield"])
    if path == "matrix":
        return eval_psi_matrix(spec_or_ctx, kw["M"], X, kw["shield"], kw["alpha"], kw["beta"], kw["ell"])
    raise ValueError(f"unknown path {path!r}")


# --- formal sums and the public G2 engine ----------------------------------

class FormalSum:
    """sum of affine descent points with multiplicities mod l."""

    __slots__ = ("ell", "terms")

    def __init__(self, ell, terms=None):
        self.ell = ell
        self.terms = {}
        for k, v in (terms or {}).items():
            v %= ell
            if v:
                self.terms[tuple(k)] = v

    @classmethod
    def point(cls, ell, X, mult=1):
        return cls(ell, {tuple(X): mult})

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = (out.get(k, 0) + v) % self.ell
        return FormalSum(self.ell, out)

    def scale(self, c):
        return FormalSum(self.ell, {k: v * c for k, v in self.terms.items()})

    def items(self):
        return sorted(self.terms.items())

    def is_formally_zero(self):
        return not self.terms

    def __repr__(self):
        return f"FormalSum({len(self.terms)} points)"


class G2Engine:
    """Public arithmetic on the descent: m-hat additions, Psi maps and lambda of algebra words."""

    def __init__(self, F, ell, mhat, tauhat, psis, helpers, depth=4):
        self.F = F
        self.ell = ell
        self.mhat = mhat
        self.tauhat = tauhat
        self.psis = psis
        self.helpers = [tuple(h) for h in helpers]
        self.depth = depth
        self._add = {}
        self._dbl = {}
        self._psi = {}

    # -- group operations on affine points (may raise SiteViolation) --
    def add(self, X, Y):
        key = (X, Y) if X <= Y else (Y, X)
        if key not in self._add:
            try:
                self._add[key] = tuple(self.mhat.evaluate(self.F, list(X) + list(Y)))
            except SiteViolation:
                self._add[key] = None
        if self._add[key] is None:
            raise SiteViolation("addition off the principal site")
        return self._add[key]

    def double(self, X):
        if X not in self._dbl:
            try:
                self._dbl[X] = tuple(self.tauhat.evaluate(self.F, list(X)))
            except SiteViolation:
                self._dbl[X] = None
        if self._dbl[X] is None:
            raise SiteViolation("doubling off the principal site")
        return self._dbl[X]

    def mul(self, X, k):
        """k*X for 1 <= k < l by double-and-add (affine throughout, else SiteViolation)."""
        k %= self.ell
        if k == 0:
            raise SiteViolation("zero multiple")
        acc = None
        base = X
        while k:
            if k & 1:
                acc = base if acc is None else self.add(acc, base)
            k >>= 1
            if k:
                base = self.double(base)
        return acc

    def neg(self, X):
        return self.mul(X, self.ell - 1)

    def _grow_helpers(self, X):
        if X not in self.helpers and len(self.helpers) < 256:
            self.helpers.append(X)

    # -- Psi with splitting --
    def psi_point(self, idx, X, depth=0):
        key = (idx, X)
        if key in self._psi:
            return self._psi[key]
        res = None
        try:
            Y = eval_psi_public(self.psis[idx], X, self.mhat, self.F)
            res = FormalSum.point(self.ell, Y)
            self._grow_helpers(Y)
        except SiteViolation:
            if depth >= self.depth:
                raise
            for H in list(self.helpers):
                if H == X:
                    continue
                try:
                    XH = self.add(X, H)
                    nH = self.neg(H)
                    res = self.psi_point(idx, XH, depth + 1) + self.psi_point(idx, nH, depth + 1)
                    break
                except SiteViolation:
                    continue
            if res is None:
                raise SiteViolation("no helper split succeeded")
        self._psi[key] = res
        return res

    def psi(self, idx, S):
        out = FormalSum(self.ell)
        for X, c in S.items():
            out = out + self.psi_point(idx, X).scale(c)
        return out

    def apply_word(self, word, S, memo):
        """lambda(z_{w0} ... z_{wk}) S with the suffix images memoised in ``memo``."""
        word = tuple(word)
        if word in memo:
            return memo[word]
        if not word:
            return S
        res = self.psi(word[0], self.apply_word(word[1:], S, memo))
        memo[word] = res
        return res

    def lambda_map(self, f, S):
        """lambda(f) applied to a formal sum; f is an AlgebraElement (word -> coefficient)."""
        memo = {}
        out = FormalSum(self.ell)
        for word, c in f.items():
            out = out + self.apply_word(word, S, memo).scale(c)
        return out

    # -- zero test --
    def _expand(self, S):
        pts = []
        for X, c in S.items():
            pts.extend([X] * c)
        return pts

    def is_zero(self, S, budget=64):
        """True iff the formal sum is the zero element; sums with a helper offset H0.

        The order of summation is free, so each step takes any queued point
        that adds to the accumulator on the principal site and splits a point
        with a helper only when none does.
        """
        pts = self._expand(S)
        if not pts:
            return True
        rng = make_rng(("zero", len(pts)))
        starts = list(self.helpers)
        rng.shuffle(starts)
        for H0 in starts[:budget]:
            queue = list(pts)
            acc = H0
            splits = 0
            while queue:
                for k in range(len(queue) - 1, -1, -1):
                    try:
                        acc = self.add(acc, queue[k])
                    except SiteViolation:
                        continue
                    queue.pop(k)
                    break
                else:
                    if splits > 4 * len(pts) + 16 or not self._split_into(queue, rng):
                        break
                    splits += 1
            if not queue:
                return acc == H0
        raise SiteViolation("zero test could not stay on the principal site")

    def _split_into(self, queue, rng):
        """Replace one queued X by X + H and -H for some helper H."""
        k = rng.randrange(len(queue))
        X = queue[k]
        helpers = list(self.helpers)
        rng.shuffle(helpers)
        for H in helpers:
            if H == X:
                continue
            try:
                XH = self.add(X, H)
                nH = self.neg(H)
            except SiteViolation:
                continue
            queue[k:k + 1] = [XH, nH]
            return True
        return False

__all__ = [
    "BlindMatrix", "PsiSpec", "FormalSum", "G2Engine", "generate_blind_matrices", "span_rank", "phi_of_matrix",
    "make_psi", "eval_psi", "eval_psi_public", "eval_psi_trusted", "eval_psi_matrix", "torsion_coordinates",
    "frob_point",
]
