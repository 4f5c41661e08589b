"""The free algebra over F_l on z_0..z_{N-1}, quadratic relations, sparse ideal elements, encodings.

Words are tuples of generator indices; the empty tuple is 1.  omega sends
z_i to the i-th blinding matrix and is the trapdoor; the public side only
sees the relations and the Psi bundle.
"""

import math

import numpy as np

from .field_tower import make_rng


class DegreeCapExceeded(ValueError):
    pass


class NotInU1(ValueError):
    """omega(g) is not a scalar matrix."""


class AlgebraElement:
    __slots__ = ("ell", "terms")

    def __init__(self, ell, terms=None):
        self.ell = ell
        self.terms = {}
        for w, c in (terms or {}).items():
            c %= ell
            if c:
                self.terms[tuple(w)] = c

    @classmethod
    def scalar(cls, ell, a):
        return cls(ell, {(): a})

    @classmethod
    def word(cls, ell, w, c=1):
        return cls(ell, {tuple(w): c})

    @property
    def degree(self):
        return max((len(w) for w in self.terms), default=0)

    def support(self):
        return set(self.terms)

    def support_of_degree(self, k):
        return {w for w in self.terms if len(w) == k}

    def items(self):
        return sorted(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def __add__(self, other):
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = (out.get(w, 0) + c) % self.ell
        return AlgebraElement(self.ell, out)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return AlgebraElement(self.ell, {w: v * c for w, v in self.terms.items()})

    def __mul__(self, other):
        out = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                out[w] = (out.get(w, 0) + c1 * c2) % self.ell
        return AlgebraElement(self.ell, out)

    def sandwich(self, m1, m2, c=1):
        """c * m1 * self * m2 for words m1, m2."""
        return AlgebraElement(self.ell, {tuple(m1) + w + tuple(m2): v * c for w, v in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, AlgebraElement) and self.ell == other.ell and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items())))

    def __repr__(self):
        return f"AlgebraElement({len(self.terms)} terms, degree {self.degree})"

    def to_list(self):
        return [[list(w), c] for w, c in self.items()]

    @classmethod
    def from_list(cls, ell, data):
        return cls(ell, {tuple(w): c for w, c in data})


def _mats(matrices):
    return [np.asarray(getattr(M, "matrix", M), dtype=np.int64) for M in matrices]


def omega(f, matrices, ell=None):
    """sum_w c_w M_{w_0} M_{w_1} ... mod l, with shared prefixes computed once."""
    mats = _mats(matrices)
    ell = ell or f.ell
    d = mats[0].shape[0]
    cache = {(): np.eye(d, dtype=np.int64)}

    def prod(w):
        if w not in cache:
            cache[w] = prod(w[:-1]) @ mats[w[-1]] % ell
        return cache[w]

    out = np.zeros((d, d), dtype=np.int64)
    for w, c in f.terms.items():
        out = (out + c * prod(w)) % ell
    return out


# --- relations -----------------------------------------------------------

def _solve_mod(A, b, p, rng):
    """A random solution of A x = b over F_p (A: m x n), or None."""
    A = [list(map(int, r)) + [int(v)] for r, v in zip(A, b)]
    m, n = len(A), len(A[0]) - 1
    piv = []
    row = 0
    for c in range(n):
        r = next((i for i in range(row, m) if A[i][c] % p), None)
        if r is None:
            continue
        A[row], A[r] = A[r], A[row]
        inv = pow(A[row][c], p - 2, p)
        A[row] = [x * inv % p for x in A[row]]
        for i in range(m):
            if i != row and A[i][c] % p:
                f = A[i][c]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], A[row])]
        piv.append(c)
        row += 1
    if any(A[i][n] % p for i in range(row, m)):
        return None
    free = [c for c in range(n) if c not in piv]
    x = [0] * n
    for c in free:
        x[c] = rng.randrange(p)
    for i, c in enumerate(piv):
        x[c] = (A[i][n] - sum(A[i][f] * x[f] for f in free)) % p
    return x


class RelationSet:
    def __init__(self, relations, N, ell):
        self.relations = list(relations)
        self.N = N
        self.ell = ell

    def __len__(self):
        return len(self.relations)

    def __iter__(self):
        return iter(self.relations)

    def __getitem__(self, k):
        return self.relations[k]

    def linear_support(self, k):
        return {w[0] for w in self.relations[k].support_of_degree(1)}

    def density(self):
        """Mean fraction of generators present in the degree-1 part."""
        if not self.relations:
            return 0.0
        return sum(len(self.linear_support(k)) for k in range(len(self))) / (len(self) * self.N)

    def to_dict(self):
        return {"N": self.N, "ell": self.ell, "relations": [r.to_list() for r in self.relations]}

    @classmethod
    def from_dict(cls, data):
        ell = data["ell"]
        return cls([AlgebraElement.from_list(ell, r) for r in data["relations"]], data["N"], ell)


def generate_relations(matrices, count, seed=0, ell=None, quad_terms=None):
    """count relations sum a_ij z_i z_j - sum b_i z_i - b_0 vanishing under omega.

    quad_terms=None draws every a_ij; an integer keeps that many random
    nonzero a_ij, which keeps encodings sparse.
    """
    mats = _mats(matrices)
    ell = ell or matrices[0].ell
    N = len(mats)
    d = mats[0].shape[0]
    rng = make_rng(("relations", seed))
    basis = [np.eye(d, dtype=np.int64).reshape(-1)] + [M.reshape(-1) for M in mats]
    A = np.array(basis).T
    pairs = [(i, j) for i in range(N) for j in range(N)]
    out = []
    for _ in range(count):
        if quad_terms is None:
            chosen = pairs
        else:
            chosen = rng.sample(pairs, min(quad_terms, len(pairs)))
        a = {(i, j): rng.randrange(1, ell) if quad_terms is not None else rng.randrange(ell) for i, j in chosen}
        M = np.zeros((d, d), dtype=np.int64)
        for (i, j), c in a.items():
            M = (M + c * (mats[i] @ mats[j])) % ell
        b = _solve_mod(A, M.reshape(-1), ell, rng)
        if b is None:
            raise ArithmeticError("relation solve failed: {I, M_i} does not span")
        terms = {(i, j): c for (i, j), c in a.items()}
        terms[()] = -b[0]
        for i in range(N):
            terms[(i,)] = (terms.get((i,), 0) - b[i + 1]) % ell
        out.append(AlgebraElement(ell, terms))
    return RelationSet(out, N, ell)


# --- sparse elements of J_N ------------------------------------------------

def _random_word(rng, N, length):
    return tuple(rng.randrange(N) for _ in range(length))


def _split_word(rng, N, total):
    k = rng.randrange(total + 1)
    return _random_word(rng, N, k), _random_word(rng, N, total - k)


class SparseChain:
    """The levels f_1..f_{N-1} of a sparse ideal element and their statistics."""

    def __init__(self, levels, N):
        self.levels = levels
        self.N = N

    @property
    def element(self):
        out = self.levels[0]
        for f in self.levels[1:]:
            out = out + f
        return out

    def overlaps(self):
        return [len(a.support() & b.support()) for a, b in zip(self.levels, self.levels[1:])]


def sparse_chain(R, N=None, seed=0, c=0.5, literal=False, budget=50):
    """Build f = f_1 + ... + f_{N-1} in J_N level by level.

    Level i multiplies relations by words m1, m2 with deg m1 m2 = i - 1 and adds
    targeted terms g_t = m1 R m2 for ceil(N^c) degree-i terms t of f_{i-1}, so
    consecutive levels overlap.  literal=True uses N dense combinations of all
    relations per level; the default uses one scaled relation per product,
    which is what keeps the support within 8 N^2.
    """
    ell = R.ell
    N = N or R.N
    n_gen = R.N
    rng = make_rng(("sparse", seed))
    target = math.ceil(N ** c)

    def combo():
        if literal:
            out = AlgebraElement(ell)
            for rel in R:
                out = out + rel.scale(rng.randrange(ell))
            return out
        return R[rng.randrange(len(R))].scale(rng.randrange(1, ell))

    if literal:
        f1 = AlgebraElement(ell)
        for rel in R:
            f1 = f1 + rel.scale(rng.randrange(ell))
    else:
        f1 = AlgebraElement(ell)
        for k in rng.sample(range(len(R)), min(target, len(R))):
            f1 = f1 + R[k].scale(rng.randrange(1, ell))
    levels = [f1]
    for i in range(2, N):
        prev = levels[-1]
        for _ in range(budget):
            pool = [combo() for _ in range(n_gen if literal else max(target, 1))]
            fi = AlgebraElement(ell)
            for rel in (pool if literal else pool[:1]):
                m1, m2 = _split_word(rng, n_gen, i - 1)
                fi = fi + rel.sandwich(m1, m2, rng.randrange(1, ell) if not literal else rng.randrange(ell))
            terms = sorted(prev.support_of_degree(i))
            rng.shuffle(terms)
            hits = 0
            for t in terms:
                if hits >= target:
                    break
                choices = [(rel, pos) for rel in pool for pos in range(len(t))
                           if t[pos] in {w[0] for w in rel.support_of_degree(1)}]
                if not choices:
                    continue
                rel, pos = choices[rng.randrange(len(choices))]
                fi = fi + rel.sandwich(t[:pos], t[pos + 1:], rng.randrange(1, ell))
                hits += 1
            if len(prev.support() & fi.support()) >= min(target, len(prev.support_of_degree(i))):
                break
        else:
            raise RuntimeError(f"overlap targeting failed at level {i}")
        levels.append(fi)
    return SparseChain(levels, N)


def sparse_ideal_element(R, N=None, seed=0, c=0.5, literal=False, cap=8, budget=20):
    """A sparse f in J_N; redrawn until |supp f| <= cap * N^2 (cap=None disables)."""
    N = N or R.N
    for k in range(budget):
        f = sparse_chain(R, N, (seed, k), c, literal).element
        if f.degree > N:
            raise DegreeCapExceeded("construction left J_N")
        if cap is None or len(f) <= cap * N * N:
            return f
    raise RuntimeError(f"support stayed above {cap} N^2 after {budget} draws")


def encode(a, R, N=None, seed=0, **kw):
    """A sparse representative g = f + a of a + U."""
    return sparse_ideal_element(R, N, seed, **kw) + AlgebraElement.scalar(R.ell, a)


def trapdoor_dlog(g, matrices, ell=None):
    ell = ell or g.ell
    W = omega(g, matrices, ell)
    a = int(W[0, 0])
    if not np.array_equal(W, a * np.eye(W.shape[0], dtype=np.int64) % ell):
        raise NotInU1("omega(g) is not scalar")
    return a


def public_identity_test(g, engine, D_beta, cap=None):
    """g in U iff lambda(g) kills D_beta; runs entirely on public data."""
    from .blinding import FormalSum
    if cap is not None and g.degree > cap:
        raise DegreeCapExceeded(f"degree {g.degree} above {cap}")
    S = engine.lambda_map(g, FormalSum.point(engine.ell, D_beta))
    return engine.is_zero(S)


__all__ = [
    "AlgebraElement", "RelationSet", "SparseChain", "DegreeCapExceeded", "NotInU1", "omega", "generate_relations",
    "sparse_chain", "sparse_ideal_element", "encode", "trapdoor_dlog", "public_identity_test",
]
