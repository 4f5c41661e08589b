"""Finite field arithmetic for k = F_q and K = F_{q^d}.

Elements of K are plain ints: the base-q digits of an int are its coordinates
over the power basis 1, t, ..., t^{d-1}.  Multiplication goes through
exp/log tables and addition through Zech logarithms, so every scalar
operation is a handful of list lookups.  Elements of the prime field are the
ints 0..q-1, so matrices over k and over K share the same code.
"""

import random

import numpy as np


def make_rng(seed):
    if isinstance(seed, random.Random):
        return seed
    if isinstance(seed, (tuple, list)):
        # str seeds are hashed deterministically
        return random.Random(repr(tuple(seed)))
    return random.Random(seed)


def is_prime(n):
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def factorize(n):
    out = {}
    f = 2
    while f * f <= n:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


# --- dense polynomials over F_p, little-endian coefficient lists ---------

def _ptrim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, m, p):
    a = list(a)
    inv = pow(m[-1], p - 2, p)
    dm = len(m) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i] * inv % p
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * m[j]) % p
    return _ptrim(a[:dm] if len(a) > dm else a)


def _pmulmod(a, b, m, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _pmod(out, m, p)


def _ppowmod(a, e, m, p):
    result = [1]
    base = _pmod(a, m, p)
    while e:
        if e & 1:
            result = _pmulmod(result, base, m, p)
        base = _pmulmod(base, base, m, p)
        e >>= 1
    return result


def _pgcd(a, b, p):
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def is_irreducible(f, p):
    """Rabin's test for a monic f over F_p."""
    n = len(f) - 1
    if n <= 0:
        return False
    if n == 1:
        return True
    x = [0, 1]
    # f | x^{p^n} - x
    xp = x
    for _ in range(n):
        xp = _ppowmod(xp, p, f, p)
    if _ptrim([(c - d) % p for c, d in _zip_pad(xp, x)]):
        return False
    for r in factorize(n):
        xp = x
        for _ in range(n // r):
            xp = _ppowmod(xp, p, f, p)
        diff = _ptrim([(c - d) % p for c, d in _zip_pad(xp, x)])
        if len(_pgcd(f, diff, p)) != 1:
            return False
    return True


def _zip_pad(a, b):
    n = max(len(a), len(b))
    return zip(list(a) + [0] * (n - len(a)), list(b) + [0] * (n - len(b)))


class FieldTower:
    """K = F_q[t]/(modulus) with table-driven arithmetic."""

    def __init__(self, q, d, modulus):
        if not is_prime(q):
            raise ValueError(f"q={q} is not prime")
        if d < 1:
            raise ValueError("d must be positive")
        modulus = [c % q for c in modulus]
        if len(modulus) != d + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree d")
        if not is_irreducible(modulus, q):
            raise ValueError("modulus is reducible")
        self.q = q
        self.d = d
        self.modulus = tuple(modulus)
        self.order = q ** d
        self._build_tables()

    # -- construction ----------------------------------------------------

    def _poly_of(self, x):
        out = []
        for _ in range(self.d):
            out.append(x % self.q)
            x //= self.q
        return out

    def _int_of(self, coeffs):
        x = 0
        for c in reversed(list(coeffs) + [0] * (self.d - len(coeffs))):
            x = x * self.q + c
        return x

    def _build_tables(self):
        q, Q = self.q, self.order
        n = Q - 1
        primes = list(factorize(n)) if n > 1 else []
        m = list(self.modulus)
        gen = None
        for cand in range(1, Q):
            g = self._poly_of(cand)
            if all(_ptrim(_ppowmod(g, n // r, m, q)) != [1] for r in primes):
                gen = g
                break
        exp = [0] * (2 * n + 1)
        log = [-1] * Q
        cur = [1]
        for i in range(n):
            v = self._int_of(cur)
            exp[i] = v
            log[v] = i
            cur = _pmulmod(cur, gen, m, q) if n > 1 else [1]
        for i in range(n, 2 * n + 1):
            exp[i] = exp[i - n]
        self.exp = exp
        self.log = log
        self.generator = self._int_of(gen)
        self._n = n
        digits = np.zeros((Q, self.d), dtype=np.int64)
        vals = np.arange(Q)
        for j in range(self.d):
            digits[:, j] = vals % q
            vals = vals // q
        self.digits = digits
        self.weights = q ** np.arange(self.d, dtype=np.int64)
        neg = ((-digits) % q) @ self.weights
        self.neg_table = [int(v) for v in neg]
        # zech[i] = log(1 + g^i), or -1 when 1 + g^i = 0
        zech = [-1] * n
        one = digits[1]
        for i in range(n):
            s = int(((digits[exp[i]] + one) % q) @ self.weights)
            zech[i] = log[s]
        self.zech = zech
        self.np_exp = np.array(exp[:n], dtype=np.int64)
        self.np_log = np.array(log, dtype=np.int64)
        self.np_neg = np.array(self.neg_table, dtype=np.int64)

    # -- scalar arithmetic -----------------------------------------------

    def add(self, a, b):
        if a == 0:
            return b
        if b == 0:
            return a
        la, lb = self.log[a], self.log[b]
        z = self.zech[(lb - la) % self._n]
        if z < 0:
            return 0
        return self.exp[(la + z) % self._n]

    def neg(self, a):
        return self.neg_table[a]

    def sub(self, a, b):
        return self.add(a, self.neg_table[b])

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self.exp[(self.log[a] + self.log[b]) % self._n]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return self.exp[(-self.log[a]) % self._n]

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero")
        if a == 0:
            return 0
        return self.exp[(self.log[a] - self.log[b]) % self._n]

    def pow(self, a, e):
        if a == 0:
            if e == 0:
                return 1
            if e < 0:
                raise ZeroDivisionError("inverse of zero")
            return 0
        return self.exp[(self.log[a] * e) % self._n]

    def frob(self, a, i=1):
        """a^(q^i), i taken mod d."""
        if a == 0:
            return 0
        return self.exp[(self.log[a] * pow(self.q, i % self.d, self._n)) % self._n] if self._n > 1 else a

    def sqrt(self, a):
        """One square root of a, or None.  Assumes q odd."""
        if a == 0:
            return 0
        la = self.log[a]
        if la % 2:
            return None
        return self.exp[la // 2]

    def scalar(self, c):
        """Embed an integer of the prime field."""
        return c % self.q

    def sum(self, items):
        acc = 0
        for x in items:
            acc = self.add(acc, x)
        return acc

    def coords(self, a):
        return [int(v) for v in self.digits[a]]

    def from_coords(self, coords):
        x = 0
        for c in reversed(list(coords)):
            x = x * self.q + (c % self.q)
        return x

    def theta(self, j):
        return self.q ** j

    def in_prime_field(self, a):
        return a < self.q

    def min_poly_degree(self, a):
        """Size of the Frobenius orbit of a, i.e. [k(a):k]."""
        b, n = self.frob(a, 1), 1
        while b != a:
            b, n = self.frob(b, 1), n + 1
        return n

    def random_element(self, rng, nonzero=False):
        lo = 1 if nonzero else 0
        return rng.randrange(lo, self.order)

    def elements(self):
        return range(self.order)

    # -- vectorized arithmetic on int64 arrays --------------------------

    def vadd(self, a, b):
        s = (self.digits[a] + self.digits[b]) % self.q
        return s @ self.weights

    def vneg(self, a):
        return self.np_neg[a]

    def vmul(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.np_exp[(self.np_log[a] + self.np_log[b]) % self._n]
        return np.where((a == 0) | (b == 0), 0, out)

    def vsum(self, a, axis=0):
        s = self.digits[np.asarray(a, dtype=np.int64)].sum(axis=axis) % self.q
        return s @ self.weights

    def vfrob(self, a, i=1):
        a = np.asarray(a, dtype=np.int64)
        if self._n == 1:
            return a
        e = pow(self.q, i % self.d, self._n)
        out = self.np_exp[(self.np_log[a] * e) % self._n]
        return np.where(a == 0, 0, out)

    def to_dict(self):
        return {"q": self.q, "d": self.d, "modulus": list(self.modulus)}

    @classmethod
    def from_dict(cls, data):
        return cls(data["q"], data["d"], data["modulus"])

    def __eq__(self, other):
        return isinstance(other, FieldTower) and (self.q, self.d, self.modulus) == (other.q, other.d, other.modulus)

    def __hash__(self):
        return hash((self.q, self.d, self.modulus))

    def __repr__(self):
        return f"FieldTower(q={self.q}, d={self.d}, modulus={list(self.modulus)})"


_TOWER_CACHE = {}


def make_field_tower(q, d, seed=0):
    """Seeded search for an irreducible modulus of degree d over F_q."""
    if not is_prime(q):
        raise ValueError(f"q={q} is not prime")
    if q ** d > 2 * 10 ** 6:
        raise ValueError("field too large for table arithmetic")
    rng = make_rng(seed)
    for _ in range(10000):
        low = [rng.randrange(q) for _ in range(d)]
        if d > 1 and low[0] == 0:
            continue
        f = low + [1]
        if is_irreducible(f, q):
            key = (q, d, tuple(f))
            if key not in _TOWER_CACHE:
                _TOWER_CACHE[key] = FieldTower(q, d, f)
            return _TOWER_CACHE[key]
    raise RuntimeError("no irreducible polynomial found; check the generator")


def tower_from_modulus(q, modulus):
    key = (q, len(modulus) - 1, tuple(c % q for c in modulus))
    if key not in _TOWER_CACHE:
        _TOWER_CACHE[key] = FieldTower(q, len(modulus) - 1, modulus)
    return _TOWER_CACHE[key]


def frobenius(tower, x, i=1):
    return tower.frob(x, i)


# --- matrices over K (and over k, which sits inside K) -----------------

def mat_mul(F, A, B):
    n, m, p = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(p):
            acc = 0
            for t in range(m):
                acc = F.add(acc, F.mul(A[i][t], B[t][j]))
            row.append(acc)
        out.append(row)
    return out


def mat_vec(F, A, v):
    return [F.sum(F.mul(a, x) for a, x in zip(row, v)) for row in A]


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def transpose(A):
    return [list(r) for r in zip(*A)]


def row_reduce(F, A):
    """Reduced row echelon form; returns (R, pivot columns)."""
    R = [list(r) for r in A]
    rows = len(R)
    cols = len(R[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if R[i][c]:
                piv = i
                break
        if piv is None:
            continue
        R[r], R[piv] = R[piv], R[r]
        inv = F.inv(R[r][c])
        R[r] = [F.mul(inv, x) for x in R[r]]
        for i in range(rows):
            if i != r and R[i][c]:
                f = R[i][c]
                R[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return R, pivots


def mat_rank(F, A):
    if not A:
        return 0
    return len(row_reduce(F, A)[1])


def mat_inv(F, A):
    n = len(A)
    aug = [list(A[i]) + identity(n)[i] for i in range(n)]
    R, piv = row_reduce(F, aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in R]


def mat_det(F, A):
    M = [list(r) for r in A]
    n = len(M)
    det = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = F.neg(det)
        det = F.mul(det, M[c][c])
        inv = F.inv(M[c][c])
        for i in range(c + 1, n):
            if M[i][c]:
                f = F.mul(M[i][c], inv)
                M[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(M[i], M[c])]
    return det


def solve(F, A, b):
    """One solution x of A x = b, or None."""
    n = len(A[0])
    aug = [list(A[i]) + [b[i]] for i in range(len(A))]
    R, piv = row_reduce(F, aug)
    if n in piv:
        return None
    x = [0] * n
    for i, c in enumerate(piv):
        x[c] = R[i][n]
    return x


def nullspace(F, A, ncols=None):
    """Basis of {x : A x = 0}."""
    if not A:
        n = ncols or 0
        return [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    n = len(A[0])
    R, piv = row_reduce(F, A)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [0] * n
        v[f] = 1
        for i, c in enumerate(piv):
            v[c] = F.neg(R[i][f])
        basis.append(v)
    return basis


# --- descent bases ------------------------------------------------------

THETA = "theta"


class DescentBasis:
    """Basis u of K over k with the conjugate matrix Gamma and its inverse W.

    ``change`` is the k-matrix A with u_j = sum_i A[i][j] theta_i.
    """

    def __init__(self, tower, change):
        F = tower
        d = F.d
        self.tower = tower
        self.change = [[c % F.q for c in row] for row in change]
        self.change_inv = mat_inv(F, self.change)
        self.u = [F.from_coords([self.change[i][j] for i in range(d)]) for j in range(d)]
        self.gamma = [[F.frob(uj, i) for uj in self.u] for i in range(d)]
        self.w = mat_inv(F, self.gamma)
        # log of u_j, used by the vectorized expansions
        self.log_u = [F.log[x] for x in self.u]

    @property
    def d(self):
        return self.tower.d

    def conj(self, i):
        """The row u^{sigma_i}."""
        return self.gamma[i % self.d]

    def coords_of(self, x):
        """Coordinates of x in basis u."""
        th = self.tower.coords(x)
        return mat_vec(self.tower, self.change_inv, th)

    def element(self, coords):
        F = self.tower
        return F.sum(F.mul(c % F.q, u) for c, u in zip(coords, self.u))

    def to_dict(self):
        return {"change": self.change}

    @classmethod
    def from_dict(cls, tower, data):
        return cls(tower, data["change"])


def random_descent_basis(tower, seed=0):
    rng = make_rng(seed)
    d = tower.d
    while True:
        A = [[rng.randrange(tower.q) for _ in range(d)] for _ in range(d)]
        if mat_det(tower, A):
            return DescentBasis(tower, A)


def basis_from_elements(tower, elements):
    A = [[tower.coords(e)[i] for e in elements] for i in range(tower.d)]
    return DescentBasis(tower, A)


def basis_convert(tower, x_coords, src, dst):
    """Re-express sum_j x_j src_j in basis dst.  Bases are DescentBasis or THETA."""
    if src is dst:
        return [c % tower.q for c in x_coords]
    if src == THETA:
        value = tower.from_coords(x_coords)
    else:
        value = src.element(x_coords)
    if dst == THETA:
        return tower.coords(value)
    return dst.coords_of(value)


def scalar_structure_matrix(tower, a, basis):
    """Gamma_a with a*u_i = sum_j gamma_ij u_j (rows are coordinates of a*u_i)."""
    if basis == THETA:
        elems = [tower.theta(j) for j in range(tower.d)]
        return [tower.coords(tower.mul(a, e)) for e in elems]
    return [basis.coords_of(tower.mul(a, ui)) for ui in basis.u]


# --- vectorized elimination over K ---------------------------------------

def np_row_reduce(F, M):
    """Reduced row echelon form of an int64 array over K; returns (R, pivot columns)."""
    R = np.array(M, dtype=np.int64, copy=True)
    if R.ndim != 2 or R.size == 0:
        return R, []
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        nz = np.nonzero(R[r:, c])[0]
        if len(nz) == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            R[[r, p]] = R[[p, r]]
        R[r] = F.vmul(R[r], F.inv(int(R[r, c])))
        fac = R[:, c].copy()
        fac[r] = 0
        hit = np.nonzero(fac)[0]
        if len(hit):
            R[hit] = F.vadd(R[hit], F.vneg(F.vmul(fac[hit, None], R[r][None, :])))
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return R, pivots


def np_rank(F, M):
    return len(np_row_reduce(F, M)[1])


def np_nullspace(F, M, ncols=None):
    """Basis (rows of an array) of {x : M x = 0} over K."""
    M = np.asarray(M, dtype=np.int64)
    if M.size == 0:
        n = ncols if ncols is not None else (M.shape[1] if M.ndim == 2 else 0)
        return np.eye(n, dtype=np.int64)
    n = M.shape[1]
    R, piv = np_row_reduce(F, M)
    free = [c for c in range(n) if c not in set(piv)]
    out = np.zeros((len(free), n), dtype=np.int64)
    for k, f in enumerate(free):
        out[k, f] = 1
        for i, c in enumerate(piv):
            out[k, c] = F.neg(int(R[i, f]))
    return out
