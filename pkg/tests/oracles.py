"""Brute-force oracles used to freeze expected values.

Everything here is deliberately naive and independent of the package's
Cantor and Miller code: functions are found by linear algebra on power series.
"""

from weilmap.field_tower import nullspace


def affine_add(F, f, P, Q):
    """Chord-tangent addition on y^2 = f(x), f = [b, a, 0, 1]; None is the identity."""
    if P is None:
        return Q
    if Q is None:
        return P
    (x1, y1), (x2, y2) = P, Q
    if x1 == x2 and F.add(y1, y2) == 0:
        return None
    if P == Q:
        lam = F.div(F.add(F.mul(F.scalar(3), F.mul(x1, x1)), f[1]), F.mul(F.scalar(2), y1))
    else:
        lam = F.div(F.sub(y2, y1), F.sub(x2, x1))
    x3 = F.sub(F.sub(F.mul(lam, lam), x1), x2)
    y3 = F.sub(F.mul(lam, F.sub(x1, x3)), y1)
    return (x3, y3)


def affine_neg(F, P):
    return None if P is None else (P[0], F.neg(P[1]))


def affine_mul(F, f, P, n):
    R = None
    for _ in range(n):
        R = affine_add(F, f, R, P)
    return R


def _taylor_shift(F, poly, x0):
    # coefficients of poly(x0 + t)
    out = [0] * len(poly)
    pw = [1]
    for k, c in enumerate(poly):
        for i, v in enumerate(pw):
            out[i] = F.add(out[i], F.mul(c, v))
        nxt = [0] * (len(pw) + 1)
        for i, v in enumerate(pw):
            nxt[i + 1] = F.add(nxt[i + 1], v)
            nxt[i] = F.add(nxt[i], F.mul(v, x0))
        pw = nxt
    return out


def _series_mul(F, a, b, n):
    out = [0] * n
    for i in range(min(n, len(a))):
        if a[i] == 0:
            continue
        for j in range(min(n - i, len(b))):
            out[i + j] = F.add(out[i + j], F.mul(a[i], b[j]))
    return out


def torsion_function(F, f, P, ell):
    """Coefficients {(i, j): c} of F_P in L(ell*inf) vanishing to order ell at P."""
    x0, y0 = P
    if y0 == 0:
        raise ValueError("uniformizer x - x0 fails at a 2-torsion point")
    g = _taylor_shift(F, f, x0) + [0] * ell
    ys = [y0]
    for n in range(1, ell):
        acc = g[n]
        for i in range(1, n):
            acc = F.sub(acc, F.mul(ys[i], ys[n - i]))
        ys.append(F.div(acc, F.mul(F.scalar(2), y0)))
    monos = [(i, j) for j in (0, 1) for i in range(ell) if 2 * i + 3 * j <= ell]
    xs = [x0, 1]
    cols = []
    for i, j in monos:
        s = [1]
        for _ in range(i):
            s = _series_mul(F, s, xs, ell)
        if j:
            s = _series_mul(F, s, ys, ell)
        s = (s + [0] * ell)[:ell]
        cols.append(s)
    mat = [[cols[c][r] for c in range(len(monos))] for r in range(ell)]
    ker = nullspace(F, mat)
    if len(ker) != 1:
        raise ValueError("point is not l-torsion or kernel is degenerate")
    return dict(zip(monos, ker[0]))


def eval_function(F, coeffs, X):
    x, y = X
    val = 0
    for (i, j), c in coeffs.items():
        val = F.add(val, F.mul(c, F.mul(F.pow(x, i), F.pow(y, j))))
    return val


def definitional_pairing(F, f, P, Q, ell, points, rng):
    """e(P, Q) = F_P(D_Q) / F_Q(D_P) with divisors translated away from the supports."""
    if P is None or Q is None:
        return 1
    FP = torsion_function(F, f, P, ell)
    FQ = torsion_function(F, f, Q, ell)
    for _ in range(500):
        R = points[rng.randrange(len(points))]
        S = points[rng.randrange(len(points))]
        args = [
            affine_add(F, f, Q, affine_add(F, f, S, affine_neg(F, R))),
            affine_add(F, f, S, affine_neg(F, R)),
            affine_add(F, f, P, affine_add(F, f, R, affine_neg(F, S))),
            affine_add(F, f, R, affine_neg(F, S)),
        ]
        if any(a is None for a in args):
            continue
        vals = [eval_function(F, FP, args[0]), eval_function(F, FP, args[1]),
                eval_function(F, FQ, args[2]), eval_function(F, FQ, args[3])]
        if 0 in vals:
            continue
        return F.div(F.div(vals[0], vals[1]), F.div(vals[2], vals[3]))
    raise RuntimeError("no admissible translation found")
