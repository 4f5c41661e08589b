"""The l-torsion pairing by Weil reciprocity, parameter search, and the blinded pairing."""

from dataclasses import dataclass

from .curve_jacobian import (
    CurveModel,
    ReducedDivisor,
    SupportCollision,
    divisor_is_valid,
    evaluate_function,
    jacobian_add,
    jacobian_mul,
    pdeg,
    ptrim,
)
from .field_tower import is_prime, make_field_tower, make_rng


@dataclass
class Parameters:
    q: int
    d: int
    ell: int
    genus: int
    model: CurveModel
    order: int

    @property
    def tower(self):
        return self.model.F

    @property
    def cofactor(self):
        n = self.order
        while n % self.ell == 0:
            n //= self.ell
        return n

    def to_dict(self):
        return {"q": self.q, "d": self.d, "ell": self.ell, "genus": self.genus, "order": self.order,
                "f": [self.tower.coords(c) for c in self.model.f], "modulus": list(self.tower.modulus)}


# --- enumeration -----------------------------------------------------------

def _divisors_of_degree(model, deg):
    F = model.F
    Q = F.order
    out = []
    for idx in range(Q ** deg):
        a = []
        v = idx
        for _ in range(deg):
            a.append(v % Q)
            v //= Q
        a.append(1)
        for jdx in range(Q ** deg):
            b = []
            v = jdx
            for _ in range(deg):
                b.append(v % Q)
                v //= Q
            D = ReducedDivisor(tuple(a), tuple(ptrim(b)))
            if divisor_is_valid(model, D):
                out.append(D)
    return out


def enumerate_jacobian(model):
    """Every reduced divisor over K (exhaustive; desk scale only)."""
    F = model.F
    out = [ReducedDivisor.zero()]
    out += [ReducedDivisor.from_point(F, P) for P in model.points()]
    for deg in range(2, model.genus + 1):
        out += _divisors_of_degree(model, deg)
    return out


def jacobian_order(model):
    if model.genus == 1:
        return model.count_points()
    return len(enumerate_jacobian(model))


def _full_torsion(model, ell):
    if model.genus == 1:
        count = 1 + sum(1 for P in model.points() if jacobian_mul(ReducedDivisor.from_point(model.F, P), ell, model).is_zero())
        return count == ell * ell
    count = sum(1 for D in enumerate_jacobian(model) if jacobian_mul(D, ell, model).is_zero())
    return count >= ell * ell


def find_parameters(q_range, d_range, genus=1, seed=0, ell_filter=None):
    """Smallest admissible (q, d, curve, ell) in the given ranges.

    ell must be an odd prime different from q with ell | q^d - 1, ell^2 | #J(K)
    and ell^2 rational l-torsion points.
    """
    for q in q_range:
        if not is_prime(q) or q in (2, 3):
            continue
        for d in d_range:
            if (q ** d) ** genus > 5000 and genus > 1:
                continue
            F = make_field_tower(q, d, seed)
            for coeffs in _curve_candidates(q, genus):
                try:
                    model = CurveModel(F, coeffs)
                except ValueError:
                    continue
                order = jacobian_order(model)
                for ell in range(3, q ** d):
                    if not is_prime(ell) or ell == q:
                        continue
                    if ell_filter is not None and not ell_filter(ell):
                        continue
                    if (q ** d - 1) % ell or order % (ell * ell):
                        continue
                    if _full_torsion(model, ell):
                        return Parameters(q, d, ell, genus, model, order)
    raise ValueError("no admissible parameters in range")


def _curve_candidates(q, genus):
    if genus == 1:
        for a in range(q):
            for b in range(1, q):
                yield [b, a, 0, 1]
    else:
        deg = 2 * genus + 1
        for b in range(1, q):
            for a in range(q):
                f = [b, a] + [0] * (deg - 2) + [1]
                yield f


def reference_parameters():
    F = make_field_tower(5, 2, 0)
    model = CurveModel.elliptic(F, 0, 1)
    return Parameters(5, 2, 3, 1, model, model.count_points())


# --- torsion and the Miller accumulator ------------------------------------

def random_divisor(params, rng):
    model = params.model
    F = model.F
    if model.genus == 1:
        pts = model.points()
        return ReducedDivisor.from_point(F, pts[rng.randrange(len(pts))])
    D = ReducedDivisor.zero()
    pts = model.points()
    for _ in range(model.genus):
        D = jacobian_add(D, ReducedDivisor.from_point(F, pts[rng.randrange(len(pts))]), model)[0]
    return D


def random_torsion(params, rng, budget=200):
    model = params.model
    for _ in range(budget):
        T = jacobian_mul(random_divisor(params, rng), params.cofactor, model)
        if T.is_zero():
            continue
        while not jacobian_mul(T, params.ell, model).is_zero():
            T = jacobian_mul(T, params.ell, model)
        return T
    raise RuntimeError("no torsion element found; check the parameters")


def torsion_basis(params, seed=0, budget=200):
    """(alpha, beta) of l-torsion with e(alpha, beta) != 1."""
    rng = make_rng(seed)
    for _ in range(budget):
        alpha = random_torsion(params, rng)
        beta = random_torsion(params, rng)
        if weil_pairing(alpha, beta, params) != 1:
            return alpha, beta
    raise RuntimeError("torsion basis retry budget exhausted")


class MillerFunction:
    """f with (f) = l*D, kept as records with exponents (squaring trick)."""

    def __init__(self, D, ell, model):
        if not jacobian_mul(D, ell, model).is_zero():
            raise ValueError("divisor is not l-torsion")
        self.D = D
        self.ell = ell
        self.model = model
        parts = []
        cur = D
        for bit in bin(ell)[3:]:
            parts = [(rec, 2 * e) for rec, e in parts]
            cur, h = jacobian_add(cur, cur, model)
            parts.append((h, 1))
            if bit == "1":
                cur, h = jacobian_add(cur, D, model)
                parts.append((h, 1))
        if not cur.is_zero():
            raise AssertionError("Miller loop did not terminate at zero")
        self.parts = parts

    def evaluate(self, D2):
        F = self.model.F
        val = 1
        for rec, e in self.parts:
            val = F.mul(val, F.pow(evaluate_function(self.model, rec, D2), e))
        return val

    def infinity_coefficient(self):
        F = self.model.F
        val = 1
        for rec, e in self.parts:
            val = F.mul(val, F.pow(rec.infinity_coefficient(F, self.model.genus), e))
        return val

    def valuation_at_infinity(self):
        return sum(e * rec.valuation_at_infinity(self.model.genus) for rec, e in self.parts)


def miller_function(D, ell, model):
    return MillerFunction(D, ell, model)


def _pairing_once(D1, D2, ell, model):
    F = model.F
    f1 = MillerFunction(D1, ell, model)
    f2 = MillerFunction(D2, ell, model)
    r1, r2 = D1.degree, D2.degree
    num = f1.evaluate(D2)
    den = f2.evaluate(D1)
    val = F.div(num, den)
    val = F.mul(val, F.pow(f1.infinity_coefficient(), -r2))
    val = F.mul(val, F.pow(f2.infinity_coefficient(), r1))
    if (ell * r1 * r2) % 2:
        val = F.neg(val)
    return val


def weil_pairing(D1, D2, params, seed=0, budget=50):
    """e_l(D1, D2) with support collisions handled by shifting D2 by random torsion."""
    model = params.model
    ell = params.ell
    if D1.is_zero() or D2.is_zero() or D1 == D2:
        return 1
    try:
        return _pairing_once(D1, D2, ell, model)
    except SupportCollision:
        pass
    F = model.F
    rng = make_rng(seed)
    for _ in range(budget):
        R = random_torsion(params, rng)
        S = jacobian_add(D2, R, model)[0]
        try:
            a = _pairing_once(D1, S, ell, model) if not S.is_zero() and S != D1 else 1
            b = _pairing_once(D1, R, ell, model) if R != D1 else 1
        except SupportCollision:
            continue
        return F.div(a, b)
    raise RuntimeError("pairing collision retries exhausted")


def pairing_on_points(P, Q, params):
    F = params.tower
    return weil_pairing(ReducedDivisor.from_point(F, P), ReducedDivisor.from_point(F, Q), params)


def mu_order(F, z):
    k, v = 1, z
    while v != 1:
        v = F.mul(v, z)
        k += 1
    return k


# --- the pairing on two descents ------------------------------------------

def trusted_blinded_pairing(ctxA, ctxB, shield, a, b, params):
    """prod_i sigma_i e(lambda'_i a, lambda_i b) through the E model (trusted)."""
    from .descent_core import lambda_components
    F = params.tower
    la = lambda_components(ctxA, list(a))
    lb = lambda_components(ctxB, list(b))
    val = 1
    for i in range(ctxA.d):
        P = shield.from_e2(tuple(la[i]))
        Q = shield.from_e2(tuple(lb[i]))
        val = F.mul(val, F.frob(pairing_on_points(P, Q, params), i))
    return val


class PairingProgram:
    """Public pairing of a point of the first descent with a point of the second.

    For each conjugate i there are four mixed specifications: the numerator and
    denominator of the doubling function with arguments in both orders.  With
    l = 3 the pairing of P and Q is phi(P, Q) / phi(Q, P), so the product over
    conjugates of the ratios gives the blinded pairing.  A vanishing factor only
    happens for P = +-Q in some conjugate, where that factor is 1.
    """

    def __init__(self, parts, d, ell):
        self.parts = parts
        self.d = d
        self.ell = ell

    def evaluate(self, F, a, b):
        a, b = list(a), list(b)
        val = 1
        for i, (A_ab, B_ab, A_ba, B_ba) in enumerate(self.parts):
            num = F.mul(A_ab.evaluate(F, a, b), B_ba.evaluate(F, b, a))
            den = F.mul(B_ab.evaluate(F, a, b), A_ba.evaluate(F, b, a))
            if num == 0 or den == 0:
                continue
            val = F.mul(val, F.div(num, den))
        return val

    def tuples(self):
        return [t for part in self.parts for s in part for t in s.tuples()]

    def to_dict(self):
        return {"d": self.d, "ell": self.ell, "parts": [[s.to_dict() for s in part] for part in self.parts]}

    @classmethod
    def from_dict(cls, data, q):
        from .descent_spec import MixedSpecification
        parts = [tuple(MixedSpecification.from_dict(s, q) for s in part) for part in data["parts"]]
        return cls(parts, data["d"], data["ell"])


def publish_pairing_program(ctxA, ctxB, shield, ell, seed=0, rng=None):
    """Mixed specifications of the doubling function for every conjugate (l = 3 only)."""
    from .descent_spec import specify_mixed
    if ell != 3:
        raise NotImplementedError("the public pairing program is implemented for l = 3")
    F = ctxA.tower
    A, B = shield.build_maps(rng)["phi"]
    gens = [shield.R_eq]
    srng = make_rng(("pairing-scale", seed))
    parts = []
    for i in range(ctxA.d):
        s_ab = F.random_element(srng, nonzero=True)
        s_ba = F.random_element(srng, nonzero=True)
        parts.append((
            specify_mixed(ctxA, ctxB, A, i, (seed, "A", 0), gens, gens, a=s_ab, nx=3),
            specify_mixed(ctxA, ctxB, B, i, (seed, "B", 0), gens, gens, a=s_ab, nx=3),
            specify_mixed(ctxB, ctxA, A, i, (seed, "A", 1), gens, gens, a=s_ba, nx=3),
            specify_mixed(ctxB, ctxA, B, i, (seed, "B", 1), gens, gens, a=s_ba, nx=3),
        ))
    return PairingProgram(parts, ctxA.d, ell)


def blinded_pairing(ctxA, ctxB, a, b, params, path="public", shield=None, program=None):
    """e-hat(a, b) for a on the first descent and b on the second."""
    if path == "trusted":
        return trusted_blinded_pairing(ctxA, ctxB, shield, a, b, params)
    if path == "public":
        return program.evaluate(params.tower, a, b)
    raise ValueError(f"unknown path {path!r}")


__all__ = [
    "Parameters", "find_parameters", "reference_parameters", "torsion_basis", "random_torsion",
    "MillerFunction", "miller_function", "weil_pairing", "pairing_on_points", "enumerate_jacobian",
    "jacobian_order", "mu_order", "pdeg", "PairingProgram", "publish_pairing_program",
    "blinded_pairing", "trusted_blinded_pairing",
]
