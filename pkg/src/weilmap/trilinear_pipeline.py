"""Setup and evaluation of the trilinear map G1 x G2 x G3 -> mu_l, plus the published bundle.

G1 is generated by D'_alpha on the descent for u', G2 by D_beta on the
descent for u, and G3 = U1/U is the algebra quotient.  A published bundle
holds everything needed to evaluate; the Trapdoor holds the bases, the
shield, the matrices and the torsion data.
"""

import json
import math
from dataclasses import dataclass, field

from .algebra_dlp import RelationSet, encode, generate_relations, public_identity_test
from .blinding import BlindMatrix, FormalSum, G2Engine, PsiSpec, generate_blind_matrices, make_psi
from .curve_jacobian import CurveModel, ShieldedSystem, SiteViolation, elliptic_add, elliptic_mul, \
    shielded_curve_system, torsion_points
from .descent_core import (
    DescentBasis,
    DescentContext,
    descend_polynomial,
    expand_polynomial,
    is_descent_point,
    lift_conjugates,
    lift_orbit,
    PolyK,
)
from .descent_spec import (
    MapSpecification,
    MonomialSet,
    NotApplicable,
    SampleSet,
    hatpoly_from_blob,
    hatpoly_to_blob,
    linear_attack,
    sample_points,
    specify_function,
    specify_map,
    specify_variety,
    uncover_basis,
)
from .field_tower import THETA, FieldTower, make_rng, nullspace
from .pairing import PairingProgram, Parameters, pairing_on_points, publish_pairing_program, trusted_blinded_pairing

FORMAT_VERSION = 1
SECTIONS = ("tower", "curves", "points", "psi", "relations", "pairing_program")


class SetupError(RuntimeError):
    def __init__(self, stage, msg):
        super().__init__(f"[{stage}] {msg}")
        self.stage = stage


class ParseError(ValueError):
    def __init__(self, section, msg):
        super().__init__(f"section {section!r}: {msg}")
        self.section = section


# --- group elements ----------------------------------------------------------

@dataclass
class G1Element:
    """Formal sum of points on the descent for u'."""
    sum: FormalSum


@dataclass
class G2Element:
    """Formal sum of points on the descent for u."""
    sum: FormalSum


# --- bundles ----------------------------------------------------------------

@dataclass
class PublicParams:
    tower: FieldTower
    ell: int
    N: int
    variety: list
    variety_prime: list
    d_alpha: tuple
    d_beta: tuple
    mhat: MapSpecification
    mhat_prime: MapSpecification
    tauhat: MapSpecification
    psis: list
    relations: RelationSet
    program: PairingProgram
    version: int = FORMAT_VERSION
    _engine: object = field(default=None, repr=False, compare=False)
    _pair_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def engine(self):
        if self._engine is None:
            self._engine = G2Engine(self.tower, self.ell, self.mhat, self.tauhat, self.psis, [self.d_beta])
            self._seed_helpers()
        return self._engine

    def _seed_helpers(self):
        # public Psi images of D_beta serve as offsets for splitting
        eng = self._engine
        frontier = [self.d_beta]
        for _ in range(2):
            nxt = []
            for X in frontier:
                for k in range(len(self.psis)):
                    try:
                        S = eng.psi_point(k, X)
                    except SiteViolation:
                        continue
                    nxt.extend(P for P, _ in S.items())
            frontier = nxt[:16]

    @property
    def zeta(self):
        return self.pair(self.g1(1), self.g2(1))

    def g1(self, x):
        return G1Element(FormalSum.point(self.ell, self.d_alpha, x))

    def g2(self, y):
        return G2Element(FormalSum.point(self.ell, self.d_beta, y))

    def encode(self, z, seed=0):
        return encode(z, self.relations, self.N, seed)

    def pair_points(self, a, b):
        key = (a, b)
        if key not in self._pair_cache:
            self._pair_cache[key] = self.program.evaluate(self.tower, a, b)
        return self._pair_cache[key]

    def pair(self, P1, P2):
        """e-hat on (G1, G2) only: the argument order is part of the interface."""
        if not isinstance(P1, G1Element) or not isinstance(P2, G2Element):
            raise TypeError("the pairing takes a G1 element and a G2 element, in that order")
        F = self.tower
        val = 1
        for a, c1 in P1.sum.items():
            for b, c2 in P2.sum.items():
                val = F.mul(val, F.pow(self.pair_points(a, b), c1 * c2 % self.ell))
        return val

    def apply(self, g, P2):
        if g.degree > self.N:
            raise ValueError(f"encoding degree {g.degree} above the cap {self.N}")
        return G2Element(self.engine.lambda_map(g, P2.sum))

    def is_identity(self, g):
        return public_identity_test(g, self.engine, self.d_beta, cap=self.N)

    def tuples(self):
        out = list(self.variety) + list(self.variety_prime)
        out += self.mhat.tuples() + self.mhat_prime.tuples() + self.tauhat.tuples()
        return out + self.program.tuples()


@dataclass
class Trapdoor:
    ctx: DescentContext
    ctx_prime: DescentContext
    shield: ShieldedSystem
    matrices: list
    alpha: tuple
    beta: tuple
    scalars: dict
    params: Parameters
    seed: object = 0

    def lambda_alpha(self):
        return self._tuple(self.scalars["x"], self.scalars["y"])

    def lambda_beta(self):
        return self._tuple(self.scalars["x'"], self.scalars["y'"])

    def _tuple(self, xs, ys):
        m = self.params.model
        return [elliptic_add(elliptic_mul(self.alpha, x, m), elliptic_mul(self.beta, y, m), m) for x, y in zip(xs, ys)]

    def zeta(self):
        F = self.params.tower
        val = 1
        for i, (P, Q) in enumerate(zip(self.lambda_alpha(), self.lambda_beta())):
            val = F.mul(val, F.frob(pairing_on_points(P, Q, self.params), i))
        return val

    def trusted_pairing(self, a, b):
        return trusted_blinded_pairing(self.ctx_prime, self.ctx, self.shield, a, b, self.params)


# --- setup ------------------------------------------------------------------

def _lift_tuple(ctx, shield, pts):
    F = ctx.tower
    return tuple(lift_conjugates(ctx, [[F.frob(c, i) for c in shield.to_e2(P)] for i, P in enumerate(pts)]))


def _stage(name, fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except SetupError:
        raise
    except Exception as exc:
        raise SetupError(name, f"{type(exc).__name__}: {exc}") from exc


def setup(params, seed=0, N=None, single_basis=False, budget=100):
    """Draw every secret and publish the bundle; returns (PublicParams, Trapdoor)."""
    F = params.tower
    model = params.model
    ell = params.ell
    d = params.d
    N = N or d * d + 2
    rng = make_rng(("setup", seed))
    T = [P for P in torsion_points(model, ell) if P is not None]
    shield = _stage("shield", shielded_curve_system, model, ("shield", seed), avoid=T)
    ctx = _stage("basis", DescentContext.random, F, ("u", seed), "u")
    ctx_p = ctx if single_basis else _stage("basis", DescentContext.random, F, ("u'", seed), "u'")

    def torsion_basis():
        for _ in range(budget):
            a, b = rng.choice(T), rng.choice(T)
            if pairing_on_points(a, b, params) != 1:
                return a, b
        raise RuntimeError("no torsion basis with nontrivial pairing")

    alpha, beta = _stage("torsion", torsion_basis)

    def point(xs, ys):
        return [elliptic_add(elliptic_mul(alpha, x, model), elliptic_mul(beta, y, model), model) for x, y in zip(xs, ys)]

    def draw():
        for _ in range(budget):
            sc = {k: [rng.randrange(ell) for _ in range(d)] for k in ("x", "y", "x'", "y'")}
            Va, Vb = point(sc["x"], sc["y"]), point(sc["x'"], sc["y'"])
            if any(P is None for P in Va + Vb):
                continue
            if len(set(Va)) < 2 or len(set(Vb)) < 2:
                continue
            val = 1
            for i, (P, Q) in enumerate(zip(Va, Vb)):
                val = F.mul(val, F.frob(pairing_on_points(P, Q, params), i))
            if val != 1:
                return sc, Va, Vb
        raise RuntimeError("mixing scalars with zeta != 1 not found")

    scalars, Va, Vb = _stage("scalars", draw)
    d_alpha = _lift_tuple(ctx_p, shield, Va)
    d_beta = _lift_tuple(ctx, shield, Vb)
    if is_descent_point(ctx_p, list(d_alpha))[0] or is_descent_point(ctx, list(d_beta))[0]:
        raise SetupError("points", "a published point is a descent point")
    eqs = shield.equations
    variety = _stage("variety", specify_variety, ctx, eqs, ("v", seed))
    variety_p = _stage("variety", specify_variety, ctx_p, eqs, ("v'", seed))
    add_nums, add_den = shield.build_maps()["add"]
    dbl_nums, dbl_den = shield.build_maps()["double"]
    gens6 = shield.ideal_generators(6)[:2]
    mhat = _stage("mhat", specify_map, ctx, add_nums, add_den, gens6, ("m", seed), label="mhat")
    mhat_p = _stage("mhat", specify_map, ctx_p, add_nums, add_den, gens6, ("m'", seed), label="mhat'")
    tauhat = _stage("tauhat", specify_map, ctx, dbl_nums, dbl_den, [shield.R_eq], ("t", seed), label="tauhat")
    mats = _stage("matrices", generate_blind_matrices, d, ell, N, ("mats", seed))
    psis = [make_psi(ctx, M) for M in mats]
    rels = _stage("relations", generate_relations, mats, N, ("rel", seed), ell, math.ceil(N / 2))
    prog = _stage("pairing", publish_pairing_program, ctx_p, ctx, shield, ell, ("pp", seed))
    pub = PublicParams(F, ell, N, variety, variety_p, d_alpha, d_beta, mhat, mhat_p, tauhat, psis, rels, prog)
    trap = Trapdoor(ctx, ctx_p, shield, mats, alpha, beta, scalars, params, seed)
    return pub, trap


def trilinear_eval(pub, P1, P2, g):
    """e-hat(P1, lambda(g) P2); equals zeta^{xyz} for P1 = x D'_alpha, P2 = y D_beta, g in z + U."""
    return pub.pair(P1, pub.apply(g, P2))


# --- serialization -----------------------------------------------------------

def _pt(F, X):
    return [F.coords(x) for x in X]


def _unpt(F, data):
    return tuple(F.from_coords(c) for c in data)


def _sections(pub):
    F = pub.tower
    return {
        "tower": {"q": F.q, "d": F.d, "modulus": [int(c) for c in F.modulus], "ell": pub.ell, "N": pub.N},
        "curves": {
            "variety": [hatpoly_to_blob(h) for h in pub.variety],
            "variety_prime": [hatpoly_to_blob(h) for h in pub.variety_prime],
            "mhat": pub.mhat.to_dict(), "mhat_prime": pub.mhat_prime.to_dict(), "tauhat": pub.tauhat.to_dict(),
        },
        "points": {"d_alpha": _pt(F, pub.d_alpha), "d_beta": _pt(F, pub.d_beta)},
        "psi": [s.to_dict(F) for s in pub.psis],
        "relations": pub.relations.to_dict(),
        "pairing_program": pub.program.to_dict(),
    }


def serialize(pub):
    """Versioned JSON, one top-level section per line."""
    secs = _sections(pub)
    lines = ['{"format": "weilmap-public", "version": %d,' % pub.version]
    for k, name in enumerate(SECTIONS):
        body = json.dumps(secs[name], sort_keys=True, separators=(",", ":"))
        lines.append(f'"{name}": {body}' + ("," if k < len(SECTIONS) - 1 else ""))
    lines.append("}")
    return ("\n".join(lines) + "\n").encode()


def _section_at(line):
    # line 1 is the header, section k sits on line k + 2
    k = line - 2
    if 0 <= k < len(SECTIONS):
        return SECTIONS[k]
    return "header" if k < 0 else SECTIONS[-1]


def deserialize(blob):
    try:
        text = blob.decode() if isinstance(blob, (bytes, bytearray)) else blob
    except UnicodeDecodeError as exc:
        raise ParseError("header", "not UTF-8") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(_section_at(exc.lineno), exc.msg) from exc
    if data.get("format") != "weilmap-public":
        raise ParseError("header", "not a public parameter file")
    if data.get("version") != FORMAT_VERSION:
        raise ParseError("header", f"version {data.get('version')} unsupported (expected {FORMAT_VERSION})")
    for name in SECTIONS:
        if name not in data:
            raise ParseError(name, "missing")

    def read(name, fn):
        try:
            return fn(data[name])
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ParseError(name, f"malformed ({type(exc).__name__}: {exc})") from exc

    tw = read("tower", lambda s: (FieldTower(s["q"], s["d"], s["modulus"]), s["ell"], s["N"]))
    F, ell, N = tw
    q = F.q
    curves = read("curves", lambda s: (
        [hatpoly_from_blob(h, q) for h in s["variety"]], [hatpoly_from_blob(h, q) for h in s["variety_prime"]],
        MapSpecification.from_dict(s["mhat"], q), MapSpecification.from_dict(s["mhat_prime"], q),
        MapSpecification.from_dict(s["tauhat"], q)))
    pts = read("points", lambda s: (_unpt(F, s["d_alpha"]), _unpt(F, s["d_beta"])))
    psis = read("psi", lambda s: [PsiSpec.from_dict(p, F) for p in s])
    rels = read("relations", RelationSet.from_dict)
    prog = read("pairing_program", lambda s: PairingProgram.from_dict(s, q))
    return PublicParams(F, ell, N, curves[0], curves[1], pts[0], pts[1], curves[2], curves[3], curves[4],
                        psis, rels, prog)


TRUSTED_WARNING = "TRUSTED MATERIAL: descent bases, shield, matrices and torsion data. Keep private."


def serialize_trapdoor(trap):
    F = trap.params.tower
    data = {
        "warning": TRUSTED_WARNING,
        "version": FORMAT_VERSION,
        "seed": repr(trap.seed),
        "params": trap.params.to_dict(),
        "basis": [[F.coords(x) for x in trap.ctx.u]],
        "basis_prime": [[F.coords(x) for x in trap.ctx_prime.u]],
        "shield": trap.shield.to_dict(),
        "matrices": [M.to_dict() for M in trap.matrices],
        "alpha": _pt(F, trap.alpha), "beta": _pt(F, trap.beta),
        "scalars": trap.scalars,
    }
    return ("# " + TRUSTED_WARNING + "\n" + json.dumps(data, sort_keys=True) + "\n").encode()


def load_trapdoor_matrices(blob):
    text = blob.decode()
    body = "\n".join(line for line in text.splitlines() if not line.startswith("#"))
    data = json.loads(body)
    return [BlindMatrix.from_dict(m) for m in data["matrices"]]


# --- attack harness ----------------------------------------------------------

@dataclass
class AttackReport:
    mode: str
    weak: bool
    proper: bool
    detail: str = ""

    def lines(self):
        return [f"{self.mode}: weakened bundle -> {'success' if self.weak else 'failure'}",
                f"{self.mode}: properly specified bundle -> {'success' if self.proper else 'failure'}"
                + (f" ({self.detail})" if self.detail else "")]


def _basis_ctx(F, cand):
    try:
        return DescentContext(F, DescentBasis(F, [[F.coords(x)[i] for x in cand] for i in range(F.d)]))
    except (ZeroDivisionError, ValueError, ArithmeticError):
        return None


def _proportional(F, a, b):
    r = F.div(a[0], b[0]) if b[0] else None
    return r is not None and all(F.mul(r, y) == x for x, y in zip(a, b))


def _vital_element(F):
    return next(x for x in range(F.q, F.order) if F.min_poly_degree(x) == F.d)


def descent_point_leak(F, X, n):
    """u up to scale from <X^{sigma_{-i}} - X, u> = 0, when those relations pin it down."""
    d = F.d
    rows = []
    for i in range(1, d):
        for c in range(n):
            blk = X[c * d:(c + 1) * d]
            diff = [F.sub(F.frob(x, -i), x) for x in blk]
            if any(diff):
                rows.append(diff)
    if not rows:
        return None
    ker = nullspace(F, rows)
    return ker[0] if len(ker) == 1 else None


def public_descent_point(F, X, n):
    """Public test: over K a descent point has k-rational coordinates; otherwise the
    relations <X^{sigma_-i} - X, u> = 0 must leave a one-dimensional solution space."""
    if all(F.in_prime_field(x) for x in X):
        return True
    return descent_point_leak(F, X, n) is not None


def run_attack(mode, params, pub=None, samples=40, seed=0):
    """Replay one attack against a weakened bundle (fresh basis) and a properly specified one."""
    F = params.tower
    model = params.model
    d = F.d
    rng = make_rng(("attack", mode, seed))
    ctx = DescentContext.random(F, ("attack-u", seed))
    a = _vital_element(F)
    if mode == "basis-recovery":
        P = PolyK(F, 2, {(0, 2): 1, (3, 0): F.neg(1), (1, 0): F.neg(model.a), (0, 0): F.neg(model.b)})
        P = P + PolyK(F, 2, {(1, 1): a})
        try:
            weak = any(_proportional(F, c, ctx.u) for c in uncover_basis(descend_polynomial(ctx, P), P, tower=F))
        except NotApplicable:
            weak = False
        proper = False
        shield = shielded_curve_system(model, ("attack-shield", seed))
        for H in specify_variety(ctx, shield.equations, seed):
            try:
                cands = uncover_basis(H, tower=F)
            except NotApplicable:
                continue
            proper |= any(_proportional(F, c, ctx.u) for c in cands)
        return AttackReport(mode, weak, proper)
    if mode == "ratio-recovery":
        G = PolyK(F, 2, {(1, 1): a})
        ratios = [F.div(x, ctx.u[0]) for x in ctx.u]
        try:
            weak = uncover_basis(expand_polynomial(ctx, G, 0, THETA), mode="ratios", tower=F) == ratios
        except NotApplicable:
            weak = False
        gens = [PolyK(F, 2, {(0, 2): 1, (3, 0): F.neg(1), (1, 0): F.neg(model.a), (0, 0): F.neg(model.b)})]
        spec = specify_function(ctx, (G, None), 1, 0, seed=seed, generators=gens)
        try:
            proper = uncover_basis(spec.numerators[0], mode="ratios", tower=F) == ratios
        except NotApplicable:
            proper = False
        return AttackReport(mode, weak, proper)
    if mode == "vanishing-ideal":
        araw = _vital_element(F)
        raw = CurveModel.elliptic(F, araw, 3)
        pts = raw.points()
        pools = [[tuple(F.frob(c, i) for c in P) for P in pts] for i in range(d)]
        A = sample_points(ctx, pools, samples, rng)
        S = MonomialSet([(0, 2), (3, 0), (1, 0), (0, 0)], F.q, d)
        weak = linear_attack(F, A, S, "vanishing", target=0) is not None
        sh = shielded_curve_system(raw, ("attack-shield", seed))
        spts = [sh.to_e2(P) for P in pts if not sh.exceptional(P)]
        pools = [[tuple(F.frob(c, i) for c in P) for P in spts] for i in range(d)]
        A2 = sample_points(ctx, pools, 3 * samples, rng)
        S2 = MonomialSet(sh.F_eq.monomials(), F.q, d)
        proper = linear_attack(F, A2, S2, "vanishing", target=0) is not None
        return AttackReport(mode, weak, proper)
    if mode == "interpolation":
        G = PolyK(F, 2, {(1, 1): a})
        gens = [PolyK(F, 2, {(0, 2): 1, (3, 0): F.neg(1), (1, 0): F.neg(model.a), (0, 0): F.neg(model.b)})]
        pts = model.points()
        pools = [[tuple(F.frob(c, i) for c in P) for P in pts] for i in range(d)]
        ratios = [F.div(x, ctx.u[0]) for x in ctx.u]
        A = sample_points(ctx, pools, samples, rng)
        K = expand_polynomial(ctx, G, 0, THETA)
        vals = [_kval(F, K, X) for X in A.points]
        got = linear_attack(F, SampleSet(A.points, vals), MonomialSet([(1, 1)], F.q, d), "interpolate")
        weak = _ratios_ok(F, got, ratios)
        spec = specify_function(ctx, (G, None), 1, 0, seed=seed, generators=gens)
        H = spec.numerators[0]
        vals2 = [_kval(F, H, X) for X in A.points]
        got2 = linear_attack(F, SampleSet(A.points, vals2), H.exps, "interpolate")
        proper = _ratios_ok(F, got2, ratios)
        return AttackReport(mode, weak, proper)
    if mode == "descent-point":
        pts = [P for P in model.points() if any(not F.in_prime_field(c) for c in P)]
        P = pts[rng.randrange(len(pts))]
        weak = public_descent_point(F, lift_orbit(ctx, list(P)), 2)
        proper = False
        if pub is not None:
            proper = any(public_descent_point(F, list(Y), 3) for Y in (pub.d_alpha, pub.d_beta))
        return AttackReport(mode, weak, proper, "" if pub is not None else "no public bundle given")
    raise ValueError(f"unknown attack mode {mode!r}")


def _kval(F, H, X):
    """K value of a theta HatPoly at a hatted point."""
    return F.sum(F.mul(v, F.theta(j)) for j, v in enumerate(H.evaluate(F, X)))


def _ratios_ok(F, got, ratios):
    if got is None:
        return False
    exps, vals, n = got
    try:
        return uncover_basis((exps, vals, n), mode="ratios", tower=F) == ratios
    except NotApplicable:
        return False


__all__ = [
    "PublicParams", "Trapdoor", "G1Element", "G2Element", "SetupError", "ParseError", "AttackReport", "setup",
    "trilinear_eval", "serialize", "deserialize", "serialize_trapdoor", "load_trapdoor_matrices", "run_attack",
    "descent_point_leak", "public_descent_point", "FORMAT_VERSION", "SECTIONS",
]
