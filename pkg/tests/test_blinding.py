import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from weilmap.blinding import (
    BlindMatrix,
    FormalSum,
    PsiSpec,
    eval_psi,
    eval_psi_matrix,
    eval_psi_public,
    eval_psi_trusted,
    generate_blind_matrices,
    make_psi,
    phi_of_matrix,
    span_rank,
    torsion_coordinates,
)
from weilmap.curve_jacobian import SiteViolation, elliptic_add, elliptic_mul
from weilmap.descent_core import lambda_components, lift_conjugates, lift_orbit
from weilmap.field_tower import make_rng


def all_rows(d):
    return [(i,) for i in range(d)] + list(itertools.combinations(range(d), 2))


def test_only_all_ones_is_fully_weight_two_at_d2():
    # enumerate every 2x2 matrix with rows of weight one or two
    full = [BlindMatrix(rows, 2, 3) for rows in itertools.product(all_rows(2), repeat=2)]
    heavy = [M for M in full if all(len(r) == 2 for r in M.rows)]
    assert [M.matrix.tolist() for M in heavy] == [[[1, 1], [1, 1]]]
    assert len(full) == 9


@pytest.mark.parametrize("d,ell,N", [(2, 3, 3), (2, 3, 6), (2, 7, 6), (3, 3, 8), (3, 5, 11)])
def test_generated_matrices_span(d, ell, N):
    mats = generate_blind_matrices(d, ell, N, seed=1)
    assert len(mats) == N
    assert span_rank(mats, d, ell) == d * d
    for M in mats:
        assert all(len(r) in (1, 2) for r in M.rows)


def test_too_few_matrices_rejected():
    with pytest.raises(ValueError):
        generate_blind_matrices(3, 3, 7)


def test_spread_enforced_at_d4():
    mats = generate_blind_matrices(4, 3, 15, seed=0)
    assert span_rank(mats, 4, 3) == 16
    assert min(M.spread() for M in mats) >= 2


@given(st.lists(st.sampled_from(all_rows(3)), min_size=3, max_size=3))
def test_index_classes_partition_rows(rows):
    M = BlindMatrix(rows, 3, 3)
    seen = sorted(i for idx in M.index_classes.values() for i in idx)
    assert seen == [0, 1, 2]
    for (a, b), idx in M.index_classes.items():
        for i in idx:
            r = M.rows[i]
            assert a == (i - r[0]) % 3
            assert b == (i - r[-1]) % 3
    assert BlindMatrix.from_dict(M.to_dict()).rows == M.rows


def test_weight_two_rows_need_order():
    with pytest.raises(ValueError):
        BlindMatrix([(1, 0), (0,)], 2, 3)


def test_omegas_sum_to_identity(F, ctx):
    for rows in itertools.product(all_rows(2), repeat=2):
        spec = make_psi(ctx, BlindMatrix(rows, 2, 3))
        total = [[F.sum(spec.omegas[k][r][j] for k in spec.e_set) for j in range(2)] for r in range(2)]
        assert total == [[1, 0], [0, 1]]


def test_phi_composition_matches_matrix_product(ref, torsion):
    m = ref.model
    alpha = torsion[0]
    beta = next(Q for Q in torsion if Q not in (alpha, elliptic_mul(alpha, 2, m)))
    rng = make_rng("comp")
    mats = generate_blind_matrices(2, 3, 6, seed=3)
    for _ in range(30):
        M1, M2 = mats[rng.randrange(6)], mats[rng.randrange(6)]
        X = [torsion[rng.randrange(len(torsion))] for _ in range(2)]
        got = phi_of_matrix(M1, phi_of_matrix(M2, X, m), m)
        coords = np.array([torsion_coordinates(m, alpha, beta, 3, P) for P in X])
        want = (M1.matrix @ M2.matrix @ coords) % 3
        want = [elliptic_add(elliptic_mul(alpha, int(x), m), elliptic_mul(beta, int(y), m), m) for x, y in want]
        assert got == want


@pytest.fixture(scope="module")
def world(pipeline):
    pub, trap = pipeline
    return pub, trap


def test_three_psi_paths_agree(world, torsion):
    pub, trap = world
    F, sh, ctx = pub.tower, trap.shield, trap.ctx
    rng = make_rng("paths")
    for k, M in enumerate(trap.matrices):
        checked = 0
        for _ in range(20):
            X = tuple(lift_orbit(ctx, None, [sh.to_e2(torsion[rng.randrange(len(torsion))]) for _ in range(2)]))
            try:
                pu = eval_psi_public(pub.psis[k], X, pub.mhat, F)
            except SiteViolation:
                continue
            assert pu == eval_psi_trusted(ctx, M, X, sh)
            assert pu == eval_psi_matrix(ctx, M, X, sh, trap.alpha, trap.beta, 3)
            assert pu == eval_psi(ctx, X, "trusted", M=M, shield=sh)
            checked += 1
        assert checked >= 8


def test_public_psi_composes(world, torsion):
    pub, trap = world
    F, sh, ctx = pub.tower, trap.shield, trap.ctx
    rng = make_rng("compose")
    done = 0
    for _ in range(40):
        i, j = rng.randrange(len(trap.matrices)), rng.randrange(len(trap.matrices))
        X = tuple(lift_orbit(ctx, None, [sh.to_e2(torsion[rng.randrange(len(torsion))]) for _ in range(2)]))
        try:
            Y = eval_psi_public(pub.psis[i], eval_psi_public(pub.psis[j], X, pub.mhat, F), pub.mhat, F)
        except SiteViolation:
            continue
        M1, M2 = trap.matrices[i], trap.matrices[j]
        assert Y == eval_psi_trusted(ctx, M1, eval_psi_trusted(ctx, M2, X, sh), sh)
        done += 1
    assert done >= 10


def test_psi_spec_round_trip(world):
    pub, trap = world
    F = pub.tower
    spec = pub.psis[0]
    again = PsiSpec.from_dict(spec.to_dict(F), F)
    assert again.e_set == spec.e_set and again.omegas == spec.omegas


def test_formal_sum_arithmetic():
    a = FormalSum.point(3, (1, 2))
    b = FormalSum.point(3, (1, 2), 2)
    assert (a + b).is_formally_zero()
    assert a.scale(3).is_formally_zero()
    c = a + FormalSum.point(3, (4, 5))
    assert c.items() == [((1, 2), 1), ((4, 5), 1)]


def test_engine_arithmetic_matches_curve(world):
    pub, trap = world
    F, ctx, sh = pub.tower, trap.ctx, trap.shield
    eng = pub.engine
    Y = tuple(pub.d_beta)
    two = eng.double(Y)
    comps = lambda_components(ctx, list(Y))
    want = [sh.add(tuple(c), tuple(c)) for c in comps]
    assert two == tuple(lift_conjugates(ctx, [[F.frob(c, i) for c in want[i]] for i in range(2)]))
    with pytest.raises(SiteViolation):
        eng.add(Y, Y)  # chord formula is off site on the diagonal
    assert eng.mul(Y, 1) == Y and eng.mul(Y, 2) == two
    assert eng.is_zero(FormalSum.point(3, Y, 3))
    assert not eng.is_zero(FormalSum.point(3, Y))
    assert eng.is_zero(FormalSum.point(3, Y) + FormalSum.point(3, eng.neg(Y)))
    assert eng.is_zero(FormalSum.point(3, Y, 1) + FormalSum.point(3, two, 1))
    assert not eng.is_zero(FormalSum.point(3, Y, 2) + FormalSum.point(3, two, 1))
