import json

import pytest
from click.testing import CliRunner

from weilmap.algebra_dlp import AlgebraElement, trapdoor_dlog
from weilmap.cli import main
from weilmap.descent_core import is_descent_point
from weilmap.descent_spec import is_clean
from weilmap.field_tower import make_rng
from weilmap.trilinear_pipeline import (
    FORMAT_VERSION,
    SECTIONS,
    ParseError,
    deserialize,
    load_trapdoor_matrices,
    public_descent_point,
    run_attack,
    serialize,
    serialize_trapdoor,
    setup,
    trilinear_eval,
)

TRUSTED_KEYS = {"basis", "basis_prime", "u", "w", "gamma", "shield", "matrices", "alpha", "beta", "scalars", "seed"}


@pytest.fixture(scope="module")
def blob(pipeline):
    return serialize(pipeline[0])


@pytest.fixture(scope="module")
def pub_file(tmp_path_factory, blob, pipeline):
    d = tmp_path_factory.mktemp("bundle")
    (d / "public.json").write_bytes(blob)
    (d / "trusted.json").write_bytes(serialize_trapdoor(pipeline[1]))
    return d


def test_zeta_is_a_primitive_cube_root(pipeline):
    pub, trap = pipeline
    F = pub.tower
    z = pub.zeta
    assert z != 1 and F.pow(z, 3) == 1
    assert z == trap.zeta()


def test_published_points_are_not_descent_points(pipeline):
    pub, trap = pipeline
    F = pub.tower
    assert not is_descent_point(trap.ctx_prime, list(pub.d_alpha))[0]
    assert not is_descent_point(trap.ctx, list(pub.d_beta))[0]
    assert not public_descent_point(F, list(pub.d_alpha), 3)
    assert not public_descent_point(F, list(pub.d_beta), 3)


def test_published_tuples_are_clean(pipeline):
    pub, trap = pipeline
    for T in pub.variety + pub.mhat.tuples() + pub.tauhat.tuples():
        assert is_clean(trap.ctx, T)
    for T in pub.variety_prime + pub.mhat_prime.tuples():
        assert is_clean(trap.ctx_prime, T)


def test_special_values(pipeline):
    pub, trap = pipeline
    F = pub.tower
    z = pub.zeta
    assert trilinear_eval(pub, pub.g1(1), pub.g2(1), pub.encode(1)) == z
    assert trilinear_eval(pub, pub.g1(1), pub.g2(1), pub.encode(0)) == 1
    assert trilinear_eval(pub, pub.g1(0), pub.g2(2), pub.encode(2)) == 1
    # (2, 3, 5) reduces to (2, 0, 2) mod 3
    assert trilinear_eval(pub, pub.g1(2), pub.g2(3 % 3), pub.encode(5 % 3)) == F.pow(z, 30)
    assert trilinear_eval(pub, pub.g1(2), pub.g2(1), pub.encode(2)) == F.pow(z, 4)


def test_random_triples_match_trapdoor(pipeline):
    pub, trap = pipeline
    F = pub.tower
    rng = make_rng("triples")
    for k in range(10):
        x, y, z = (rng.randrange(3) for _ in range(3))
        g = pub.encode(z, seed=k)
        assert trapdoor_dlog(g, trap.matrices) == z
        assert trilinear_eval(pub, pub.g1(x), pub.g2(y), g) == F.pow(trap.zeta(), x * y * z)


def test_pairing_argument_order(pipeline):
    pub = pipeline[0]
    with pytest.raises(TypeError):
        pub.pair(pub.g2(1), pub.g1(1))


def test_degree_cap_on_apply(pipeline):
    pub = pipeline[0]
    with pytest.raises(ValueError):
        pub.apply(AlgebraElement.word(3, (0,) * (pub.N + 1)), pub.g2(1))


def test_round_trip_is_byte_identical(blob):
    again = deserialize(blob)
    assert serialize(again) == blob


def test_round_trip_preserves_behaviour(pipeline, blob):
    pub = deserialize(blob)
    F = pub.tower
    g = pub.encode(1, seed=3)
    assert trilinear_eval(pub, pub.g1(1), pub.g2(2), g) == F.pow(pipeline[1].zeta(), 2)
    assert pub.zeta == pipeline[0].zeta


def test_truncated_file_names_the_section(blob):
    lines = blob.split(b"\n")
    for k, name in enumerate(SECTIONS):
        cut = b"\n".join(lines[:k + 1] + [lines[k + 1][: len(lines[k + 1]) // 2]])
        with pytest.raises(ParseError) as exc:
            deserialize(cut)
        assert exc.value.section == name


def test_bad_header_and_version(blob):
    data = json.loads(blob)
    data["version"] = FORMAT_VERSION + 1
    with pytest.raises(ParseError) as exc:
        deserialize(json.dumps(data).encode())
    assert exc.value.section == "header"
    del data["psi"]
    data["version"] = FORMAT_VERSION
    with pytest.raises(ParseError) as exc:
        deserialize(json.dumps(data).encode())
    assert exc.value.section == "psi"
    with pytest.raises(ParseError):
        deserialize(b"\xff\xfe")


def test_malformed_section_is_reported(blob):
    data = json.loads(blob)
    data["relations"] = {"N": 6}
    with pytest.raises(ParseError) as exc:
        deserialize(json.dumps(data).encode())
    assert exc.value.section == "relations"


def _keys(obj, out):
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.add(k)
            _keys(v, out)
    elif isinstance(obj, list):
        for v in obj:
            _keys(v, out)
    return out


def test_public_file_carries_no_trusted_fields(pipeline, blob):
    pub, trap = pipeline
    assert not (_keys(json.loads(blob), set()) & TRUSTED_KEYS)
    trusted = serialize_trapdoor(trap)
    assert trusted.startswith(b"# TRUSTED MATERIAL")
    assert TRUSTED_KEYS - {"u", "w", "gamma"} <= _keys(json.loads(trusted.split(b"\n", 1)[1]), set())
    assert [M.rows for M in load_trapdoor_matrices(trusted)] == [M.rows for M in trap.matrices]


def test_setup_is_deterministic(ref, blob):
    assert serialize(setup(ref, seed=0)[0]) == blob


@pytest.mark.parametrize("mode", ["basis-recovery", "ratio-recovery", "interpolation", "vanishing-ideal", "descent-point"])
def test_attacks_split_weak_from_proper(ref, pipeline, mode):
    rep = run_attack(mode, ref, pipeline[0], samples=40, seed=0)
    assert rep.weak and not rep.proper
    assert len(rep.lines()) == 2


def test_cli_eval_encode_dlog(pub_file):
    runner = CliRunner()
    pub = str(pub_file / "public.json")
    res = runner.invoke(main, ["eval", "--pub", pub, "--x", "1", "--y", "1", "--z", "0"])
    assert res.exit_code == 0 and json.loads(res.output)["is_one"]
    res = runner.invoke(main, ["eval", "--pub", pub, "--x", "1", "--y", "2", "--z", "1"])
    assert res.exit_code == 0 and not json.loads(res.output)["is_one"]
    enc = str(pub_file / "enc.json")
    res = runner.invoke(main, ["encode", "--pub", pub, "--z", "2", "--out", enc])
    assert res.exit_code == 0
    res = runner.invoke(main, ["dlog", "--pub", pub, "--encoding", enc, "--trapdoor", str(pub_file / "trusted.json")])
    assert res.output.strip() == "dlog = 2"
    res = runner.invoke(main, ["dlog", "--pub", pub, "--encoding", enc])
    assert res.output.strip() == "not the identity"


def test_cli_attack_and_errors(pub_file, tmp_path):
    runner = CliRunner()
    res = runner.invoke(main, ["attack", "--mode", "descent-point", "--pub", str(pub_file / "public.json")])
    assert res.exit_code == 0
    assert "weakened bundle -> success" in res.output and "properly specified bundle -> failure" in res.output
    bad = tmp_path / "bad.json"
    bad.write_bytes((pub_file / "public.json").read_bytes()[:5000])
    res = runner.invoke(main, ["eval", "--pub", str(bad)])
    assert res.exit_code == 2 and "parse:" in res.output
