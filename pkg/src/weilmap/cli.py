"""Command line front end: setup, eval, encode, dlog, attack, selftest."""

import json
import pathlib
import subprocess
import sys

import click

from .algebra_dlp import AlgebraElement, NotInU1, trapdoor_dlog
from .pairing import find_parameters, reference_parameters
from .trilinear_pipeline import (
    ParseError,
    SetupError,
    deserialize,
    load_trapdoor_matrices,
    run_attack,
    serialize,
    serialize_trapdoor,
    setup as run_setup,
    trilinear_eval,
)


def _fail(stage, msg):
    click.echo(f"error [{stage}]: {msg}", err=True)
    sys.exit(2)


def _params(q, d, ell, genus, seed=0):
    ref = reference_parameters()
    if (q, d, ell, genus) == (ref.q, ref.d, ref.ell, ref.genus):
        return ref
    try:
        return find_parameters([q], [d], genus, seed, ell_filter=(lambda l: l == ell) if ell else None)
    except ValueError as exc:
        _fail("parameters", str(exc))


def _load_pub(path):
    try:
        return deserialize(pathlib.Path(path).read_bytes())
    except ParseError as exc:
        _fail(f"parse:{exc.section}", str(exc))
    except OSError as exc:
        _fail("io", str(exc))


@click.group()
def main():
    """Blinded trilinear map over Weil descents (desk-scale parameters)."""


@main.command()
@click.option("--q", default=5, show_default=True)
@click.option("--d", default=2, show_default=True)
@click.option("--ell", default=3, show_default=True)
@click.option("--genus", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default="weilmap-out", show_default=True, type=click.Path(file_okay=False))
def setup(q, d, ell, genus, seed, out):
    """Write public.json and trusted.json into OUT."""
    params = _params(q, d, ell, genus, seed)
    try:
        pub, trap = run_setup(params, seed)
    except SetupError as exc:
        _fail(exc.stage, str(exc))
    except NotImplementedError as exc:
        _fail("pairing", str(exc))
    outdir = pathlib.Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "public.json").write_bytes(serialize(pub))
    (outdir / "trusted.json").write_bytes(serialize_trapdoor(trap))
    click.echo(f"wrote {outdir / 'public.json'} and {outdir / 'trusted.json'}")
    click.echo(f"zeta = {pub.tower.coords(pub.zeta)}")


@main.command("eval")
@click.option("--pub", "pub_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--x", default=1, show_default=True)
@click.option("--y", default=1, show_default=True)
@click.option("--z", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True, help="seed of the encoding of z")
def eval_cmd(pub_path, x, y, z, seed):
    """Print e-hat(x D'_alpha, lambda(g) y D_beta) for a fresh encoding g of z."""
    pub = _load_pub(pub_path)
    g = pub.encode(z % pub.ell, seed)
    try:
        val = trilinear_eval(pub, pub.g1(x), pub.g2(y), g)
    except ArithmeticError as exc:
        _fail("eval", f"{exc}; retry with another --seed")
    click.echo(json.dumps({"value": pub.tower.coords(val), "is_one": val == 1}))


@main.command()
@click.option("--pub", "pub_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--z", required=True, type=int)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def encode(pub_path, z, seed, out):
    """Write a sparse encoding of z + U."""
    pub = _load_pub(pub_path)
    g = pub.encode(z % pub.ell, seed)
    pathlib.Path(out).write_text(json.dumps({"ell": pub.ell, "terms": g.to_list()}))
    click.echo(f"{len(g)} terms, degree {g.degree}")


@main.command()
@click.option("--pub", "pub_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--encoding", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--trapdoor", default=None, type=click.Path(exists=True, dir_okay=False))
def dlog(pub_path, encoding, trapdoor):
    """With the trapdoor: the discrete log.  Without it: only the public identity test."""
    data = json.loads(pathlib.Path(encoding).read_text())
    g = AlgebraElement.from_list(data["ell"], data["terms"])
    if trapdoor:
        mats = load_trapdoor_matrices(pathlib.Path(trapdoor).read_bytes())
        try:
            click.echo(f"dlog = {trapdoor_dlog(g, mats)}")
        except NotInU1 as exc:
            _fail("dlog", str(exc))
        return
    pub = _load_pub(pub_path)
    try:
        zero = pub.is_identity(g)
    except ArithmeticError as exc:
        _fail("identity-test", str(exc))
    click.echo("identity (g in U)" if zero else "not the identity")


@main.command()
@click.option("--mode", required=True, type=click.Choice(["basis-recovery", "ratio-recovery", "interpolation", "vanishing-ideal", "descent-point"]))
@click.option("--pub", "pub_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--samples", default=40, show_default=True)
@click.option("--seed", default=0, show_default=True)
def attack(mode, pub_path, samples, seed):
    """Replay an attack against a weakened and a properly specified bundle."""
    pub = _load_pub(pub_path) if pub_path else None
    if pub is not None:
        F = pub.tower
        params = _params(F.q, F.d, pub.ell, 1)
    else:
        params = reference_parameters()
    report = run_attack(mode, params, pub, samples, seed)
    for line in report.lines():
        click.echo(line)


@main.command()
@click.option("--tests", default=None, type=click.Path(exists=True, file_okay=False),
              help="directory holding test_acceptance.py (defaults to the source checkout)")
def selftest(tests):
    """Run the acceptance suite with pytest."""
    root = pathlib.Path(tests) if tests else pathlib.Path(__file__).resolve().parents[2] / "tests"
    target = root / "test_acceptance.py"
    if not target.exists():
        _fail("selftest", f"{target} not found; pass --tests")
    res = subprocess.run([sys.executable, "-m", "pytest", "-q", "-s", str(target)], cwd=root.parent)
    sys.exit(res.returncode)


if __name__ == "__main__":
    main()
