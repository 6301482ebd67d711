"""Command-line front end.

Commands: orbit, check, sklyanin-info, sheaf-s0, pairing, toy. Every command
reads an optional JSON config (unknown keys rejected); --seed, --precision and
--tol override config values. Output is JSON (JSONL for orbits) with complex
numbers as [re, im]. Exit codes: 0 pass, 1 computation or check failure,
2 usage or config error.
"""

import argparse
import hashlib
import json
import sys
from fractions import Fraction
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from . import __version__

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Config(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = 0
    precision: str = "double"
    tol: Optional[float] = None


class OrbitConfig(_Config):
    d: int = 3
    word: str = "a(1,2)"
    steps: int = 10
    torsion: bool = False
    commutative: bool = False
    renormalize: bool = True
    method: str = "auto"


class CheckConfig(_Config):
    seed: Optional[int] = None


class SklyaninConfig(_Config):
    seed: int = 1
    params: Optional[List[List[float]]] = None


class SheafConfig(_Config):
    seed: int = 1
    params: Optional[List[List[float]]] = None
    blowup_seed: Optional[int] = None
    plane_point: Optional[List[List[float]]] = None


class PairingConfig(_Config):
    seed: int = 1
    params: Optional[List[List[float]]] = None
    pencil: Optional[dict] = None
    first: Optional[list] = None
    second: Optional[list] = None


class ToyConfig(_Config):
    f: List[List[str]] = [["-1", "1"]]
    s: str = "1"
    hbar: str = "1/3"
    N: Optional[int] = None
    chain: List[str] = []


CONFIGS = {
    "orbit": OrbitConfig,
    "check": CheckConfig,
    "sklyanin-info": SklyaninConfig,
    "sheaf-s0": SheafConfig,
    "pairing": PairingConfig,
    "toy": ToyConfig,
}


class UsageError(Exception):
    """Bad command-line usage or configuration."""


def to_jsonable(obj):
    """Convert numbers, arrays and points to plain JSON values."""
    if hasattr(obj, "to_json"):
        return to_jsonable(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    if hasattr(obj, "is_Number"):
        return str(obj)
    return repr(obj)


def dumps(obj):
    return json.dumps(to_jsonable(obj), sort_keys=True)


def _complex_list(pairs):
    return [complex(re, im) for re, im in pairs]


def load_config(command, path, overrides):
    """Validated config for a command.

    Raises:
        UsageError: unreadable file or schema violation.
    """
    data = {}
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError("cannot read config: %s" % exc)
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = CONFIGS[command](**data)
    except ValidationError as exc:
        raise UsageError("invalid config: %s" % exc.errors()[0]["msg"] + " at " +
                         ".".join(str(x) for x in exc.errors()[0]["loc"]))
    if cfg.precision not in ("double", "extended"):
        raise UsageError("precision must be double or extended")
    return cfg


def config_hash(cfg):
    return hashlib.sha256(cfg.model_dump_json().encode()).hexdigest()[:16]


def _algebra(cfg):
    from .sklyanin import SklyaninAlgebra, random_params

    params = _complex_list(cfg.params) if cfg.params else random_params(cfg.seed)
    if len(params) != 3:
        raise UsageError("params needs three [re, im] pairs")
    return SklyaninAlgebra(*params)


def cmd_orbit(cfg, out):
    from .dynamics import orbit, random_curve, random_state

    E = random_curve(cfg.seed, precision=cfg.precision, torsion=cfg.torsion, commutative=cfg.commutative)
    state = random_state(E, cfg.d, seed=cfg.seed)
    traj = orbit(state, cfg.word, cfg.steps, renormalize_steps=cfg.renormalize, method=cfg.method)
    h = config_hash(cfg)
    ok = traj.failure is None
    for rec in traj.records:
        out.write(dumps({"inputs": h, "step": rec["step"], "state": rec["state"],
                         "constraint_residual": rec["constraint_residual"], "pass": True}) + "\n")
    if not ok:
        out.write(dumps({"inputs": h, "step": len(traj.records), "error": traj.failure, "pass": False}) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check(cfg, out, suite):
    from .suites import SUITES, run_suite

    names = list(SUITES) if suite == "all" else [suite]
    for name in names:
        if name not in SUITES:
            raise UsageError("unknown suite %r (choose from %s or all)" % (name, ", ".join(SUITES)))
    ok = True
    reports = []
    for name in names:
        rep = run_suite(name, seed=cfg.seed, tol=cfg.tol)
        rep.info.pop("seconds", None)
        ok = ok and rep.passed
        reports.append(rep.to_json())
    out.write(dumps({"passed": ok, "suites": reports}) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sklyanin_info(cfg, out):
    A = _algebra(cfg)
    data = A.point_scheme()
    theta, kdim = A.central_element()
    out.write(dumps({
        "params": list(A.params),
        "dims": [A.dim(n) for n in range(A_MAX + 1)],
        "cubic": data.E.cubic,
        "O": data.E.O,
        "t": data.E.t,
        "calibration": data.report,
        "theta": theta.coeffs,
        "theta_kernel_dimension": kdim,
        "commutative": A.is_commutative(),
    }) + "\n")
    return EXIT_OK


A_MAX = 4


def cmd_sheaf_s0(cfg, out):
    from .elliptic import ProjPoint, proj_distance
    from .dynamics import s0_move
    from .sheaf import (
        FamilyHandle,
        datum_from_plane_point,
        dynamics_state,
        hecke_s0,
        plane_point_of,
        random_blowup_params,
    )

    A = _algebra(cfg)
    params = random_blowup_params(A, seed=cfg.blowup_seed if cfg.blowup_seed is not None else cfg.seed + 2)
    if cfg.plane_point:
        x = ProjPoint(tuple(_complex_list(cfg.plane_point)))
    else:
        rng = np.random.default_rng(cfg.seed + 101)
        x = ProjPoint(tuple(rng.standard_normal(3) + 1j * rng.standard_normal(3)))
    datum, rep = datum_from_plane_point(x, params)
    if isinstance(datum, FamilyHandle):
        out.write(dumps({"case": rep, "error": "plane point lies over a base point"}) + "\n")
        return EXIT_FAIL
    new, hrep = hecke_s0(datum)
    moved = s0_move(dynamics_state(datum))
    dist = proj_distance(moved.D[0], plane_point_of(new))
    back, _ = hecke_s0(new)
    roundtrip = max(proj_distance(a, b) for a, b in zip(back.params.points, params.points))
    roundtrip = max(roundtrip, proj_distance(plane_point_of(back), x))
    tol = cfg.tol if cfg.tol is not None else 1e-5
    ok = dist < tol and roundtrip < tol
    out.write(dumps({
        "case": rep,
        "old_params": params.points,
        "new_params": new.params.points,
        "plane_point": x,
        "new_plane_point": plane_point_of(new),
        "cross_oracle_distance": dist,
        "det_at_expected": hrep["det_at_expected"],
        "roundtrip_distance": roundtrip,
        "pass": ok,
    }) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def _pencil_from_json(A, data):
    from .poisson import CommutativePencil
    from .sheaf import TwistedMatrix
    from .sklyanin import GradedElement

    entries = [[GradedElement(A, 1, np.array(_complex_list(e))) for e in row] for row in data["matrix"]]
    offsets = tuple(data.get("row_offsets", [1] * len(entries)))
    return CommutativePencil(A, TwistedMatrix(entries, offsets))


def cmd_pairing(cfg, out):
    from .elliptic import ProjPoint
    from .poisson import (
        CommutativePencil,
        isotrivial_basis,
        isotriviality_certificate,
        NotIsotrivial,
        pairing,
        support,
    )
    from .sheaf import datum_from_plane_point, random_blowup_params, shift_down_at_first

    A = _algebra(cfg)
    rng = np.random.default_rng(cfg.seed + 11)
    if cfg.pencil:
        P = _pencil_from_json(A, cfg.pencil)
    else:
        params = random_blowup_params(A, seed=cfg.seed + 2)
        x = ProjPoint(tuple(rng.standard_normal(3) + 1j * rng.standard_normal(3)))
        datum, _ = datum_from_plane_point(x, params)
        L, _ = shift_down_at_first(datum)
        P = CommutativePencil(A, L)
    zeros = support(P)
    iso = None
    vecs = []
    for given in (cfg.first, cfg.second):
        if given is not None:
            vecs.append(np.array(_complex_list(given)))
        else:
            if iso is None:
                iso = isotrivial_basis(P, zeros)
            vecs.append(iso @ (rng.standard_normal(iso.shape[1]) + 1j * rng.standard_normal(iso.shape[1])))
    a, b = P.from_vector(vecs[0]), P.from_vector(vecs[1])
    try:
        cert = isotriviality_certificate(P, a)
        cert_info = {"global": True, "residual": cert.residual}
    except NotIsotrivial as exc:
        cert = None
        cert_info = {"global": False, "residual": exc.residual}
    res = pairing(P, a, b, certificate=cert, zeros=zeros)
    out.write(dumps({
        "value": res.value,
        "residues": res.residues,
        "support": zeros,
        "certificate": cert_info,
        "quadrature_refinement": res.refinement,
    }) + "\n")
    return EXIT_OK


def cmd_toy(cfg, out):
    from .ore import OrePoly, hecke_verify

    try:
        h = Fraction(cfg.hbar)
        f = OrePoly.from_nested([[Fraction(c) for c in row] for row in cfg.f], h)
        s = Fraction(cfg.s)
        chain = [Fraction(c) for c in cfg.chain]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError("bad rational: %s" % exc)
    fp, rep = hecke_verify(f, s, N=cfg.N, chain=chain)
    out.write(dumps({"f": f.to_nested(), "f_prime": fp.to_nested(), "report": rep, "pass": rep["ok"]}) + "\n")
    return EXIT_OK if rep["ok"] else EXIT_FAIL


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="seed (overrides config)")
    common.add_argument("--precision", choices=["double", "extended"], help="arithmetic precision")
    common.add_argument("--tol", type=float, help="tolerance override")
    common.add_argument("--out", help="output path (default stdout)")
    parser = argparse.ArgumentParser(prog="ncpainleve", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("orbit", parents=[common], help="iterate a word on a seeded state (JSONL)")
    chk = sub.add_parser("check", parents=[common], help="run a verification suite")
    chk.add_argument("suite", help="suite name or 'all'")
    sub.add_parser("sklyanin-info", parents=[common], help="point scheme, translation and central element")
    sub.add_parser("sheaf-s0", parents=[common], help="reflection s0 on a sheaf datum with cross-check")
    sub.add_parser("pairing", parents=[common], help="pairing of two deformations of a pencil")
    sub.add_parser("toy", parents=[common], help="exact root shift in the Ore model")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    overrides = {"seed": args.seed, "precision": args.precision, "tol": args.tol}
    try:
        cfg = load_config(args.command, args.config, overrides)
        out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    except (UsageError, OSError) as exc:
        sys.stderr.write(dumps({"error": "usage", "message": str(exc)}) + "\n")
        return EXIT_USAGE
    try:
        if args.command == "orbit":
            return cmd_orbit(cfg, out)
        if args.command == "check":
            return cmd_check(cfg, out, args.suite)
        if args.command == "sklyanin-info":
            return cmd_sklyanin_info(cfg, out)
        if args.command == "sheaf-s0":
            return cmd_sheaf_s0(cfg, out)
        if args.command == "pairing":
            return cmd_pairing(cfg, out)
        return cmd_toy(cfg, out)
    except UsageError as exc:
        sys.stderr.write(dumps({"error": "usage", "message": str(exc)}) + "\n")
        return EXIT_USAGE
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        out.write(dumps({"error": type(exc).__name__, "message": str(exc), "pass": False}) + "\n")
        return EXIT_FAIL
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
