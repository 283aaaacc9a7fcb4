"""``gdsym`` command line: verification suites, trajectory simulation, figure data."""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np

from .expr import ExprError, ZeroPolicy
from .report import Report

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {"seed": 0, "samples": 20, "tol": {"symbolic": 1e-10, "ode": 1e-6}}

_num = {"type": ["number", "string"]}
CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "samples": {"type": "integer", "minimum": 1},
        "tol": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "symbolic": {"type": "number", "exclusiveMinimum": 0},
                "ode": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "family": {"enum": ["isochoric", "blowup"]},
        "a": _num,
        "b": _num,
        "gamma": {"enum": [0, 1]},
        "rho0": _num,
        "phi": {"type": "string"},
        "f": {"type": "string"},
        "out": {"type": "string"},
        "catalog": {"type": "string"},
    },
}


class UsageError(Exception):
    pass


def load_config(path=None) -> dict:
    """Validated run configuration with defaults filled in."""
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path)
        raise UsageError(f"config schema violation at /{where}: {exc.message}") from exc
    cfg = {**DEFAULTS, **data}
    cfg["tol"] = {**DEFAULTS["tol"], **data.get("tol", {})}
    return cfg


def _rational(text) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _triple(text) -> tuple:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return tuple(_rational(p) for p in parts)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--samples", type=int, default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="print the JSON report")

    p = argparse.ArgumentParser(prog="gdsym", parents=[common], description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    vs = v.add_subparsers(dest="suite", required=True)
    for name in ("commutators", "jacobi", "automorphisms", "reduction", "symmetries"):
        vs.add_parser(name, parents=[common])
    sa = vs.add_parser("subalgebras", parents=[common])
    sa.add_argument("--id", dest="ident")
    sa.add_argument("--catalog", default=argparse.SUPPRESS)
    so = vs.add_parser("solution", parents=[common])
    so.add_argument("--family", choices=("isochoric", "blowup"), default=argparse.SUPPRESS)
    so.add_argument("--gamma", type=int, choices=(0, 1), default=argparse.SUPPRESS)
    so.add_argument("--phi", default=argparse.SUPPRESS)
    so.add_argument("--f", default=argparse.SUPPRESS)

    s = sub.add_parser("simulate", parents=[common], help="integrate one particle path with RK4")
    s.add_argument("--family", choices=("isochoric", "blowup"), default=argparse.SUPPRESS)
    s.add_argument("--label", type=_triple, required=True)
    for name in ("a", "b", "rho0"):
        s.add_argument(f"--{name}", type=_rational, default=argparse.SUPPRESS)
    s.add_argument("--gamma", type=int, choices=(0, 1), default=argparse.SUPPRESS)
    s.add_argument("--phi", default=argparse.SUPPRESS)
    s.add_argument("--f", default=argparse.SUPPRESS)
    s.add_argument("--t0", type=float, required=True)
    s.add_argument("--t1", type=float, required=True)
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("--out", default=argparse.SUPPRESS)

    fg = sub.add_parser("figure", parents=[common], help="write CSV data for one figure")
    fg.add_argument("--id", dest="fig_id", type=int, required=True)
    fg.add_argument("--out", default=argparse.SUPPRESS)
    return p


def _policy(cfg) -> ZeroPolicy:
    return ZeroPolicy(samples=cfg["samples"], seed=cfg["seed"])


def _verify(suite: str, cfg: dict) -> Report:
    from . import catalog, gas, lie

    policy = _policy(cfg)
    if suite == "commutators":
        return lie.verify_commutators(policy)
    if suite == "jacobi":
        return lie.verify_jacobi(lie.reference_table(), seed=cfg["seed"])
    if suite == "automorphisms":
        return lie.verify_automorphisms(lie.reference_table(), draws=cfg["samples"], seed=cfg["seed"])
    if suite == "reduction":
        return gas.verify_reduction(policy=policy)
    if suite == "symmetries":
        return gas.verify_symmetries(policy)
    if suite == "subalgebras":
        try:
            entries = catalog.load_catalog(cfg.get("catalog"))
        except (OSError, catalog.CatalogError) as exc:
            raise UsageError(f"catalog: {exc}") from exc
        chosen = catalog.select(entries, cfg.get("ident"))
        if not chosen:
            raise UsageError(f"no catalog entry matches id {cfg.get('ident')!r}")
        rep = catalog.verify_catalog(chosen, policy=policy)
        if cfg.get("ident"):
            rep.suite = f"subalgebras/{cfg['ident']}"
        return rep
    if suite == "solution":
        if "family" not in cfg:
            raise UsageError("verify solution needs --family")
        return gas.verify_solution(cfg["family"], gamma=cfg.get("gamma"), phi=cfg.get("phi"), f=cfg.get("f"),
                                   policy=policy, tol=cfg["tol"]["symbolic"])
    raise UsageError(f"unknown suite {suite!r}")


def _family_params(cfg):
    from .kinematics import FIG1, FIG3, FamilyParams

    base = FIG1 if cfg["family"] == "isochoric" else FIG3
    get = lambda k, d: Fraction(str(cfg[k])) if k in cfg else d  # noqa: E731
    return FamilyParams(get("a", base.a), get("b", base.b), cfg.get("gamma", base.gamma), get("rho0", base.rho0),
                        cfg.get("phi", base.phi), cfg.get("f", "0"))


def _simulate(cfg: dict, label) -> tuple:
    from .figures import TRAJ_HEADER, write_csv
    from .kinematics import TrajectoryError, integrate_trajectory, world_line

    if "family" not in cfg:
        raise UsageError("simulate needs --family")
    params = _family_params(cfg)
    if params.a == 0:
        raise UsageError("a must be nonzero")
    try:
        g = params.fields(cfg["family"])
        start = world_line(cfg["family"], label, params).values([cfg["t0"]])[0]
        run = integrate_trajectory(g, start, cfg["t0"], cfg["t1"], cfg["step"])
    except (TrajectoryError, ExprError, ZeroDivisionError, ValueError) as exc:
        raise UsageError(f"simulate: {exc}") from exc
    exact = world_line(cfg["family"], label, params).values(run.t)
    err = float(np.max(np.abs(run.positions - exact)))
    rep = Report(f"simulate/{cfg['family']}", cfg["seed"])
    rep.add("closed-form agreement", err < cfg["tol"]["ode"], f"max |x - x_exact| = {err:.3g}",
            rows=len(run.rows), step=run.step, backend=run.backend)
    if "out" in cfg:
        write_csv(Path(cfg["out"]), TRAJ_HEADER, run.rows)
        csv_text = None
    else:
        csv_text = TRAJ_HEADER + "\n" + "".join(",".join(format(float(v), ".17g") for v in r) + "\n" for r in run.rows)
    return rep, csv_text


def _figure(cfg: dict, fig_id: int) -> Report:
    from .figures import emit_figure_data

    if fig_id not in (1, 2, 3, 4):
        raise UsageError(f"unknown figure id {fig_id}; expected 1-4")
    out = cfg.get("out", f"figure{fig_id}")
    rep = Report(f"figure/{fig_id}", cfg["seed"])
    with rep.timed("export") as r:
        files = emit_figure_data(fig_id, out)
        r["ok"] = True
        r["verdict"] = f"{len(files)} files"
        r["files"] = sorted(Path(f).name for f in files)
    return rep


def _emit(rep: Report, as_json: bool, stream) -> None:
    stream.write((rep.dumps() if as_json else rep.table()) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    args = vars(ns)
    try:
        cfg = load_config(args.pop("config", None))
        for k in ("seed", "samples"):
            if k in args:
                cfg[k] = args.pop(k)
        if cfg["samples"] < 1:
            raise UsageError("--samples must be at least 1")
        as_json = args.pop("json", False)
        command = args.pop("command")
        if command == "verify":
            suite = args.pop("suite")
            cfg.update(args)
            rep = _verify(suite, cfg)
        elif command == "simulate":
            label = args.pop("label")
            cfg.update(args)
            rep, csv_text = _simulate(cfg, label)
            if csv_text is not None:
                sys.stdout.write(csv_text)
                _emit(rep, as_json, sys.stderr)
                return EXIT_OK if rep.ok else EXIT_FAIL
        else:
            fig_id = args.pop("fig_id")
            cfg.update(args)
            rep = _figure(cfg, fig_id)
    except UsageError as exc:
        print(f"gdsym: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(rep, as_json, sys.stdout)
    return EXIT_OK if rep.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
