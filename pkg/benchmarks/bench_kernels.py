"""Compiled vs pure-Python kernels on the two hot paths: field evaluation and RK4."""
import argparse
import json
import sys
import time

import numpy as np

from gdsym import _kernels_py
from gdsym.expr.compile import compile_exprs
from gdsym.kinematics import FIG3, world_line

try:
    from gdsym import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run(points=20000, steps=20000, repeat=3):
    g = FIG3.fields("blowup").bind(f="arg1^3")
    fields = compile_exprs([g.concrete(e) for _, e in g.items()], ["t", "x", "y", "z"])
    vel = compile_exprs([g.concrete(e) for e in g.velocity], ["t", "x", "y", "z"])
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.uniform(0.1, 3, points), rng.uniform(-2, 2, (points, 3))])
    start = world_line("blowup", (1, 1, 1), FIG3).values([0.1])[0]
    h = 2.9 / steps

    backends = {"python": _kernels_py}
    if _kernels_c is not None:
        backends["cython"] = _kernels_c
    out = {"points": points, "steps": steps, "results": {}}
    ref = None
    for name, k in backends.items():
        ev = _best(lambda: k.eval_points(fields.ops, fields.args, fields.consts, fields.offsets, pts), repeat)
        rk = _best(lambda: k.rk4(vel.ops, vel.args, vel.consts, vel.offsets, 0.1, start, h, steps), repeat)
        vals = k.eval_points(fields.ops, fields.args, fields.consts, fields.offsets, pts)
        if ref is None:
            ref = vals
        out["results"][name] = {"eval_points_s": ev, "rk4_s": rk, "max_abs_diff_vs_python": float(np.max(np.abs(vals - ref)))}
    if "cython" in out["results"]:
        py, cy = out["results"]["python"], out["results"]["cython"]
        out["speedup"] = {"eval_points": py["eval_points_s"] / cy["eval_points_s"], "rk4": py["rk4_s"] / cy["rk4_s"]}
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    res = run(args.points, args.steps, args.repeat)
    json.dump(res, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
