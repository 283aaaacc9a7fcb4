"""CSV data behind the four trajectory figures."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .expr import Binding, as_expr, evaluate
from .kinematics import (
    EXCLUSION_RADIUS,
    FIG1,
    FIG3,
    FamilyParams,
    blowup_line,
    blowup_surface,
    integrate_trajectory,
    moving_plane,
    plane_intersection,
    separating_plane,
    world_line,
)

TRAJ_HEADER = "t,x,y,z,u,v,w,rho,P,S"
MESH_HEADER = "y0,z0,x,y,z"


@dataclass(frozen=True)
class FigureSpec:
    family: str
    params: FamilyParams
    labels: tuple
    span: tuple


def _with_f(p: FamilyParams) -> FamilyParams:
    # the figures do not fix f; pressure columns use f = 0
    return FamilyParams(p.a, p.b, p.gamma, p.rho0, p.phi, p.f if p.f is not None else "0")


FIGURES = {
    1: FigureSpec("isochoric", _with_f(FIG1), ((5, -2, 1), (1, 1, 1), (Fraction(11, 3), 2, 2)), (-3, 3)),
    2: FigureSpec("isochoric", _with_f(FIG1), ((1, 1, 1), (1, 1, -2)), (0, 1)),
    3: FigureSpec("blowup", _with_f(FIG3), ((3, -2, 0), (1, 1, 1), (-1, 1, -1)), (-3, 3)),
    4: FigureSpec("blowup", _with_f(FIG3), ((1, 1, 1), (-2, 1, 1), (0, 1, 1)), (-2, 2)),
}


def trajectory_rows(family, label, params: FamilyParams, t0: float, t1: float, step: float = 1e-3, stride: int = 10,
                    exclusion: float = EXCLUSION_RADIUS) -> np.ndarray:
    """RK4 samples over [t0, t1]; blow-up runs skip |t| < exclusion and start on the closed form."""
    g = params.fields(family)
    wl = world_line(family, label, params)
    pieces = []
    if family == "isochoric":
        anchors = [(0.0, hi) for hi in (t0, t1) if hi != 0]
    else:
        anchors = []
        if t0 < -exclusion:
            anchors.append((-exclusion, t0))
        if t1 > exclusion:
            anchors.append((exclusion, t1))
    for start_t, end_t in anchors:
        start = wl.values([start_t])[0]
        full = integrate_trajectory(g, start, start_t, end_t, step).rows
        run = full[::stride]
        if run[-1, 0] != full[-1, 0]:
            run = np.vstack([run, full[-1]])
        pieces.append(run)
    rows = np.vstack([p[::-1] if p[-1, 0] < p[0, 0] else p for p in pieces])
    order = np.argsort(rows[:, 0], kind="stable")
    rows = rows[order]
    keep = np.concatenate([[True], np.diff(rows[:, 0]) > 0])
    return rows[keep]


def write_csv(path: Path, header: str, rows: np.ndarray) -> Path:
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for r in rows:
            fh.write(",".join(format(float(v), ".17g") for v in r) + "\n")
    return path


def _fmt(v):
    return str(v) if isinstance(v, (Fraction, int)) else v


def _moving_plane_mesh(tv, y0, params: FamilyParams, xs, z0s) -> np.ndarray:
    """Points of the moving plane at time tv, parametrised by (x, z0)."""
    wl = world_line("isochoric", ("x0", y0, "z0"), params)
    rows = []
    for z0 in z0s:
        y = float(evaluate(wl.y, Binding({"t": Fraction(tv), "z0": Fraction(z0)})))
        z = float(evaluate(wl.z, Binding({"t": Fraction(tv), "z0": Fraction(z0)})))
        for x in xs:
            rows.append((float(y0), float(z0), float(x), y, z))
    return np.array(rows)


def emit_figure_data(fig_id: int, out_dir, step: float = 1e-3, stride: int = 10, grid: int = 41) -> list:
    if fig_id not in FIGURES:
        raise ValueError(f"unknown figure id {fig_id!r}; expected 1-4")
    spec = FIGURES[fig_id]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = spec.params
    files = []
    manifest = {
        "figure": fig_id,
        "family": spec.family,
        "params": {"a": _fmt(p.a), "b": _fmt(p.b), "gamma": _fmt(p.gamma), "rho0": _fmt(p.rho0), "phi": p.phi, "f": p.f},
        "span": list(spec.span),
        "step": step,
        "files": [],
    }

    def record(path, kind, **info):
        files.append(path)
        manifest["files"].append({"file": path.name, "kind": kind, **info})

    for i, lab in enumerate(spec.labels, 1):
        rows = trajectory_rows(spec.family, lab, p, spec.span[0], spec.span[1], step, stride)
        path = write_csv(out / f"fig{fig_id}_trajectory_{i}.csv", TRAJ_HEADER, rows)
        record(path, "trajectory", label=[_fmt(v) for v in lab])

    if fig_id == 2:
        xs = np.linspace(-1.0, 4.0, grid)
        z0s = np.linspace(-3.0, 2.0, grid)
        for tv in (0, 1):
            mesh = _moving_plane_mesh(tv, 1, p, xs, z0s)
            record(write_csv(out / f"fig2_plane_t{tv}.csv", MESH_HEADER, mesh), "moving-plane", t=tv, y0=1)
        line = plane_intersection(moving_plane(0, 1, p), separating_plane(0, p))
        pts = np.array([[float(c) for c in line.point]]) + np.outer(np.linspace(-1.0, 4.0, grid) - float(line.point[0]),
                                                                        [float(c) / float(line.direction[0]) for c in line.direction])
        rows = np.column_stack([np.full(grid, 1.0), np.full(grid, float(line.point[2])), pts])
        record(write_csv(out / "fig2_separating_line.csv", MESH_HEADER, rows), "separating-line", t=0)

    if fig_id == 4:
        surf = blowup_surface(p, n=grid)
        record(write_csv(out / "fig4_blowup_surface.csv", MESH_HEADER, surf), "blowup-surface")
        u0s = np.linspace(-3.0, 3.0, grid)
        y0, z0 = spec.labels[0][1], spec.labels[0][2]
        for tv in (-2, 2):
            line = blowup_line(y0, z0, tv, p)
            base = np.array([float(evaluate(as_expr(c), Binding())) for c in line.point])
            d = np.array([float(evaluate(as_expr(c), Binding())) for c in line.direction])
            pts = base + np.outer(u0s, d)
            rows = np.column_stack([np.full(grid, float(y0)), np.full(grid, float(z0)), pts])
            record(write_csv(out / f"fig4_line_t{tv}.csv", MESH_HEADER, rows), "blowup-line", t=tv)

    mpath = out / f"fig{fig_id}_manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    files.append(mpath)
    return files


__all__ = ["FIGURES", "FigureSpec", "MESH_HEADER", "TRAJ_HEADER", "emit_figure_data", "trajectory_rows", "write_csv"]
