import json

import numpy as np
import pytest

from gdsym import kinematics as km
from gdsym.figures import FIGURES, MESH_HEADER, TRAJ_HEADER, emit_figure_data


@pytest.fixture(scope="module")
def out(tmp_path_factory):
    d = tmp_path_factory.mktemp("figs")
    for i in (1, 2, 3, 4):
        emit_figure_data(i, d)
    return d


def load(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def test_unknown_id(tmp_path):
    with pytest.raises(ValueError):
        emit_figure_data(5, tmp_path)


def test_csv_format(out):
    raw = (out / "fig1_trajectory_1.csv").read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == TRAJ_HEADER
    # 17 significant digits round-trip every float
    assert all(float(v) == np.float64(v) for v in lines[7].split(","))
    assert (out / "fig4_blowup_surface.csv").read_text().splitlines()[0] == MESH_HEADER


@pytest.mark.parametrize("fig", [1, 2, 3, 4])
def test_trajectories_follow_world_lines(out, fig):
    spec = FIGURES[fig]
    for i, lab in enumerate(spec.labels, 1):
        rows = load(out / f"fig{fig}_trajectory_{i}.csv")
        t = rows[:, 0]
        assert np.all(np.diff(t) > 0)
        assert t[0] == pytest.approx(spec.span[0]) and t[-1] == pytest.approx(spec.span[1])
        if spec.family == "blowup":
            assert np.all(np.abs(t) >= km.EXCLUSION_RADIUS - 1e-12)
        exact = km.world_line(spec.family, lab, spec.params).values(t)
        assert np.max(np.abs(rows[:, 1:4] - exact)) < 1e-6


def test_fig2_planes_and_line(out):
    t0 = load(out / "fig2_plane_t0.csv")
    assert t0.shape == (41 * 41, 5) and np.all(t0[:, 3] == 1)
    t1 = load(out / "fig2_plane_t1.csv")
    # y - (b/a)(z + gamma t^2 / (2 a rho0)) t = y0 at t = 1
    lhs = t1[:, 3] - 0.75 * (t1[:, 4] + 0.625)
    np.testing.assert_allclose(lhs, 1.0, atol=1e-12)
    line = load(out / "fig2_separating_line.csv")
    assert np.all(line[:, 3] == 1) and np.all(line[:, 4] == 0)


def test_fig4_lines_parallel_to_ox(out):
    for tv in (-2, 2):
        rows = load(out / f"fig4_line_t{tv}.csv")
        assert np.ptp(rows[:, 3]) == 0 and np.ptp(rows[:, 4]) == 0
        ends = [km.world_line("blowup", lab, FIGURES[4].params).values([tv])[0] for lab in FIGURES[4].labels]
        for e in ends:
            np.testing.assert_allclose(e[1:], rows[0, 3:], atol=1e-12)


def test_manifest(out):
    m = json.loads((out / "fig1_manifest.json").read_text())
    assert m["params"]["a"] == "4/5" and m["params"]["phi"] == "arg1 + arg2"
    assert [f["label"] for f in m["files"] if f["kind"] == "trajectory"][2] == ["11/3", "2", "2"]
    m4 = json.loads((out / "fig4_manifest.json").read_text())
    assert {f["kind"] for f in m4["files"]} == {"trajectory", "blowup-surface", "blowup-line"}
