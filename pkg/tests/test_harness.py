import json
import math
import os

import numpy as np
import pytest

from semisplit import cli
from semisplit.experiments import (DEFAULT_STATE, LaserConfig, RECORD_COLUMNS, ScanRecord, UnresolvedStateError,
                                   check_resolution, default_grid, dyadic_times, emit, eps_scan, fit_slope,
                                   global_error_scan, global_reference_step, laser_beam, load_records,
                                   noise_floor, observed_orders, order_scan, read_snapshot, resolution_change,
                                   scan_slope, wkb_scan, write_snapshot)
from semisplit.grid import make_grid
from semisplit.states import InitialState

NAN = float("nan")


def sample_records():
    return [ScanRecord("strang", 1.0, 0.0625, 1.25e-5, 3.0e-9, None),
            ScanRecord("strang", 1.0, 0.03125, 1.5625e-6, 1.0e-10, 3.0),
            ScanRecord("lie", 0.1, 0.1, 0.1 + 0.2, NAN, NAN)]


# serialisation

@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_emit_empty(tmp_path, fmt):
    path = tmp_path / f"out.{fmt}"
    emit([], path, fmt)
    text = path.read_text()
    if fmt == "csv":
        assert text == ",".join(RECORD_COLUMNS) + "\n"
    else:
        assert json.loads(text) == []
    assert load_records(path) == []


def test_emit_one_record_csv(tmp_path):
    path = tmp_path / "one.csv"
    emit(sample_records()[:1], path)
    lines = path.read_text().splitlines()
    assert lines == ["scheme,eps,t,local_error,est_deviation,observed_order",
                     "strang,1.0,0.0625,1.25e-05,3e-09,"]


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip(tmp_path, fmt):
    path = tmp_path / f"recs.{fmt}"
    recs = sample_records()
    emit(recs, path, fmt)
    back = load_records(path)
    assert back == recs
    assert back[2].local_error == 0.1 + 0.2
    assert back[0].observed_order is None
    assert math.isnan(back[2].est_deviation)


def test_json_layout(tmp_path):
    path = tmp_path / "recs.json"
    emit(sample_records(), path, "json")
    rows = json.loads(path.read_text())
    assert [list(r) for r in rows] == [list(RECORD_COLUMNS)] * 3
    assert rows[0]["observed_order"] is None


def test_bad_format(tmp_path):
    with pytest.raises(ValueError):
        emit([], tmp_path / "x.txt", "txt")
    with pytest.raises(ValueError):
        load_records(tmp_path / "x.txt")


def test_scan_output_is_deterministic(tmp_path):
    grid = default_grid(n=512)
    ts = dyadic_times(2.0**-4, 2.0**-7)
    paths = []
    for i in range(2):
        p = tmp_path / f"run{i}.csv"
        emit(order_scan(["strang", "yoshida4"], 1.0, ts, grid=grid), p)
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()


# helpers

def test_dyadic_times():
    assert dyadic_times(1.0, 0.125) == [1.0, 0.5, 0.25, 0.125]
    assert dyadic_times(1.0, 0.2) == [1.0, 0.5, 0.25]
    with pytest.raises(ValueError):
        dyadic_times(0.1, 1.0)


def test_observed_orders():
    out = observed_orders([1.0, 0.5, 0.25], [8.0, 1.0, 0.0])
    assert out[0] is None and out[1] == pytest.approx(3.0) and math.isnan(out[2])


def test_fit_slope_drops_floor_points():
    ts = [1.0, 0.5, 0.25, 0.125, 0.0625]
    vals = [1.0, 0.125, 0.015625, 1e-14, 1e-14]
    assert fit_slope(ts, vals, floor=1e-12) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        fit_slope(ts, vals, floor=0.1)


def test_global_reference_step():
    h = global_reference_step(0.5, 1 / 250, [2.0**-5, 2.0**-13])
    assert h == 2.0**-14
    assert global_reference_step(0.5, 1.0, [0.125]) == 0.0625


def test_resolution_change_skips_floor():
    a = [ScanRecord("lie", 1.0, 0.1, 1e-3, 0.0), ScanRecord("lie", 1.0, 0.05, 1e-15, 0.0)]
    b = [ScanRecord("lie", 1.0, 0.1, 1.001e-3, 0.0), ScanRecord("lie", 1.0, 0.05, 3e-15, 0.0)]
    assert resolution_change(a, b, floor=1e-12) == pytest.approx(1e-3 / 1.001, rel=1e-6)
    with pytest.raises(ValueError):
        resolution_change(a, b[:1])


# resolution guards

def test_unresolved_state():
    grid = make_grid(1, -8, 8, 2048)
    with pytest.raises(UnresolvedStateError):
        check_resolution(grid, InitialState("gaussian", {"center": 0.5, "width": 2.0}).evaluate(grid))
    with pytest.raises(UnresolvedStateError):
        order_scan(["strang"], 1.0, [0.1, 0.05], state=InitialState("gaussian", {"width": 0.05}),
                   grid=default_grid(n=256))


def test_wkb_needs_enough_points():
    with pytest.raises(UnresolvedStateError, match="wavelength"):
        wkb_scan(["strang"], 1e-2, [0.01, 0.005], grid=default_grid(n=2048))


def test_initial_states():
    grid = default_grid()
    assert DEFAULT_STATE.boundary_mass(grid) <= 1e-10
    with pytest.raises(ValueError):
        InitialState("sech")


# scans

def test_strang_observed_order_is_three():
    grid = default_grid()
    ts = dyadic_times(2.0**-4, 2.0**-12)
    recs = order_scan(["strang"], 1.0, ts, grid=grid)
    floor = noise_floor(grid, DEFAULT_STATE.evaluate(grid))
    orders = [r.observed_order for r in recs[1:] if r.t <= 1e-2 and r.local_error > 10 * floor]
    assert len(orders) >= 3
    assert all(2.75 <= o <= 3.25 for o in orders)


def test_strang_has_no_kink_at_small_eps():
    ts = [1e-2 * 2.0**k for k in range(4, -7, -2)]
    recs = order_scan(["strang"], 1e-2, ts)
    upper = scan_slope([r for r in recs if r.t >= 1e-2])
    lower = scan_slope([r for r in recs if r.t <= 1e-2])
    assert abs(lower - 3.0) <= 0.25
    assert upper >= 2.75


def test_eps_scan_runs_along_diagonal():
    recs = eps_scan(["lie"], [0.5, 0.25, 0.125, 0.0625])
    assert [r.t for r in recs] == [r.eps for r in recs]
    assert scan_slope(recs) == pytest.approx(2.0, abs=0.2)


def test_global_scan_order_two_at_unit_eps():
    hs = [2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6]
    recs = global_error_scan("strang", 1.0, hs)
    errs = [r.local_error for r in recs]
    assert all(math.isnan(r.est_deviation) for r in recs)
    assert scan_slope(recs) == pytest.approx(2.0, abs=0.1)
    assert errs[-1] / errs[-2] == pytest.approx(0.25, rel=0.05)


def test_global_scan_rejects_non_dividing_step():
    with pytest.raises(ValueError):
        global_error_scan("strang", 1.0, [0.3], T=0.5)


@pytest.mark.slow
def test_global_scan_stagnates_above_eps():
    eps = 1 / 250
    hs = [2.0**-k for k in range(5, 14)]
    recs = global_error_scan("strang", eps, hs)
    coarse = [r for r in recs if r.t >= 2.0**-7]
    fine = [r for r in recs if r.t <= eps / 2]
    assert len(coarse) == 3
    assert all(r.local_error > 0.1 for r in coarse)
    assert all(o <= 0.75 for o in (r.observed_order for r in coarse[1:]))
    assert scan_slope(fine) == pytest.approx(2.0, abs=0.25)


# snapshots and laser runs

def test_snapshot_round_trip(tmp_path):
    grid = make_grid(2, -1, 1, (4, 8))
    u = np.arange(32).reshape(4, 8) + 1j * np.arange(32, 64).reshape(4, 8)
    bin_path, side = write_snapshot(tmp_path / "field", u, grid, z=0.5)
    assert bin_path.endswith("field.bin") and side.endswith("field.json")
    raw = np.fromfile(bin_path, dtype="<f8")
    assert raw[:4].tolist() == [0.0, 32.0, 1.0, 33.0]
    back, info = read_snapshot(bin_path)
    assert np.array_equal(back, u)
    assert info["dtype"] == "float64-le-pairs" and info["layout"] == "C"
    assert info["shape"] == [4, 8] and info["grid"]["n"] == [4, 8] and info["z"] == 0.5


@pytest.fixture(scope="module")
def psi1():
    return laser_beam(LaserConfig())


def test_laser_nodal_line_stays_zero(psi1):
    assert psi1.nodal_residual() <= 1e-8
    assert psi1.norm_drift() <= 1e-10


def test_laser_steps_adapt(psi1):
    traj = psi1.trajectory
    assert traj.times[-1] == psi1.config.T
    assert len(set(np.round(traj.step_sizes, 12))) > 3
    assert all(r.est_norm <= psi1.config.tol for r in traj.accepted_steps)
    assert psi1.slices.shape == (len(traj.times), psi1.config.n)


def test_laser_plain_gaussian():
    res = laser_beam(LaserConfig(state="plain_gaussian", T=1.0))
    assert res.norm_drift() <= 1e-10
    assert all(r.est_norm <= res.config.tol for r in res.trajectory.accepted_steps)
    with pytest.raises(ValueError):
        laser_beam(LaserConfig(T=0.01, axis=0)).nodal_residual()


def test_laser_config_validation():
    with pytest.raises(ValueError):
        LaserConfig(state="wkb")
    with pytest.raises(ValueError):
        LaserConfig(axis=2)


def test_laser_write(tmp_path, psi1):
    out = tmp_path / "laser"
    written = psi1.write(out, "json")
    names = sorted(os.path.basename(p) for p in written)
    assert names == ["final.bin", "final.json", "slices.bin", "slices.json", "trace.json"]
    slices, info = read_snapshot(out / "slices.bin")
    assert np.array_equal(slices, psi1.slices)
    assert len(info["z"]) == slices.shape[0] and len(info["line"]) == slices.shape[1]


# command line

def run_cli(*argv):
    return cli.main([str(a) for a in argv])


@pytest.mark.parametrize("command,extra", [
    ("order-scan", ["--scheme", "lie,strang", "--t-max", 0.0625, "--t-min", 0.0078125]),
    ("eps-scan", ["--eps", "0.5,0.25,0.125"]),
    ("wkb-scan", ["--eps", 0.05, "--grid-n", 1024, "--t-max", 0.0625, "--t-min", 0.0078125]),
    ("global-scan", ["--eps", 1.0, "--t-max", 0.125, "--t-min", 0.03125]),
])
@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_cli_scans(tmp_path, capsys, command, extra, fmt):
    out = tmp_path / f"out.{fmt}"
    args = [command, "--out", out, "--format", fmt] + extra
    if command != "wkb-scan":
        args += ["--grid-n", 512]
    assert run_cli(*args) == 0
    recs = load_records(out)
    assert recs
    assert "slope" in capsys.readouterr().out


def test_cli_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scheme": "ruth3", "eps": 0.5, "grid": {"n": 512},
                               "t_max": 0.125, "t_min": 0.03125}))
    out = tmp_path / "o.csv"
    assert run_cli("order-scan", "--config", cfg, "--eps", 1.0, "--out", out) == 0
    recs = load_records(out)
    assert {r.scheme for r in recs} == {"ruth3"}
    assert {r.eps for r in recs} == {1.0}
    assert len(recs) == 3


def test_cli_errors(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"schemes": ["lie"]}))
    assert run_cli("order-scan", "--config", cfg, "--out", tmp_path / "o.csv") == 1
    assert "unknown config keys" in capsys.readouterr().err
    assert run_cli("order-scan", "--tol", 1e-6, "--out", tmp_path / "o.csv") == 1
    assert run_cli("wkb-scan", "--eps", 1e-3, "--out", tmp_path / "o.csv") == 1
    assert "wavelength" in capsys.readouterr().err
    assert run_cli("global-scan", "--scheme", "lie,strang", "--out", tmp_path / "o.csv") == 1


def test_cli_laser(tmp_path, capsys):
    out = tmp_path / "beam"
    assert run_cli("laser-beam", "--grid-n", 64, "--t-max", 0.5, "--tol", 1e-5, "--scheme", "strang",
                   "--out", out) == 0
    text = capsys.readouterr().out
    assert "accepted" in text
    final, info = read_snapshot(out / "final.bin")
    assert final.shape == (64, 64)
    assert info["config"]["scheme"] == "strang" and info["z"] == 0.5
    assert (out / "trace.csv").exists()
