import csv
import math

import numpy as np
import pytest

from semisplit.controller import (ControllerConfig, MaxStepsExceeded, StepSizeUnderflow, adaptive_integrate,
                                  fixed_integrate, step_factor)
from semisplit.experiments import DEFAULT_STATE, default_grid
from semisplit.grid import make_grid
from semisplit.operators import Problem, ProblemParams
from semisplit.schemes import builtin_scheme
from semisplit.stepper import estimate, step
from helpers import rel, smooth_field


@pytest.fixture(scope="module")
def setup():
    g = default_grid(n=512)
    u = DEFAULT_STATE.evaluate(g)
    return Problem(g, ProblemParams(eps=0.1)), u


def test_config_validation():
    with pytest.raises(ValueError):
        ControllerConfig(tol=0, h_min=1e-3, h_max=1)
    with pytest.raises(ValueError):
        ControllerConfig(tol=1e-6, h_min=1, h_max=0.5)
    with pytest.raises(ValueError):
        ControllerConfig(tol=1e-6, h_min=1e-3, h_max=1, safety=1.5)
    with pytest.raises(ValueError):
        ControllerConfig(tol=1e-6, h_min=1e-3, h_max=1, grow_max=1.0)
    with pytest.raises(ValueError):
        ControllerConfig(tol=1e-6, h_min=1e-3, h_max=1, shrink_min=1.0)
    with pytest.raises(ValueError):
        ControllerConfig(tol=1e-6, h_min=1e-3, h_max=1, max_steps=0)


def test_step_factor():
    cfg = ControllerConfig(tol=1e-6, h_min=1e-6, h_max=1)
    assert step_factor(0.0, 1e-6, 2, cfg) == 4.0
    assert step_factor(1e-6, 1e-6, 2, cfg) == pytest.approx(0.9)
    assert step_factor(1e-6 / 8, 1e-6, 2, cfg) == pytest.approx(1.8)
    assert step_factor(1.0, 1e-6, 2, cfg) == 0.25
    assert step_factor(1e-30, 1e-6, 2, cfg) == 4.0


def test_zero_defect_grows_to_h_max():
    g = make_grid(1, -8, 8, 128)
    u = smooth_field(g, 1)
    P = Problem(g, ProblemParams(eps=0.5, theta=0.0))
    cfg = ControllerConfig(tol=1e-8, h_min=1e-6, h_max=0.25, h_init=1e-3)
    traj = adaptive_integrate(P, builtin_scheme("strang"), u, 0.0, 2.0, cfg)
    assert all(row.accepted for row in traj.trace)
    hs = traj.step_sizes
    assert np.allclose(hs[:5], [1e-3, 4e-3, 1.6e-2, 6.4e-2, 0.25])
    assert np.allclose(hs[4:-1], 0.25, rtol=1e-12)
    assert len(hs) == 4 + math.ceil((2.0 - 0.085) / 0.25)
    assert rel(traj.final, P.flow_A(2.0, u), g) <= 1e-11


def test_estimate_equal_to_tol_is_accepted(setup):
    P, u = setup
    s = builtin_scheme("strang")
    h0 = 0.01
    est = estimate(P, s, h0, u).est_norm
    cfg = ControllerConfig(tol=est, h_min=1e-6, h_max=1.0, h_init=h0)
    traj = adaptive_integrate(P, s, u, 0.0, 0.05, cfg)
    first, second = traj.trace[0], traj.trace[1]
    assert first.accepted and first.est_norm == est
    assert second.h == pytest.approx(0.9 * h0, rel=1e-12)


def test_accepted_steps_respect_tolerance_and_reach_T(setup):
    P, u = setup
    cfg = ControllerConfig(tol=1e-6, h_min=1e-7, h_max=0.5, h_init=1e-3)
    traj = adaptive_integrate(P, builtin_scheme("strang"), u, 0.0, 1.0, cfg, keep_fields=True)
    assert all(r.est_norm <= cfg.tol for r in traj.accepted_steps)
    assert np.all(np.diff(traj.times) > 0)
    assert traj.times[0] == 0.0 and traj.times[-1] == 1.0
    assert len(traj.rejected_counts) == len(traj.accepted_steps) == len(traj.times) - 1
    assert traj.accepted_steps[-1].u_out is traj.final
    assert len(set(np.round(traj.step_sizes, 12))) > 3


def test_adaptive_agrees_with_fixed_run_at_smallest_step(setup):
    P, u = setup
    s = builtin_scheme("strang")
    cfg = ControllerConfig(tol=1e-6, h_min=1e-7, h_max=0.5, h_init=1e-3)
    T = 1.0
    traj = adaptive_integrate(P, s, u, 0.0, T, cfg)
    h_min = float(np.min(traj.step_sizes[:-1]))
    n = math.ceil(T / h_min)
    ref = fixed_integrate(P, s, u, 0.0, T, T / n).final
    steps = len(traj.accepted_steps)
    assert P.grid.l2_norm(traj.final - ref) <= 10 * cfg.tol * steps


def test_tighter_tolerance_never_takes_larger_steps(setup):
    P, u = setup
    s = builtin_scheme("strang")
    largest = []
    for tol in [1e-4, 5e-5, 2.5e-5, 1.25e-5, 6.25e-6]:
        cfg = ControllerConfig(tol=tol, h_min=1e-7, h_max=0.5, h_init=1e-3)
        traj = adaptive_integrate(P, s, u, 0.0, 1.0, cfg)
        largest.append(float(np.max(traj.step_sizes[:-1])))
    assert all(b <= a for a, b in zip(largest, largest[1:]))


def test_rejected_step_is_redone_from_same_state(setup):
    P, u = setup
    s = builtin_scheme("strang")
    cfg = ControllerConfig(tol=1e-7, h_min=1e-7, h_max=0.5, h_init=0.4)
    traj = adaptive_integrate(P, s, u, 0.0, 0.5, cfg)
    assert not traj.trace[0].accepted
    assert traj.rejected_counts[0] >= 1
    first_ok = next(r for r in traj.trace if r.accepted)
    assert first_ok.time == 0.0 and first_ok.rejected_count == traj.rejected_counts[0]
    assert first_ok.h < 0.4
    assert np.allclose(step(P, s, first_ok.h, u), adaptive_integrate(
        P, s, u, 0.0, first_ok.h, ControllerConfig(tol=1, h_min=first_ok.h, h_max=first_ok.h)).final)


def test_underflow_reports_time(setup):
    P, u = setup
    cfg = ControllerConfig(tol=1e-15, h_min=1e-2, h_max=0.5, h_init=1e-2)
    with pytest.raises(StepSizeUnderflow) as info:
        adaptive_integrate(P, builtin_scheme("lie"), u, 0.0, 1.0, cfg)
    assert info.value.time == 0.0
    assert "t=0.0" in str(info.value)


def test_max_steps(setup):
    P, u = setup
    cfg = ControllerConfig(tol=1e-3, h_min=1e-4, h_max=1e-3, max_steps=3)
    with pytest.raises(MaxStepsExceeded):
        adaptive_integrate(P, builtin_scheme("strang"), u, 0.0, 1.0, cfg)


def test_rejects_empty_interval(setup):
    P, u = setup
    with pytest.raises(ValueError):
        adaptive_integrate(P, builtin_scheme("strang"), u, 1.0, 1.0, ControllerConfig(1e-6, 1e-6, 1))


def test_trace_csv(setup, tmp_path):
    P, u = setup
    cfg = ControllerConfig(tol=1e-7, h_min=1e-7, h_max=0.5, h_init=0.3)
    traj = adaptive_integrate(P, builtin_scheme("strang"), u, 0.0, 0.4, cfg)
    path = tmp_path / "trace.csv"
    traj.write_trace_csv(path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["time", "h", "est_norm", "accepted", "rejected_count"]
    assert len(rows) == len(traj.trace) + 1
    assert {r[3] for r in rows[1:]} == {"0", "1"}
    assert float(rows[-1][0]) + float(rows[-1][1]) == pytest.approx(0.4)


def test_observer_sees_every_accepted_step(setup):
    P, u = setup
    seen = []
    cfg = ControllerConfig(tol=1e-6, h_min=1e-7, h_max=0.5, h_init=1e-3)
    traj = adaptive_integrate(P, builtin_scheme("yoshida4"), u, 0.0, 0.3, cfg,
                              observer=lambda t, v: seen.append(t))
    assert seen == traj.times[1:]


def test_fixed_integrate_basics(setup):
    P, u = setup
    s = builtin_scheme("ruth3")
    one = fixed_integrate(P, s, u, 0.0, 0.1, 0.1)
    assert np.array_equal(one.final, step(P, s, 0.1, u))
    calls = []
    traj = fixed_integrate(P, s, u, 0.5, 1.0, 0.1, observer=lambda t, v: calls.append(t))
    assert len(calls) == 5 and traj.times[-1] == 1.0 and calls[-1] == 1.0
    with pytest.raises(ValueError):
        fixed_integrate(P, s, u, 0.0, 1.0, 0.3)


def test_fixed_integrate_free_linear_is_exact():
    g = make_grid(1, -8, 8, 256)
    u = smooth_field(g, 2)
    P = Problem(g, ProblemParams(eps=0.3, theta=0.0))
    out = fixed_integrate(P, builtin_scheme("yoshida4"), u, 0.0, 1.0, 0.01).final
    assert rel(out, P.flow_A(1.0, u), g) <= 1e-11
