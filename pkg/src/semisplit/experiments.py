"""Convergence scans, the 2D laser-beam run, and result serialisation.

All scans share one ground truth for the local error, :func:`reference_flow`.
Records come out ordered by scheme (as given) and then by decreasing t.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from .controller import ControllerConfig, Trajectory, adaptive_integrate, fixed_integrate
from .grid import Grid, make_grid
from .operators import Problem, ProblemParams
from .schemes import SplittingScheme, builtin_scheme, reference_scheme
from .states import InitialState, wkb
from .stepper import estimate, reference_flow

# 1D box wide enough that the default Gaussian is below 1e-10 at the seam
DEFAULT_DOMAIN = (-10.0, 10.0)
DEFAULT_N_1D = 2048
DEFAULT_N_WKB = 4096
LASER_DOMAIN = (-8.0, 8.0)
DEFAULT_N_2D = 128
DEFAULT_STATE = InitialState("gaussian", {"center": 0.0, "width": 2.0})
RESOLUTION_TOL = 1e-10
WKB_POINTS_PER_WAVELENGTH = 8
NOISE_FLOOR_FACTOR = 1000.0

RECORD_COLUMNS = ("scheme", "eps", "t", "local_error", "est_deviation", "observed_order")
FORMATS = ("csv", "json")


class UnresolvedStateError(ValueError):
    """The grid does not resolve the state well enough for the requested scan."""


def default_grid(dim: int = 1, n: int | None = None) -> Grid:
    if n is None:
        n = DEFAULT_N_1D if dim == 1 else DEFAULT_N_2D
    lo, hi = DEFAULT_DOMAIN if dim == 1 else LASER_DOMAIN
    return make_grid(dim, lo, hi, n)


def dyadic_times(t_max: float, t_min: float) -> list[float]:
    """``t_max, t_max/2, ...`` down to the last value not below ``t_min``."""
    if not 0 < t_min <= t_max:
        raise ValueError("need 0 < t_min <= t_max")
    out = [t_max]
    while out[-1] / 2 >= t_min * (1 - 1e-12):
        out.append(out[-1] / 2)
    return out


def check_resolution(grid: Grid, u: np.ndarray, tol: float = RESOLUTION_TOL) -> float:
    tail = grid.spectral_tail(u)
    if not tail <= tol:
        raise UnresolvedStateError(
            f"spectral tail {tail:.2e} exceeds {tol:.0e}; refine the grid or widen the state"
        )
    return tail


def noise_floor(grid: Grid, u: np.ndarray) -> float:
    """Error level below which rounding dominates: ``1000 * machine eps * ||u||``."""
    return NOISE_FLOOR_FACTOR * np.finfo(float).eps * grid.l2_norm(u)


def fit_slope(ts: Sequence[float], values: Sequence[float], floor: float = 0.0,
              floor_values: Sequence[float] | None = None, min_points: int = 3) -> float:
    """Least-squares slope of ``log(values)`` against ``log(ts)``.

    Points whose ``floor_values`` (default: ``values``) do not exceed ``floor``
    are dropped, so rounding noise at tiny t does not bend the fit.
    """
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    gate = values if floor_values is None else np.asarray(floor_values, dtype=float)
    keep = (gate > floor) & (values > 0)
    if keep.sum() < min_points:
        raise ValueError(f"only {int(keep.sum())} points above the noise floor {floor:.1e}")
    return float(np.polyfit(np.log(ts[keep]), np.log(values[keep]), 1)[0])


def observed_orders(ts: Sequence[float], errors: Sequence[float]) -> list[float | None]:
    """``log(e_{i-1}/e_i) / log(t_{i-1}/t_i)``; the log2 ratio for halving t. First entry is None."""
    out: list[float | None] = [None]
    for i in range(1, len(ts)):
        e0, e1 = errors[i - 1], errors[i]
        if e0 > 0 and e1 > 0:
            out.append(math.log(e0 / e1) / math.log(ts[i - 1] / ts[i]))
        else:
            out.append(float("nan"))
    return out


def _same(a, b) -> bool:
    if isinstance(a, float) and isinstance(b, float) and math.isnan(a) and math.isnan(b):
        return True
    return a == b


@dataclass(frozen=True, eq=False)
class ScanRecord:
    """One scan point. For global scans ``t`` is the step size and ``local_error`` the global error."""

    scheme: str
    eps: float
    t: float
    local_error: float
    est_deviation: float
    observed_order: float | None = None

    def __eq__(self, other):
        if not isinstance(other, ScanRecord):
            return NotImplemented
        return all(_same(getattr(self, f.name), getattr(other, f.name)) for f in fields(self))

    def __hash__(self):
        return hash((self.scheme, self.eps, self.t))


def _schemes(schemes: Iterable[str | SplittingScheme]) -> list[SplittingScheme]:
    out = [builtin_scheme(s) if isinstance(s, str) else s for s in schemes]
    if not out:
        raise ValueError("no schemes given")
    return out


def _decreasing(ts: Sequence[float], what: str = "t_list") -> list[float]:
    ts = [float(t) for t in ts]
    if not ts or any(t <= 0 for t in ts):
        raise ValueError(f"{what} must be non-empty and positive")
    if any(b >= a for a, b in zip(ts, ts[1:])):
        raise ValueError(f"{what} must be strictly decreasing")
    return ts


def _with_orders(rows: list[tuple[str, float, float, float, float]]) -> list[ScanRecord]:
    orders = observed_orders([r[2] for r in rows], [r[3] for r in rows])
    return [ScanRecord(*r, observed_order=o) for r, o in zip(rows, orders)]


def _local_scan(problem_for, schemes, pairs, u_for) -> list[ScanRecord]:
    # pairs: (eps, t); references are shared between schemes
    refs = {}
    records = []
    for scheme in schemes:
        rows = []
        for eps, t in pairs:
            problem = problem_for(eps)
            u = u_for(eps)
            if (eps, t) not in refs:
                refs[(eps, t)] = reference_flow(problem, t, u)
            rec = estimate(problem, scheme, t, u)
            L = rec.u_out - refs[(eps, t)]
            grid = problem.grid
            rows.append((scheme.name, eps, t, grid.l2_norm(L), grid.l2_norm(rec.estimator - L)))
        records += _with_orders(rows)
    return records


def order_scan(schemes, eps: float, t_list: Sequence[float], state: InitialState | None = None,
               grid: Grid | None = None, *, theta: float = 1.0, potential: str = "none") -> list[ScanRecord]:
    """Local error and estimator deviation per scheme over decreasing step sizes at fixed eps."""
    grid = grid or default_grid()
    state = state or DEFAULT_STATE
    u0 = state.evaluate(grid)
    check_resolution(grid, u0)
    problem = Problem(grid, ProblemParams(eps=eps, theta=theta, potential=potential))
    ts = _decreasing(t_list)
    return _local_scan(lambda e: problem, _schemes(schemes), [(eps, t) for t in ts], lambda e: u0)


def eps_scan(schemes, eps_list: Sequence[float], state: InitialState | None = None,
             grid: Grid | None = None, *, theta: float = 1.0, potential: str = "none") -> list[ScanRecord]:
    """Like :func:`order_scan` along the coupled diagonal t = eps."""
    grid = grid or default_grid()
    state = state or DEFAULT_STATE
    u0 = state.evaluate(grid)
    check_resolution(grid, u0)
    eps_values = _decreasing(eps_list, "eps_list")
    problems = {e: Problem(grid, ProblemParams(eps=e, theta=theta, potential=potential)) for e in eps_values}
    return _local_scan(problems.__getitem__, _schemes(schemes), [(e, e) for e in eps_values], lambda e: u0)


def check_wkb_resolution(grid: Grid, eps: float) -> float:
    """Grid points per local wavelength ``2 pi eps`` of the WKB phase."""
    per = 2 * math.pi * eps / grid.spacing[0]
    if per < WKB_POINTS_PER_WAVELENGTH:
        raise UnresolvedStateError(
            f"{per:.1f} points per WKB wavelength at eps={eps}; need {WKB_POINTS_PER_WAVELENGTH}"
        )
    return per


def wkb_scan(schemes, eps: float, t_list: Sequence[float], grid: Grid | None = None, *,
             theta: float = 1.0, potential: str = "none") -> list[ScanRecord]:
    """Order scan for the eps-oscillatory WKB initial value."""
    grid = grid or default_grid(n=DEFAULT_N_WKB)
    check_wkb_resolution(grid, eps)
    u0 = wkb(grid, eps)
    check_resolution(grid, u0)
    problem = Problem(grid, ProblemParams(eps=eps, theta=theta, potential=potential))
    ts = _decreasing(t_list)
    return _local_scan(lambda e: problem, _schemes(schemes), [(eps, t) for t in ts], lambda e: u0)


def _steps(span: float, h: float) -> int:
    n = int(round(span / h))
    if n < 1 or not math.isclose(n * h, span, rel_tol=1e-9):
        raise ValueError(f"h={h} does not divide T={span}")
    return n


def global_reference_step(T: float, eps: float, h_list: Sequence[float]) -> float:
    """Largest ``T / 2^k`` not exceeding half the finest h nor eps/16."""
    target = min(min(h_list) / 2, eps / 16)
    n = 2 ** math.ceil(math.log2(T / target) - 1e-12)
    return T / n


def global_error_scan(scheme, eps: float, h_list: Sequence[float], T: float = 0.5,
                      state: InitialState | None = None, grid: Grid | None = None, *,
                      theta: float = 1.0, potential: str = "none",
                      reference_h: float | None = None) -> list[ScanRecord]:
    """Error at ``T`` of fixed-step runs against a sixth-order run with a much finer step.

    ``est_deviation`` has no meaning here and is NaN.
    """
    grid = grid or default_grid()
    state = state or DEFAULT_STATE
    (scheme,) = _schemes([scheme])
    u0 = state.evaluate(grid)
    check_resolution(grid, u0)
    hs = _decreasing(h_list, "h_list")
    for h in hs:
        _steps(T, h)
    problem = Problem(grid, ProblemParams(eps=eps, theta=theta, potential=potential))
    h_ref = reference_h or global_reference_step(T, eps, hs)
    ref = fixed_integrate(problem, reference_scheme(), u0, 0.0, T, h_ref).final
    rows = []
    for h in hs:
        err = grid.l2_norm(fixed_integrate(problem, scheme, u0, 0.0, T, h).final - ref)
        rows.append((scheme.name, eps, h, err, float("nan")))
    return _with_orders(rows)


def record_rows(records: Iterable[ScanRecord], name: str | None = None) -> list[ScanRecord]:
    return [r for r in records if name is None or r.scheme == name]


def scan_slope(records: Sequence[ScanRecord], field: str = "local_error", floor: float = 0.0) -> float:
    return fit_slope([r.t for r in records], [getattr(r, field) for r in records], floor)


def resolution_change(coarse: Sequence[ScanRecord], fine: Sequence[ScanRecord], floor: float = 0.0) -> float:
    """Largest relative change of ``local_error`` between two runs of the same scan.

    Entries at or below ``floor`` in both runs are skipped.
    """
    if len(coarse) != len(fine):
        raise ValueError("scans differ in length")
    worst = 0.0
    for a, b in zip(coarse, fine):
        if (a.scheme, a.eps, a.t) != (b.scheme, b.eps, b.t):
            raise ValueError("scans are not aligned")
        if max(a.local_error, b.local_error) <= floor:
            continue
        worst = max(worst, abs(a.local_error - b.local_error) / max(a.local_error, b.local_error))
    return worst


# serialisation


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return repr(float(x))


def emit(records: Iterable[ScanRecord], path, format: str = "csv") -> None:
    """Write records with columns ``scheme,eps,t,local_error,est_deviation,observed_order``.

    Floats use the shortest decimal that round-trips. A missing observed order
    is an empty CSV cell or JSON null.
    """
    if format not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {format!r}")
    records = list(records)
    if format == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(RECORD_COLUMNS)
            for r in records:
                writer.writerow([_fmt(getattr(r, c)) for c in RECORD_COLUMNS])
    else:
        with open(path, "w") as fh:
            json.dump([{c: getattr(r, c) for c in RECORD_COLUMNS} for r in records], fh, indent=1)
            fh.write("\n")


def _parse_float(s: str) -> float | None:
    return None if s == "" else float(s)


def load_records(path, format: str | None = None) -> list[ScanRecord]:
    """Inverse of :func:`emit`; the format defaults to the file extension."""
    if format is None:
        format = os.path.splitext(str(path))[1].lstrip(".").lower() or "csv"
    if format not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}, got {format!r}")
    if format == "csv":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != RECORD_COLUMNS:
                raise ValueError(f"unexpected header {header}")
            return [ScanRecord(row[0], *(_parse_float(v) for v in row[1:5]), _parse_float(row[5]))
                    for row in reader]
    with open(path) as fh:
        rows = json.load(fh)
    out = []
    for row in rows:
        if tuple(row) != RECORD_COLUMNS:
            raise ValueError(f"unexpected keys {list(row)}")
        out.append(ScanRecord(**{k: (float(v) if isinstance(v, int) else v) for k, v in row.items()}))
    return out


def write_snapshot(path, u: np.ndarray, grid: Grid | None = None, **meta) -> tuple[str, str]:
    """Write ``u`` as raw little-endian complex128 (interleaved re, im float64) plus a JSON sidecar.

    ``path`` gets a ``.bin`` suffix if it has none; the sidecar is ``<stem>.json``.
    Returns both file names.
    """
    base, ext = os.path.splitext(str(path))
    bin_path = str(path) if ext == ".bin" else str(path) + ".bin"
    side_path = (base if ext == ".bin" else str(path)) + ".json"
    arr = np.ascontiguousarray(u, dtype="<c16")
    with open(bin_path, "wb") as fh:
        fh.write(arr.tobytes(order="C"))
    info = {
        "dtype": "float64-le-pairs",
        "layout": "C",
        "shape": list(arr.shape),
        "file": os.path.basename(bin_path),
    }
    if grid is not None:
        info["grid"] = {"dim": grid.dim, "lower": [float(v) for v in grid.lower],
                        "upper": [float(v) for v in grid.upper], "n": [int(v) for v in grid.n],
                        "spacing": [float(v) for v in grid.spacing]}
    info.update(meta)
    with open(side_path, "w") as fh:
        json.dump(info, fh, indent=1)
        fh.write("\n")
    return bin_path, side_path


def read_snapshot(bin_path) -> tuple[np.ndarray, dict]:
    side = os.path.splitext(str(bin_path))[0] + ".json"
    with open(side) as fh:
        info = json.load(fh)
    data = np.fromfile(bin_path, dtype="<c16")
    return data.reshape(info["shape"]), info


# laser beam


@dataclass(frozen=True)
class LaserConfig:
    """Adaptive 2D run of the defocusing cubic equation without potential.

    ``state`` is ``tanh_gaussian`` (nodal line across ``axis``) or
    ``plain_gaussian``. ``slice_axis`` is held at its zero coordinate for the
    recorded slices.
    """

    eps: float = 0.01
    theta: float = 1.0
    n: int = DEFAULT_N_2D
    lower: float = LASER_DOMAIN[0]
    upper: float = LASER_DOMAIN[1]
    T: float = 5.0
    scheme: str = "yoshida4"
    state: str = "tanh_gaussian"
    amplitude: float = 1.0
    r0: float = 0.5
    ys: float = 1.0
    axis: int = 1
    slice_axis: int = 1
    tol: float = 1e-6
    h_min: float = 1e-7
    h_max: float = 0.5
    h_init: float = 1e-3
    safety: float = 0.9
    grow_max: float = 4.0
    shrink_min: float = 0.25
    max_steps: int = 100_000

    def __post_init__(self):
        if self.state not in ("tanh_gaussian", "plain_gaussian"):
            raise ValueError(f"laser state must be tanh_gaussian or plain_gaussian, got {self.state!r}")
        if self.axis not in (0, 1) or self.slice_axis not in (0, 1):
            raise ValueError("axis and slice_axis must be 0 or 1")

    def grid(self) -> Grid:
        return make_grid(2, self.lower, self.upper, self.n)

    def initial_state(self) -> InitialState:
        params = {"amplitude": self.amplitude, "r0": self.r0}
        if self.state == "tanh_gaussian":
            params.update(ys=self.ys, axis=self.axis)
        return InitialState(self.state, params)

    def controller(self) -> ControllerConfig:
        return ControllerConfig(tol=self.tol, h_min=self.h_min, h_max=self.h_max, safety=self.safety,
                                grow_max=self.grow_max, shrink_min=self.shrink_min,
                                max_steps=self.max_steps, h_init=self.h_init)


@dataclass
class LaserResult:
    config: LaserConfig
    grid: Grid
    trajectory: Trajectory
    initial: np.ndarray
    z: np.ndarray
    slices: np.ndarray  # (len(z), n) complex, the field on the line slice_axis = 0

    @property
    def final(self) -> np.ndarray:
        return self.trajectory.final

    def norm_drift(self) -> float:
        return abs(self.grid.l2_norm(self.final) - self.grid.l2_norm(self.initial))

    def nodal_residual(self) -> float:
        """Largest |psi| over the run on the symmetry line of the tanh factor."""
        if self.config.slice_axis != self.config.axis:
            raise ValueError("slices are not taken on the nodal line")
        return float(np.max(np.abs(self.slices)))

    def write(self, out_dir, format: str = "csv") -> list[str]:
        """Write the step trace, the slice stack and the final field into ``out_dir``."""
        if format not in FORMATS:
            raise ValueError(f"format must be one of {FORMATS}, got {format!r}")
        os.makedirs(out_dir, exist_ok=True)
        written = []
        trace = os.path.join(out_dir, f"trace.{format}")
        if format == "csv":
            self.trajectory.write_trace_csv(trace)
        else:
            with open(trace, "w") as fh:
                json.dump([asdict(r) for r in self.trajectory.trace], fh, indent=1)
                fh.write("\n")
        written.append(trace)
        cfg = asdict(self.config)
        line = self.grid.axes()[1 - self.config.slice_axis]
        written += write_snapshot(os.path.join(out_dir, "slices.bin"), self.slices, None,
                                  z=[float(z) for z in self.z], line=[float(x) for x in line],
                                  slice_axis=self.config.slice_axis, config=cfg)
        written += write_snapshot(os.path.join(out_dir, "final.bin"), self.final, self.grid,
                                  z=float(self.trajectory.times[-1]), config=cfg)
        return written


def _slice(u: np.ndarray, grid: Grid, axis: int) -> np.ndarray:
    x = grid.axes()[axis]
    idx = int(np.argmin(np.abs(x)))
    return np.take(u, idx, axis=axis).copy()


def laser_beam(config: LaserConfig = LaserConfig()) -> LaserResult:
    """Adaptive run of the beam propagation problem; z plays the role of time."""
    grid = config.grid()
    problem = Problem(grid, ProblemParams(eps=config.eps, theta=config.theta, potential="none"))
    u0 = config.initial_state().evaluate(grid)
    zs, slices = [0.0], [_slice(u0, grid, config.slice_axis)]

    def observe(z, u):
        zs.append(z)
        slices.append(_slice(u, grid, config.slice_axis))

    traj = adaptive_integrate(problem, builtin_scheme(config.scheme), u0, 0.0, config.T,
                              config.controller(), observer=observe)
    return LaserResult(config=config, grid=grid, trajectory=traj, initial=u0,
                       z=np.array(zs), slices=np.array(slices))


def fixed_step_reference(result: LaserResult, refine: float = 2.0) -> np.ndarray:
    """Fixed-step run with step at most ``min accepted step / refine``.

    The truncated final step is left out of the minimum.
    """
    cfg = result.config
    hs = result.trajectory.step_sizes
    if len(hs) > 1:
        hs = hs[:-1]
    h_target = float(np.min(hs)) / refine
    n = math.ceil(cfg.T / h_target)
    problem = Problem(result.grid, ProblemParams(eps=cfg.eps, theta=cfg.theta, potential="none"))
    return fixed_integrate(problem, builtin_scheme(cfg.scheme), result.initial, 0.0, cfg.T, cfg.T / n).final
