"""Fixed-step and estimator-driven adaptive time integration."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .operators import Problem
from .schemes import SplittingScheme
from .stepper import StepRecord, estimate, step


class StepSizeUnderflow(RuntimeError):
    """Raised when a step at ``h_min`` is still rejected."""

    def __init__(self, time: float, h_min: float, est_norm: float):
        super().__init__(f"step size underflow at t={time!r}: h_min={h_min!r} gives estimate {est_norm:.3e}")
        self.time = time


class MaxStepsExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ControllerConfig:
    tol: float
    h_min: float
    h_max: float
    safety: float = 0.9
    grow_max: float = 4.0
    shrink_min: float = 0.25
    max_steps: int = 100_000
    h_init: Optional[float] = None

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.h_min <= self.h_max:
            raise ValueError("need 0 < h_min <= h_max")
        if not 0 < self.safety <= 1:
            raise ValueError("safety must lie in (0, 1]")
        if not 0 < self.shrink_min < 1 < self.grow_max:
            raise ValueError("need 0 < shrink_min < 1 < grow_max")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


@dataclass
class TraceRow:
    time: float
    h: float
    est_norm: float
    accepted: bool
    rejected_count: int


@dataclass
class Trajectory:
    times: list[float]
    accepted_steps: list[StepRecord]
    rejected_counts: list[int]
    final: np.ndarray
    trace: list[TraceRow] = field(default_factory=list)

    @property
    def step_sizes(self) -> np.ndarray:
        return np.diff(self.times)

    def write_trace_csv(self, path) -> None:
        """Write every attempted step as ``time,h,est_norm,accepted,rejected_count``."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "h", "est_norm", "accepted", "rejected_count"])
            for row in self.trace:
                writer.writerow([repr(row.time), repr(row.h), repr(row.est_norm),
                                 int(row.accepted), row.rejected_count])


def step_factor(est_norm: float, tol: float, order: int, cfg: ControllerConfig) -> float:
    """Multiplier for the next step: safety * (tol/est)^(1/(p+1)), clamped."""
    if est_norm == 0.0:
        return cfg.grow_max
    factor = cfg.safety * (tol / est_norm) ** (1.0 / (order + 1))
    return min(cfg.grow_max, max(cfg.shrink_min, factor))


def adaptive_integrate(problem: Problem, scheme: SplittingScheme, u0: np.ndarray, t0: float, T: float,
                       cfg: ControllerConfig,
                       observer: Callable[[float, np.ndarray], None] | None = None,
                       keep_fields: bool = False) -> Trajectory:
    """Integrate from ``t0`` to ``T`` accepting only steps with estimate <= ``cfg.tol``.

    ``observer(time, u)`` is called after every accepted step. Accepted
    :class:`StepRecord` objects drop their field arrays unless ``keep_fields``.
    """
    if not T > t0:
        raise ValueError("T must exceed t0")
    u = problem.grid.validate(u0, "initial state")
    time = t0
    h = cfg.h_init if cfg.h_init is not None else cfg.h_min
    h = min(max(h, cfg.h_min), cfg.h_max)
    times, records, rejected_counts, trace = [t0], [], [], []
    rejected = 0
    attempts = 0
    span = T - t0
    while T - time > 1e-14 * span:
        attempts += 1
        if attempts > cfg.max_steps:
            raise MaxStepsExceeded(f"more than {cfg.max_steps} step attempts before t={T} (reached {time})")
        h_step = min(h, T - time)
        rec = estimate(problem, scheme, h_step, u)
        if not math.isfinite(rec.est_norm):
            raise FloatingPointError(f"non-finite error estimate at t={time}")
        factor = step_factor(rec.est_norm, cfg.tol, scheme.order, cfg)
        if rec.est_norm <= cfg.tol:
            trace.append(TraceRow(time, h_step, rec.est_norm, True, rejected))
            u = rec.u_out
            time = T if T - (time + h_step) <= 1e-14 * span else time + h_step
            times.append(time)
            if not keep_fields:
                rec = StepRecord(t=rec.t, u_out=None, estimator=None, est_norm=rec.est_norm)
            records.append(rec)
            rejected_counts.append(rejected)
            rejected = 0
            if observer is not None:
                observer(time, u)
            h = min(cfg.h_max, max(cfg.h_min, h_step * factor))
        else:
            trace.append(TraceRow(time, h_step, rec.est_norm, False, rejected))
            if h_step <= cfg.h_min:
                raise StepSizeUnderflow(time, cfg.h_min, rec.est_norm)
            rejected += 1
            h = max(cfg.h_min, h_step * factor)
    return Trajectory(times=times, accepted_steps=records, rejected_counts=rejected_counts,
                      final=u, trace=trace)


def fixed_integrate(problem: Problem, scheme: SplittingScheme, u0: np.ndarray, t0: float, T: float,
                    h: float, observer: Callable[[float, np.ndarray], None] | None = None) -> Trajectory:
    """Take ``round((T - t0) / h)`` equal steps of size ``h``."""
    n = int(round((T - t0) / h))
    if n < 1 or not math.isclose(n * h, T - t0, rel_tol=1e-9, abs_tol=1e-14):
        raise ValueError(f"h={h} does not divide the interval [{t0}, {T}]")
    u = problem.grid.validate(u0, "initial state")
    times = [t0]
    for i in range(1, n + 1):
        u = step(problem, scheme, h, u)
        times.append(t0 + i * h)
        if observer is not None:
            observer(times[-1], u)
    times[-1] = T
    return Trajectory(times=times, accepted_steps=[], rejected_counts=[0] * n, final=u)
