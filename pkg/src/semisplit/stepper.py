"""One splitting step, its defect, and the defect-based local error estimate.

The defect of a step ``S(t, u)`` is ``d/dt S(t, u) - F(S(t, u))``. The time
derivative is propagated through the stages alongside the step itself, with
``z_0 = 0`` and

    z_i = b_i B(w_i) + dE_B(b_i t, v_i) E_A(a_i t) [a_i A(w_{i-1}) + z_{i-1}],

so that ``z_s = d/dt S(t, u)``. For a method of order p the estimate
``t / (p + 1) * defect`` is asymptotically equal to the local error.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np

from .operators import Problem
from .schemes import SplittingScheme, reference_scheme

REFERENCE_SUBSTEPS = 64
# substeps per unit t/eps; keeps the reference stable once t exceeds a few eps
REFERENCE_SUBSTEPS_PER_EPS = 16


@dataclass
class StepIntermediates:
    """Stage values of one step: ``v`` has s entries, ``w`` has s + 1 (``w[0]`` is the input)."""

    v: list[np.ndarray]
    w: list[np.ndarray]

    @property
    def output(self) -> np.ndarray:
        return self.w[-1]


@dataclass
class StepRecord:
    t: float
    u_out: np.ndarray
    estimator: np.ndarray
    est_norm: float


def step(problem: Problem, scheme: SplittingScheme, t: float, u: np.ndarray) -> np.ndarray:
    """Advance ``u`` by one step of size ``t`` (negative ``t`` allowed)."""
    w = u
    for a, b in zip(scheme.a, scheme.b):
        if a != 0.0:
            w = problem.flow_A(a * t, w)
        if b != 0.0:
            w = problem.flow_B(b * t, w)
    return w if w is not u else u.copy()


def split_step(problem: Problem, scheme: SplittingScheme, t: float, u: np.ndarray) -> StepIntermediates:
    """Advance one step and keep every stage value."""
    if u.shape != problem.grid.shape:
        raise ValueError(f"field shape {u.shape} does not match grid {problem.grid.shape}")
    v_list, w_list = [], [u]
    for a, b in zip(scheme.a, scheme.b):
        v = problem.flow_A(a * t, w_list[-1])
        v_list.append(v)
        w_list.append(problem.flow_B(b * t, v))
    return StepIntermediates(v=v_list, w=w_list)


def _stage_derivative(problem, a, b, t, v, w_prev, w, z_prev):
    y = problem.flow_A(a * t, a * problem.A(w_prev) + z_prev)
    return b * problem.B(w) + problem.dflow_B(b * t, v, y)


def defect(problem: Problem, scheme: SplittingScheme, inter: StepIntermediates, t: float) -> np.ndarray:
    """Defect of the step recorded in ``inter``."""
    if len(inter.v) != scheme.stages or len(inter.w) != scheme.stages + 1:
        raise ValueError(
            f"intermediates have {len(inter.v)} stages, scheme {scheme.name!r} has {scheme.stages}"
        )
    z = np.zeros_like(inter.w[0])
    for i, (a, b) in enumerate(zip(scheme.a, scheme.b)):
        z = _stage_derivative(problem, a, b, t, inter.v[i], inter.w[i], inter.w[i + 1], z)
    return z - problem.F(inter.output)


def estimate(problem: Problem, scheme: SplittingScheme, t: float, u: np.ndarray) -> StepRecord:
    """Take one step and return it together with its local error estimate.

    The stage loop keeps only the current stage values, so memory does not grow
    with the number of stages.
    """
    if u.shape != problem.grid.shape:
        raise ValueError(f"field shape {u.shape} does not match grid {problem.grid.shape}")
    w_prev = u
    z = np.zeros_like(u, dtype=complex)
    for a, b in zip(scheme.a, scheme.b):
        v = problem.flow_A(a * t, w_prev)
        w = problem.flow_B(b * t, v)
        z = _stage_derivative(problem, a, b, t, v, w_prev, w, z)
        w_prev = w
    d = z - problem.F(w_prev)
    est = t / (scheme.order + 1) * d
    return StepRecord(t=t, u_out=w_prev, estimator=est, est_norm=problem.grid.l2_norm(est))


def reference_substeps(problem: Problem, t: float) -> int:
    """``max(64, ceil(16 |t| / eps))``: substeps no larger than t/64 or eps/16."""
    return max(REFERENCE_SUBSTEPS, math.ceil(REFERENCE_SUBSTEPS_PER_EPS * abs(t) / problem.eps - 1e-9))


def reference_flow(problem: Problem, t: float, u: np.ndarray, substeps: int | None = None,
                   scheme: SplittingScheme | None = None) -> np.ndarray:
    """High-accuracy approximation of the exact flow over ``t``.

    Defaults to the sixth-order triple-jump method with
    :func:`reference_substeps` equal steps.
    """
    scheme = scheme or reference_scheme()
    if substeps is None:
        substeps = reference_substeps(problem, t)
    h = t / substeps
    for _ in range(substeps):
        u = step(problem, scheme, h, u)
    return u


def local_error(problem: Problem, scheme: SplittingScheme, t: float, u: np.ndarray,
                reference: np.ndarray | None = None) -> np.ndarray:
    """Local error field ``S(t, u) - E_F(t, u)`` against :func:`reference_flow`."""
    if reference is None:
        reference = reference_flow(problem, t, u)
    return step(problem, scheme, t, u) - reference
