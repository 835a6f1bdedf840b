"""Brute-force reference: classical RK4 on the spectral semi-discretisation.

This deliberately avoids splitting so that agreement with the splitting
integrators is evidence against a shared bug. It is slow and only meant for
small grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import Problem

# RK4 stability interval on the imaginary axis is |z| <= 2*sqrt(2)
RK4_IMAG_BOUND = 2.0 * np.sqrt(2.0)


class StabilityError(ValueError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    substeps: int = 1000
    method: str = "rk4-mol"

    def __post_init__(self):
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")
        if self.method != "rk4-mol":
            raise ValueError(f"unsupported oracle method {self.method!r}")


def spectral_radius(problem: Problem, u: np.ndarray) -> float:
    """Bound on |eigenvalue| of the linearised right-hand side at ``u``.

    Kinetic part eps k_max^2 / 2 (summed over axes) plus the largest pointwise
    rate (U + 2 |theta| |u|^2) / eps of the nonlinear part.
    """
    p = problem.params
    kinetic = 0.5 * p.eps * float(np.max(problem.grid.k_squared))
    pointwise = float(np.max(np.abs(problem.U) + 2 * abs(p.theta) * np.abs(u) ** 2)) / p.eps
    return kinetic + pointwise


def oracle_solve(problem: Problem, u0: np.ndarray, t: float, cfg: OracleConfig = OracleConfig()) -> np.ndarray:
    """Approximate the exact flow over time ``t`` with ``cfg.substeps`` RK4 steps.

    Raises
    ------
    StabilityError
        If a substep exceeds the RK4 stability bound for this grid.
    FloatingPointError
        If a non-finite value appears during the run.
    """
    h = t / cfg.substeps
    rho = spectral_radius(problem, u0)
    if abs(h) * rho > RK4_IMAG_BOUND:
        max_h = RK4_IMAG_BOUND / rho
        raise StabilityError(
            f"substep {abs(h):.3g} exceeds RK4 stability bound {max_h:.3g} "
            f"(spectral radius {rho:.3g}); use at least {int(np.ceil(abs(t) / max_h))} substeps"
        )
    F = problem.F
    u = np.array(u0, dtype=complex)
    for i in range(cfg.substeps):
        k1 = F(u)
        k2 = F(u + 0.5 * h * k1)
        k3 = F(u + 0.5 * h * k2)
        k4 = F(u + h * k3)
        u = u + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(u)):
            raise FloatingPointError(f"non-finite value in oracle after substep {i + 1}")
    return u
