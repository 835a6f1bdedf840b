"""Initial states used by the experiments."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import Grid

STATE_KINDS = ("gaussian", "wkb", "tanh_gaussian", "plain_gaussian")


def gaussian(grid: Grid, center=1.0, width: float = 1.0, momentum=0.0, amplitude: float = 1.0) -> np.ndarray:
    """Shifted Gaussian ``amplitude * exp(-|x - center|^2 / width^2 + i momentum . x)``."""
    xs = grid.coords()
    center = np.broadcast_to(center, (grid.dim,))
    momentum = np.broadcast_to(momentum, (grid.dim,))
    r2 = sum((x - c) ** 2 for x, c in zip(xs, center))
    phase = sum(k * x for x, k in zip(xs, momentum))
    return amplitude * np.exp(-r2 / width**2 + 1j * phase)


def wkb(grid: Grid, eps: float) -> np.ndarray:
    """``exp(-x^2) exp(-(i/eps) log(e^x + e^-x))`` along the first axis."""
    x = grid.coords()[0]
    return np.exp(-(x**2)) * np.exp(-1j / eps * np.logaddexp(x, -x))


def plain_gaussian(grid: Grid, amplitude: float = 1.0, r0: float = 0.5) -> np.ndarray:
    r2 = sum(x**2 for x in grid.coords())
    return amplitude * np.exp(-r2 / r0**2) + 0j


def tanh_gaussian(grid: Grid, amplitude: float = 1.0, r0: float = 0.5, ys: float = 1.0,
                  axis: int = 1) -> np.ndarray:
    """Gaussian with a ``tanh`` nodal line across ``axis`` (0 for x, 1 for y)."""
    return plain_gaussian(grid, amplitude, r0) * np.tanh(grid.coords()[axis] / ys)


@dataclass
class InitialState:
    """Named initial state with keyword parameters, evaluated lazily on a grid."""

    kind: str = "gaussian"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in STATE_KINDS:
            raise ValueError(f"unknown state kind {self.kind!r}; known: {', '.join(STATE_KINDS)}")

    def evaluate(self, grid: Grid) -> np.ndarray:
        u = globals()[self.kind](grid, **self.params)
        if not np.all(np.isfinite(u)):
            raise FloatingPointError(f"state {self.kind!r} produced non-finite values")
        return u

    def boundary_mass(self, grid: Grid) -> float:
        """Fraction of the L2 mass on the outermost grid lines."""
        u = self.evaluate(grid)
        edge = np.zeros(grid.shape, dtype=bool)
        for ax in range(grid.dim):
            idx = [slice(None)] * grid.dim
            idx[ax] = [0, -1]
            edge[tuple(idx)] = True
        total = np.sum(np.abs(u) ** 2)
        return float(np.sum(np.abs(u[edge]) ** 2) / total) if total else 0.0
