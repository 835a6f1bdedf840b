"""Periodic spectral grids in one and two dimensions.

Fields are plain complex ``numpy`` arrays of shape ``grid.shape`` (C order,
axis 0 first). All transforms go through :func:`numpy.fft.fftn` over every
axis, so a field and its coefficient array always have the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def _per_axis(value, dim: int, name: str) -> tuple:
    if np.ndim(value) == 0:
        return (value,) * dim
    value = tuple(value)
    if len(value) != dim:
        raise ValueError(f"{name} needs {dim} entries, got {len(value)}")
    return value


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform periodic grid on the box ``[lower, upper)`` per axis.

    Use :func:`make_grid` rather than calling this directly.
    """

    dim: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    n: tuple[int, ...]
    spacing: tuple[float, ...] = field(init=False)
    wavenumbers: tuple[np.ndarray, ...] = field(init=False, repr=False)

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        for lo, hi, n in zip(self.lower, self.upper, self.n):
            if not hi > lo:
                raise ValueError(f"upper ({hi}) must exceed lower ({lo})")
            if n < 4 or not _is_power_of_two(n):
                raise ValueError(f"points per axis must be a power of two >= 4, got {n}")
        spacing = tuple((hi - lo) / n for lo, hi, n in zip(self.lower, self.upper, self.n))
        ks = tuple(
            2.0 * np.pi * np.fft.fftfreq(n, d=1.0 / n) / (hi - lo)
            for lo, hi, n in zip(self.lower, self.upper, self.n)
        )
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "wavenumbers", ks)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def size(self) -> int:
        return int(np.prod(self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(hi - lo for lo, hi in zip(self.lower, self.upper))

    def axes(self) -> tuple[np.ndarray, ...]:
        """1D coordinate vectors, one per axis."""
        return tuple(lo + h * np.arange(n) for lo, h, n in zip(self.lower, self.spacing, self.n))

    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcast coordinate arrays, each of shape ``self.shape``."""
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def k_axis(self, axis: int) -> np.ndarray:
        """Wavenumbers of ``axis`` reshaped to broadcast against a field."""
        shape = [1] * self.dim
        shape[axis] = self.n[axis]
        return self.wavenumbers[axis].reshape(shape)

    @property
    def k_squared(self) -> np.ndarray:
        ksq = sum(self.k_axis(ax) ** 2 for ax in range(self.dim))
        return np.broadcast_to(ksq, self.shape)

    @property
    def k_max(self) -> float:
        """Largest |k| represented on any axis (the Nyquist wavenumber)."""
        return max(float(np.max(np.abs(k))) for k in self.wavenumbers)

    def fft(self, u: np.ndarray) -> np.ndarray:
        return np.fft.fftn(u)

    def ifft(self, u_hat: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(u_hat)

    def validate(self, u: np.ndarray, name: str = "field") -> np.ndarray:
        """Return ``u`` as a complex array, raising if its shape is wrong or it is not finite."""
        u = np.asarray(u)
        if u.shape != self.shape:
            raise ValueError(f"{name} has shape {u.shape}, grid expects {self.shape}")
        if not np.all(np.isfinite(u)):
            raise FloatingPointError(f"{name} contains NaN or Inf")
        return u.astype(complex, copy=False)

    def l2_norm(self, u: np.ndarray) -> float:
        """Quadrature-weighted discrete L2 norm, sqrt(sum |u_j|^2 * prod(dx))."""
        return float(np.sqrt(np.vdot(u, u).real * self.cell_volume))

    def l2_norm_hat(self, u_hat: np.ndarray) -> float:
        """The same norm computed from Fourier coefficients (discrete Parseval)."""
        return float(np.sqrt(np.vdot(u_hat, u_hat).real * self.cell_volume / self.size))

    def spectral_derivative(self, u: np.ndarray, axis: int, order: int = 1) -> np.ndarray:
        if order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {order}")
        if not 0 <= axis < self.dim:
            raise ValueError(f"axis {axis} out of range for a {self.dim}D grid")
        return self.ifft((1j * self.k_axis(axis)) ** order * self.fft(u))

    def spectral_tail(self, u: np.ndarray, fraction: float = 0.25) -> float:
        """Relative spectral mass in the outermost ``fraction`` of wavenumbers.

        Returned as a ratio of L2 norms; small values mean the field is resolved.
        """
        u_hat = self.fft(u)
        outer = np.zeros(self.shape, dtype=bool)
        for ax in range(self.dim):
            k = np.abs(self.k_axis(ax))
            outer |= np.broadcast_to(k > (1.0 - fraction) * np.max(k), self.shape)
        total = np.vdot(u_hat, u_hat).real
        if total == 0.0:
            return 0.0
        tail = np.vdot(u_hat[outer], u_hat[outer]).real
        return float(np.sqrt(tail / total))


def make_grid(dim: int, lower, upper, n) -> Grid:
    """Build a periodic grid; scalar ``lower``/``upper``/``n`` are used on every axis.

    >>> g = make_grid(1, 0.0, 2 * np.pi, 8)
    >>> g.wavenumbers[0]
    array([ 0.,  1.,  2.,  3., -4., -3., -2., -1.])
    """
    lower = tuple(float(v) for v in _per_axis(lower, dim, "lower"))
    upper = tuple(float(v) for v in _per_axis(upper, dim, "upper"))
    n = tuple(int(v) for v in _per_axis(n, dim, "n"))
    return Grid(dim=dim, lower=lower, upper=upper, n=n)


def l2_norm(grid: Grid, u: np.ndarray) -> float:
    return grid.l2_norm(u)


def spectral_derivative(grid: Grid, u: np.ndarray, axis: int = 0, order: int = 1) -> np.ndarray:
    return grid.spectral_derivative(u, axis, order)
