"""Split vector fields, their exact flows and commutators.

The model is the cubic Schroedinger equation in semiclassical scaling,

    i psi_t = -(eps/2) Lap psi + (1/eps) (U + theta |psi|^2) psi,

split into the kinetic part ``A(u) = i eps/2 Lap u`` and the pointwise part
``B(u) = -(i/eps) (U + theta |u|^2) u``. Both sub-flows are exact on a
periodic spectral grid: ``A`` is a Fourier multiplier and ``B`` is a
modulus-preserving phase rotation.

Derivatives with respect to the field are real-linear (``B`` involves
``conj(u)``), so every ``d*`` method accepts complex directions but is only
linear over the reals.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import Grid

POTENTIALS = ("none", "harmonic")


@dataclass(frozen=True)
class ProblemParams:
    """Physical data: semiclassical parameter, nonlinearity and potential."""

    eps: float
    theta: float = 1.0
    potential: str = "none"
    omega: float = 1.0

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if self.potential not in POTENTIALS:
            raise ValueError(f"potential must be one of {POTENTIALS}, got {self.potential!r}")
        if self.potential == "harmonic" and not self.omega > 0:
            raise ValueError(f"omega must be positive for a harmonic potential, got {self.omega}")


def potential_field(grid: Grid, params: ProblemParams) -> np.ndarray:
    """Values of U on the grid: 0.5 * omega^2 |x|^2, or zeros."""
    if params.potential == "none":
        return np.zeros(grid.shape)
    r2 = sum(x**2 for x in grid.coords())
    return 0.5 * params.omega**2 * r2


class Problem:
    """A discretised splitting problem: grid, parameters and cached tables.

    Parameters
    ----------
    grid : Grid
    params : ProblemParams
    """

    _phase_cache_size = 64

    def __init__(self, grid: Grid, params: ProblemParams):
        self.grid = grid
        self.params = params
        self.U = potential_field(grid, params)
        if params.potential == "harmonic":
            w2 = params.omega**2
            self.grad_U = [w2 * x for x in grid.coords()]
            self.lap_U = grid.dim * w2
            self.hess_U_diag = w2
        else:
            self.grad_U = [np.zeros(grid.shape) for _ in range(grid.dim)]
            self.lap_U = 0.0
            self.hess_U_diag = 0.0
        # Fourier symbol of A: i eps/2 * (-k^2)
        self._symbol_A = -0.5j * params.eps * grid.k_squared
        self._phases: dict[float, np.ndarray] = {}

    @property
    def eps(self) -> float:
        return self.params.eps

    @property
    def theta(self) -> float:
        return self.params.theta

    def with_params(self, **changes) -> "Problem":
        """Copy of this problem on the same grid with some parameters replaced."""
        return Problem(self.grid, replace(self.params, **changes))

    # -- spatial derivatives ------------------------------------------------

    def grad(self, u: np.ndarray) -> list[np.ndarray]:
        u_hat = self.grid.fft(u)
        return [self.grid.ifft(1j * self.grid.k_axis(ax) * u_hat) for ax in range(self.grid.dim)]

    def lap(self, u: np.ndarray) -> np.ndarray:
        return self.grid.ifft(-self.grid.k_squared * self.grid.fft(u))

    def hessian(self, u: np.ndarray) -> list[list[np.ndarray]]:
        u_hat = self.grid.fft(u)
        k = [self.grid.k_axis(ax) for ax in range(self.grid.dim)]
        return [[self.grid.ifft(-k[i] * k[j] * u_hat) for j in range(self.grid.dim)]
                for i in range(self.grid.dim)]

    # -- vector fields ------------------------------------------------------

    def A(self, u: np.ndarray) -> np.ndarray:
        return self.grid.ifft(self._symbol_A * self.grid.fft(u))

    def B(self, u: np.ndarray) -> np.ndarray:
        return -1j / self.eps * (self.U + self.theta * np.abs(u) ** 2) * u

    def F(self, u: np.ndarray) -> np.ndarray:
        return self.A(u) + self.B(u)

    def dB(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Frechet derivative B'(u) v."""
        return -1j / self.eps * (self.U * v + self.theta * (2 * np.abs(u) ** 2 * v + u**2 * np.conj(v)))

    # -- exact sub-flows ----------------------------------------------------

    def _phase_A(self, t: float) -> np.ndarray:
        phase = self._phases.get(t)
        if phase is None:
            if len(self._phases) >= self._phase_cache_size:
                self._phases.clear()
            phase = np.exp(t * self._symbol_A)
            self._phases[t] = phase
        return phase

    def flow_A(self, t: float, u: np.ndarray) -> np.ndarray:
        """exp(i t eps/2 Lap) u, applied as a Fourier multiplier. Any real t."""
        if t == 0.0:
            return u.copy()
        return self.grid.ifft(self._phase_A(t) * self.grid.fft(u))

    def flow_A_hat(self, t: float, u_hat: np.ndarray) -> np.ndarray:
        """flow_A for data already in Fourier space; returns physical values."""
        return self.grid.ifft(self._phase_A(t) * u_hat)

    def _phase_B(self, t: float, u: np.ndarray) -> np.ndarray:
        return np.exp(-1j * t / self.eps * (self.U + self.theta * np.abs(u) ** 2))

    def flow_B(self, t: float, u: np.ndarray) -> np.ndarray:
        """exp(-i t/eps (U + theta |u|^2)) u, pointwise."""
        return self._phase_B(t, u) * u

    def dflow_B(self, t: float, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Derivative of ``flow_B(t, .)`` at ``u`` in direction ``v``."""
        phase = self._phase_B(t, u)
        cross = np.conj(u) * v + u * np.conj(v)
        return phase * (v - 1j * t / self.eps * self.theta * u * cross)

    # -- commutators --------------------------------------------------------

    def commutator_AB(self, u: np.ndarray) -> np.ndarray:
        """[A, B](u) = A'(u) B(u) - B'(u) A(u), in closed form."""
        th = self.theta
        g = self.grad(u)
        lap_u = self.lap(u)
        gU_gu = sum(gU * gu for gU, gu in zip(self.grad_U, g))
        abs_grad2 = sum(np.abs(gu) ** 2 for gu in g)
        grad_dot = sum(gu * gu for gu in g)
        return (gU_gu + 0.5 * self.lap_U * u
                + th * (u**2 * np.conj(lap_u) + 2 * u * abs_grad2 + np.conj(u) * grad_dot))

    def commutator_BA(self, u: np.ndarray) -> np.ndarray:
        return -self.commutator_AB(u)

    def commutator_BBA(self, u: np.ndarray) -> np.ndarray:
        """[B, [B, A]](u) in closed form.

        Only the ``|grad U|^2``, ``Lap U`` and ``theta^2`` terms survive; U itself
        and ``grad U . grad u`` cancel.
        """
        th = self.theta
        g = self.grad(u)
        lap_u = self.lap(u)
        m = np.abs(u) ** 2
        gradU2 = sum(gU**2 for gU in self.grad_U)
        abs_grad2 = sum(np.abs(gu) ** 2 for gu in g)
        grad_dot = sum(gu * gu for gu in g)
        inner = (u * gradU2
                 - 2 * th * self.lap_U * m * u
                 - th**2 * (2 * m**2 * lap_u + 2 * m * u**2 * np.conj(lap_u)
                            + m * np.conj(u) * grad_dot + 6 * m * u * abs_grad2
                            + u**3 * np.conj(grad_dot)))
        return -1j / self.eps * inner

    def commutator_AAB(self, u: np.ndarray) -> np.ndarray:
        """[A, [A, B]](u) in closed form; needs fourth derivatives of u.

        For the harmonic potential Lap^2 U and grad(Lap U) vanish and the Hessian
        of U is omega^2 times the identity.
        """
        th = self.theta
        d = self.grid.dim
        g = self.grad(u)
        H = self.hessian(u)
        lap_u = sum(H[i][i] for i in range(d))
        lap_u_c = np.conj(lap_u)
        bilap_u_c = np.conj(self.lap(lap_u))
        grad_lap_u_c = self.grad(lap_u_c)
        g_c = [np.conj(gi) for gi in g]
        grad_dot = sum(gi * gi for gi in g)

        tr_HU_Hu = self.hess_U_diag * lap_u
        tr_HH = sum(H[i][j] * H[j][i] for i in range(d) for j in range(d))
        tr_HHc = sum(H[i][j] * np.conj(H[j][i]) for i in range(d) for j in range(d))

        def quad(a, M, b):
            return sum(a[i] * M[i][j] * b[j] for i in range(d) for j in range(d))

        H_c = [[np.conj(H[i][j]) for j in range(d)] for i in range(d)]
        first = (tr_HU_Hu
                 + th * (u**2 * bilap_u_c
                         + 4 * u * sum(gi * gl for gi, gl in zip(g, grad_lap_u_c))
                         + 2 * lap_u_c * grad_dot))
        second = th * (np.conj(u) * tr_HH + 2 * u * tr_HHc
                       + 2 * quad(g_c, H, g) + 2 * quad(g, H_c, g) + 2 * quad(g, H, g_c))
        return 1j * self.eps * (first + second)

    def commutator_ABA(self, u: np.ndarray) -> np.ndarray:
        """[A, [B, A]](u) = -[A, [A, B]](u)."""
        return -self.commutator_AAB(u)
