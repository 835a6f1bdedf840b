"""Independent oracles shared by the tests."""

import numpy as np

from semisplit.grid import make_grid


def directional(f, u, v, h=1e-3):
    """Derivative of ``f`` at ``u`` along ``v`` from central differences.

    Two step sizes are combined so the h^2 term cancels; the result is exact
    up to rounding when ``f(u + s v)`` is a polynomial of degree <= 4 in s.
    """
    d1 = (f(u + h * v) - f(u - h * v)) / (2 * h)
    d2 = (f(u + 2 * h * v) - f(u - 2 * h * v)) / (4 * h)
    return (4 * d1 - d2) / 3


def fd_commutators(problem, u):
    """[A,B], [B,[B,A]] and [A,[A,B]] from nested directional derivatives."""
    A, B = problem.A, problem.B

    def K(w):  # [A,B](w) = A'(w)B(w) - B'(w)A(w), A linear
        return A(B(w)) - directional(B, w, A(w))

    ab = K(u)
    bba = directional(B, u, -ab) + directional(K, u, B(u))
    aab = A(ab) - directional(K, u, A(u))
    return ab, bba, aab


def smooth_field(grid, seed, modes=12, envelope=1.0):
    """Random smooth complex field that decays well inside the box."""
    rng = np.random.default_rng(seed)
    xs = grid.coords()
    out = np.zeros(grid.shape, dtype=complex)
    for _ in range(modes):
        k = rng.normal(size=grid.dim) * 1.5
        c = (rng.normal() + 1j * rng.normal()) * np.exp(-np.sum(k**2) / 2)
        out += c * np.exp(1j * sum(ki * x for ki, x in zip(k, xs)))
    r2 = sum(x**2 for x in xs)
    return out * np.exp(-r2 / (2 * envelope**2))


def rel(a, b, grid):
    return grid.l2_norm(a - b) / grid.l2_norm(b)


def periodic_grid(n=64):
    return make_grid(1, 0.0, 2 * np.pi, n)
