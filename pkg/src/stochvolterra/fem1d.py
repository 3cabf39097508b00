"""Continuous piecewise-linear finite elements on (0, 1) with Dirichlet ends."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import _backend

_GX, _GW = leggauss(4)


@dataclass(frozen=True)
class FemSystem:
    """Uniform mesh with ``m`` interior nodes x_i = i h, h = 1/(m + 1).

    Mass and stiffness matrices are symmetric Toeplitz tridiagonal and kept as
    (diagonal, off-diagonal) pairs.
    """

    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"need at least one interior node, got m = {self.m}")

    @property
    def h(self) -> float:
        return 1.0 / (self.m + 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(1, self.m + 1) * self.h

    @property
    def mass_band(self) -> tuple[float, float]:
        return 2.0 * self.h / 3.0, self.h / 6.0

    @property
    def stiffness_band(self) -> tuple[float, float]:
        return 2.0 / self.h, -1.0 / self.h

    @staticmethod
    def _dense(diag: float, off: float, m: int) -> np.ndarray:
        return diag * np.eye(m) + off * (np.eye(m, k=1) + np.eye(m, k=-1))

    @property
    def mass(self) -> np.ndarray:
        return self._dense(*self.mass_band, self.m)

    @property
    def stiffness(self) -> np.ndarray:
        return self._dense(*self.stiffness_band, self.m)

    def apply_mass(self, c: np.ndarray) -> np.ndarray:
        return _apply(self.mass_band, c)

    def apply_stiffness(self, c: np.ndarray) -> np.ndarray:
        return _apply(self.stiffness_band, c)

    def eigenvalues(self) -> np.ndarray:
        """Generalised eigenvalues of (K, M), ascending."""
        return discrete_eigenvalues(self.m)

    def l2_norm(self, c: np.ndarray) -> np.ndarray:
        """||v_h||_{L2} = sqrt(c^T M c) along the last axis."""
        return np.sqrt(np.sum(c * self.apply_mass(c), axis=-1))


def _apply(band: tuple[float, float], c: np.ndarray) -> np.ndarray:
    d, o = band
    c = np.asarray(c, dtype=np.float64)
    y = d * c
    y[..., 1:] += o * c[..., :-1]
    y[..., :-1] += o * c[..., 1:]
    return y


def assemble(m: int) -> FemSystem:
    return FemSystem(int(m))


def discrete_eigenvalues(m: int, j=None) -> np.ndarray:
    """lambda_{h,j} = (6/h^2)(1 - cos j pi h)/(2 + cos j pi h), eigenvectors sin(j pi x_i)."""
    h = 1.0 / (m + 1)
    j = np.arange(1, m + 1) if j is None else np.asarray(j)
    c = np.cos(j * np.pi * h)
    return 6.0 / h**2 * (1.0 - c) / (2.0 + c)


def discrete_laplacian_solve(sys: FemSystem, shift: float, rhs) -> np.ndarray:
    """Solve (M + shift K) x = rhs by Thomas elimination; ``rhs`` may have trailing columns."""
    if shift < 0.0:
        raise ValueError("shift must be nonnegative")
    md, mo = sys.mass_band
    kd, ko = sys.stiffness_band
    m = sys.m
    off = np.full(m - 1, mo + shift * ko)
    return _backend.tridiag_solve(off, np.full(m, md + shift * kd), off, rhs)


def sine_moments(sys: FemSystem, J: int) -> np.ndarray:
    """G[j-1, i-1] = int_0^1 sqrt(2) sin(j pi x) phi_i(x) dx in closed form, shape (J, m)."""
    h = sys.h
    j = np.arange(1, J + 1)[:, None]
    a = j * np.pi
    return np.sqrt(2.0) * np.sin(a * sys.nodes[None, :]) * 2.0 * (1.0 - np.cos(a * h)) / (h * a**2)


def _element_quadrature(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    h = 1.0 / (m + 1)
    left = np.arange(m + 1) * h
    xq = left[:, None] + h * (_GX + 1.0) / 2.0
    wq = np.broadcast_to(h * _GW / 2.0, xq.shape)
    # value of the rising hat (left node) and falling hat (right node) at xq
    up = (xq - left[:, None]) / h
    return xq, wq, up


def load_vector(sys: FemSystem, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """(f, phi_i) with 4-point Gauss per element."""
    xq, wq, up = _element_quadrature(sys.m)
    fw = np.asarray(f(xq), dtype=np.float64) * wq
    # element e spans nodes e (falling hat) and e + 1 (rising hat); interior nodes are 1..m
    right = np.sum(fw * up, axis=1)
    left = np.sum(fw * (1.0 - up), axis=1)
    return right[:-1] + left[1:]


def sine_series(coeffs) -> Callable[[np.ndarray], np.ndarray]:
    c = np.asarray(coeffs, dtype=np.float64)
    j = np.arange(1, c.shape[0] + 1)

    def f(x):
        x = np.asarray(x, dtype=np.float64)
        return np.sqrt(2.0) * np.sin(np.pi * x[..., None] * j) @ c

    return f


def l2_project(sys: FemSystem, f) -> np.ndarray:
    """P_h f; ``f`` is a callable or a vector of sine coefficients (closed-form moments)."""
    if callable(f):
        load = load_vector(sys, f)
    else:
        c = np.asarray(f, dtype=np.float64)
        load = c @ sine_moments(sys, c.shape[0])
    return discrete_laplacian_solve(sys, 0.0, load)


def ritz_project(sys: FemSystem, v: Callable[[np.ndarray], np.ndarray], dv=None) -> np.ndarray:
    """R_h v from (R_h v', phi_i') = (v', phi_i').

    On each element phi_i' is constant, so (v', phi_i') reduces to nodal
    differences of v; ``dv`` is accepted for API symmetry but not needed.
    """
    h = sys.h
    xs = np.arange(sys.m + 2) * h
    vals = np.asarray(v(xs), dtype=np.float64)
    load = (2.0 * vals[1:-1] - vals[:-2] - vals[2:]) / h
    kd, ko = sys.stiffness_band
    off = np.full(sys.m - 1, ko)
    return _backend.tridiag_solve(off, np.full(sys.m, kd), off, load)


def interpolate(sys: FemSystem, v: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    return np.asarray(v(sys.nodes), dtype=np.float64)


def prolong(c: np.ndarray, factor: int) -> np.ndarray:
    """Nodal values of a coarse P1 function on the mesh refined ``factor`` times (power of 2)."""
    c = np.asarray(c, dtype=np.float64)
    if factor < 1 or factor & (factor - 1):
        raise ValueError("refinement factor must be a power of two")
    while factor > 1:
        padded = np.concatenate([np.zeros(c.shape[:-1] + (1,)), c, np.zeros(c.shape[:-1] + (1,))], axis=-1)
        fine = np.empty(c.shape[:-1] + (2 * c.shape[-1] + 1,))
        fine[..., 1::2] = c
        fine[..., 0::2] = 0.5 * (padded[..., :-1] + padded[..., 1:])
        c = fine
        factor //= 2
    return c


def sine_to_nodal(m: int, J: int) -> np.ndarray:
    """Matrix mapping J sine coefficients to nodal values on the mesh with m nodes, shape (J, m)."""
    x = np.arange(1, m + 1) / (m + 1)
    return np.sqrt(2.0) * np.sin(np.pi * np.outer(np.arange(1, J + 1), x))


def discrete_modes(sys: FemSystem) -> np.ndarray:
    """M-orthonormal generalised eigenvectors of (K, M) as rows, shape (m, m).

    Row r - 1 holds the nodal values of sin(r pi x) scaled to unit M-norm.
    """
    m = sys.m
    s = np.sin(np.pi * np.outer(np.arange(1, m + 1), np.arange(1, m + 1)) / (m + 1))
    c = np.cos(np.arange(1, m + 1) * np.pi * sys.h)
    # sin-vector has squared Euclidean norm (m+1)/2 and Rayleigh factor h (2 + cos)/3 under M
    norm2 = (m + 1) / 2.0 * sys.h * (2.0 + c) / 3.0
    return s / np.sqrt(norm2)[:, None]


def sine_alias(m: int, J: int) -> tuple[np.ndarray, np.ndarray]:
    """Grid aliasing of sin(l pi x_i), l = 1..J, onto the discrete sines of the m-node mesh.

    Returns ``(mode, sign)``: sin(l pi x_i) = sign * sin(mode pi x_i) with
    ``mode`` in 1..m, or ``sign = 0`` when the sine vanishes at every node.
    """
    period = 2 * (m + 1)
    r = np.arange(1, J + 1) % period
    mode = np.where(r <= m + 1, r, period - r)
    sign = np.where(r <= m + 1, 1.0, -1.0)
    sign = np.where((r == 0) | (r == m + 1), 0.0, sign)
    mode = np.where(sign == 0.0, 1, mode)
    return mode.astype(np.int64), sign

