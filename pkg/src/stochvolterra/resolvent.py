"""Per-mode resolvent s_lambda(t) and its CQ counterpart b_k(lambda).

On an eigenvector of A with eigenvalue lambda the equation decouples into
s' + lambda (b * s) = 0, s(0) = 1, solved by E_rho(-lambda t^rho) for the
Riesz kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .kernels import KernelSpec
from .mittag_leffler import mittag_leffler
from .quadrature import WeightTable, weights


class UnsupportedKernelError(ValueError):
    pass


@dataclass(frozen=True)
class SpectralOperator:
    """Diagonal A and Q in a shared orthonormal eigenbasis, truncated to ``dim`` modes."""

    lam: np.ndarray = field(repr=False)
    q_diag: np.ndarray = field(repr=False)
    kappa: float
    alpha: float

    def __post_init__(self):
        lam = np.ascontiguousarray(self.lam, dtype=np.float64)
        q = np.ascontiguousarray(self.q_diag, dtype=np.float64)
        if lam.ndim != 1 or q.shape != lam.shape:
            raise ValueError("lam and q_diag must be 1-d arrays of equal length")
        if np.any(lam <= 0.0) or np.any(np.diff(lam) < 0.0):
            raise ValueError("eigenvalues must be positive and nondecreasing")
        if np.any(q < 0.0):
            raise ValueError("q_diag must be nonnegative")
        lam.setflags(write=False)
        q.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "q_diag", q)

    @property
    def dim(self) -> int:
        return self.lam.shape[0]

    @classmethod
    def power_law(cls, dim: int, mu: float, growth: float = 2.0) -> "SpectralOperator":
        """lambda_j = (j pi)^growth, q_j = lambda_j^-mu.

        ``growth = 2`` is the Dirichlet Laplacian on (0, 1). The trace exponent is
        the limiting value alpha = 1/growth and kappa = min(mu, alpha).
        """
        lam = (np.pi * np.arange(1, dim + 1, dtype=np.float64)) ** growth
        alpha = 1.0 / growth
        return cls(lam, lam**-mu, min(mu, alpha), alpha)

    def q_bound(self) -> float:
        """max_j lambda_j^kappa q_j, the truncated norm of A^kappa Q."""
        return float(np.max(self.lam**self.kappa * self.q_diag))

    def admissible(self, rho: float) -> bool:
        return self.alpha - 1.0 / rho < self.kappa <= self.alpha


@dataclass(frozen=True)
class ModeSolution:
    lam: float
    t_grid: np.ndarray
    s_values: np.ndarray


def mode_exact(spec: KernelSpec, lam, t):
    """s_lambda(t) = E_rho(-lambda t^rho); Riesz kernels only."""
    if not spec.is_pure_power:
        raise UnsupportedKernelError("closed form exists for the pure Riesz kernel only")
    lam = np.asarray(lam, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0.0) or np.any(lam < 0.0):
        raise ValueError("need lambda >= 0 and t >= 0")
    return mittag_leffler(spec.rho, -lam * t**spec.rho)


def mode_tables(w: WeightTable, lam, n: int | None = None) -> np.ndarray:
    """b_k(lambda_j) for k = 0..n, all modes at once; shape ``(n + 1, J)``."""
    n = w.n if n is None else n
    if n > w.n:
        raise ValueError(f"weight table holds {w.n} steps, asked for {n}")
    lam = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    return _backend.cq_diag(w.omega, w.dt, lam, np.ones_like(lam), None, n)


def discrete_mode_operator(spec: KernelSpec, lam: float, dt: float, n: int) -> np.ndarray:
    """Scalar homogeneous CQ solution b_0 = 1, b_1, ..., b_n."""
    return mode_tables(weights(spec, dt, n), [lam])[:, 0]


def mode_numeric(spec: KernelSpec, lam: float, dt_fine: float, n: int) -> ModeSolution:
    values = discrete_mode_operator(spec, lam, dt_fine, n)
    return ModeSolution(float(lam), dt_fine * np.arange(n + 1), values)


def mode_values(spec: KernelSpec, lam, t: float, steps: int = 8192) -> np.ndarray:
    """s_lambda(t) for each lambda; CQ with ``steps`` steps when no closed form exists."""
    lam = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    if t == 0.0:
        return np.ones_like(lam)
    if spec.is_pure_power:
        return np.atleast_1d(mode_exact(spec, lam, t))
    return mode_tables(weights(spec, t / steps, steps), lam)[-1]


def resolvent_apply(op: SpectralOperator, spec: KernelSpec, t: float, x_coeffs, steps: int = 8192):
    """S(t) x in the eigenbasis of A."""
    x = np.asarray(x_coeffs, dtype=np.float64)
    if x.shape[-1] != op.dim:
        raise ValueError(f"expected {op.dim} coefficients, got {x.shape[-1]}")
    if t < 0.0 or not math.isfinite(t):
        raise ValueError("t must be a finite nonnegative time")
    return mode_values(spec, op.lam, t, steps) * x
