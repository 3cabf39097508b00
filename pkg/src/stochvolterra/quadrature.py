"""Convolution quadrature weights for the implicit Euler generating function.

The weights are the Taylor coefficients of b^((1 - z)/dt).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .kernels import KernelDomainError, KernelFamily, KernelSpec, kernel_laplace

EPS = np.finfo(np.float64).eps

LaplaceLike = Union[KernelSpec, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class WeightTable:
    dt: float
    n: int
    omega: np.ndarray = field(repr=False)
    kernel: KernelSpec | None = None
    method: str = "recurrence"
    accurate: bool = True

    def __post_init__(self):
        omega = np.ascontiguousarray(self.omega, dtype=np.float64)
        if omega.shape != (self.n + 1,):
            raise ValueError(f"expected {self.n + 1} weights, got shape {omega.shape}")
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)

    @property
    def shift(self) -> float:
        """dt * omega_0, the coefficient of A in the implicit solve."""
        return self.dt * float(self.omega[0])


def binomial_series(beta: float, n: int) -> np.ndarray:
    """Coefficients c_0..c_n of (1 - z)^(-beta)."""
    k = np.arange(1, n + 1, dtype=np.float64)
    c = np.empty(n + 1)
    c[0] = 1.0
    c[1:] = np.cumprod((k - 1.0 + beta) / k)
    return c


def _check(dt: float, n: int) -> None:
    if not dt > 0.0:
        raise KernelDomainError(f"dt must be positive, got {dt}")
    if n < 1:
        raise KernelDomainError(f"n must be >= 1, got {n}")


def weights_riesz(beta: float, dt: float, n: int) -> WeightTable:
    _check(dt, n)
    spec = KernelSpec.riesz(beta)
    return WeightTable(dt, n, dt**beta * binomial_series(beta, n), spec)


def weights_tempered(spec: KernelSpec, dt: float, n: int) -> WeightTable:
    """Closed form: C dt^beta (1 + eta dt - z)^(-beta) expanded in z."""
    _check(dt, n)
    a = 1.0 + spec.eta * dt
    k = np.arange(n + 1, dtype=np.float64)
    c = binomial_series(spec.beta, n)
    omega = spec.scale * (dt / a) ** spec.beta * c * a ** (-k)
    return WeightTable(dt, n, omega, spec)


def contour_points(n: int, radius: float | None = None) -> int:
    """Power-of-two point count with at least 32 n points and r^m <= eps."""
    m = 32 * n
    if radius is not None and 0.0 < radius < 1.0:
        m = max(m, math.ceil(math.log(EPS) / math.log(radius)))
    return 1 << (m - 1).bit_length()


def weights_contour(
    spec: LaplaceLike, dt: float, n: int, radius: float | None = None, points: int | None = None
) -> WeightTable:
    """Weights by trapezoidal rule on the circle |z| = radius, evaluated with an FFT.

    ``spec`` may be a KernelSpec or any callable returning b^ on complex input.
    Aliasing contributes about r^m relative error and round-off about
    eps * r^-n, so the default radius eps^(1/m) keeps both near eps when m >> n.
    """
    _check(dt, n)
    if radius is not None and not 0.0 < radius < 1.0:
        raise KernelDomainError(f"radius must lie in (0, 1), got {radius}")
    m = points if points is not None else contour_points(n, radius)
    if m < n + 1:
        raise KernelDomainError(f"need at least n + 1 = {n + 1} contour points")
    if radius is None:
        radius = EPS ** (1.0 / m)
    transform = (lambda z: kernel_laplace(spec, z)) if isinstance(spec, KernelSpec) else spec
    z = radius * np.exp(2j * np.pi * np.arange(m) / m)
    samples = np.asarray(transform((1.0 - z) / dt), dtype=np.complex128)
    coef = np.fft.fft(samples)[: n + 1] / m
    omega = coef.real * radius ** (-np.arange(n + 1, dtype=np.float64))

    kernel = spec if isinstance(spec, KernelSpec) else None
    accurate = True
    if kernel is not None and kernel.family is KernelFamily.RIESZ:
        ref = weights_riesz(kernel.beta, dt, n).omega
        err = float(np.max(np.abs(omega - ref) / np.abs(ref)))
        if err > 1e-10:
            accurate = False
            warnings.warn(f"contour weights miss the recurrence by {err:.2e} (relative)", stacklevel=2)
    return WeightTable(dt, n, omega, kernel, method="contour", accurate=accurate)


def weights(spec: KernelSpec, dt: float, n: int) -> WeightTable:
    """Exact weights for the supported families."""
    if spec.is_pure_power:
        return weights_riesz(spec.beta, dt, n)
    return weights_tempered(spec, dt, n)


def discrete_convolution(w: WeightTable, f, k: int):
    """sum_{j=1}^{k} omega_{k-j} f_j, with ``f[j - 1]`` holding f_j."""
    if not 1 <= k <= w.n:
        raise IndexError(f"k = {k} outside 1..{w.n}")
    f = np.asarray(f, dtype=np.float64)
    if f.shape[0] < k:
        raise IndexError(f"need f_1..f_{k}, got {f.shape[0]} entries")
    return np.tensordot(w.omega[k - 1 :: -1], f[:k], axes=(0, 0))


def cq_integral_error(beta: float, n: int, T: float = 1.0) -> float:
    """|CQ(1)(T) - T^beta / Gamma(beta + 1)| for f = 1 on n steps."""
    w = weights_riesz(beta, T / n, n)
    approx = math.fsum(w.omega[:n])
    return abs(approx - T**beta / math.gamma(beta + 1.0))
