"""Memory kernels b(t) of Riesz type and their Laplace transforms."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class KernelDomainError(ValueError):
    """Argument outside the domain where the kernel or its transform is defined."""


class KernelFamily(str, enum.Enum):
    RIESZ = "riesz"
    TEMPERED = "tempered"

    @classmethod
    def parse(cls, name: str) -> "KernelFamily":
        key = name.strip().lower().replace("_", "-")
        aliases = {"riesz": cls.RIESZ, "tempered": cls.TEMPERED, "tempered-riesz": cls.TEMPERED,
                   "temperedriesz": cls.TEMPERED}
        try:
            return aliases[key]
        except KeyError:
            raise KernelDomainError(f"unknown kernel family {name!r}") from None


@dataclass(frozen=True)
class KernelSpec:
    """b(t) = C t^(beta-1) e^(-eta t) / Gamma(beta).

    The Riesz family is the special case ``eta = 0, scale = 1``.
    """

    family: KernelFamily = KernelFamily.RIESZ
    beta: float = 0.5
    eta: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if not 0.0 < self.beta < 1.0:
            raise KernelDomainError(f"beta must lie in (0, 1), got {self.beta}")
        if self.eta < 0.0:
            raise KernelDomainError(f"eta must be >= 0, got {self.eta}")
        if self.scale <= 0.0:
            raise KernelDomainError(f"scale must be > 0, got {self.scale}")
        if self.family is KernelFamily.RIESZ and (self.eta != 0.0 or self.scale != 1.0):
            raise KernelDomainError("a Riesz kernel has eta = 0 and scale = 1")

    @classmethod
    def riesz(cls, beta: float) -> "KernelSpec":
        return cls(KernelFamily.RIESZ, beta)

    @classmethod
    def tempered(cls, beta: float, eta: float, scale: float = 1.0) -> "KernelSpec":
        return cls(KernelFamily.TEMPERED, beta, eta, scale)

    @property
    def rho(self) -> float:
        return 1.0 + self.beta

    @property
    def theta_sector(self) -> float:
        # |arg b^(z)| <= beta * |arg z| holds for both families on Re z > 0
        return self.beta * math.pi / 2.0

    @property
    def is_pure_power(self) -> bool:
        """True when the transform is exactly z^(-beta)."""
        return self.eta == 0.0 and self.scale == 1.0


def kernel_eval(spec: KernelSpec, t):
    """Evaluate b(t) for t > 0 (scalar or array)."""
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr <= 0.0):
        raise KernelDomainError("kernel is only defined for t > 0")
    val = spec.scale * t_arr ** (spec.beta - 1.0) * np.exp(-spec.eta * t_arr) / math.gamma(spec.beta)
    return float(val) if val.ndim == 0 else val


def kernel_laplace(spec: KernelSpec, z):
    """Principal-branch Laplace transform C (z + eta)^(-beta)."""
    z_arr = np.asarray(z, dtype=np.complex128)
    w = z_arr + spec.eta
    if np.any(w == 0):
        raise KernelDomainError("z = -eta is the branch point of the transform")
    val = spec.scale * w ** (-spec.beta)
    return complex(val) if val.ndim == 0 else val


def sector_angle(spec: KernelSpec, sample_count: int = 4096) -> tuple[float, float]:
    """Sampled sup of |arg b^(z)| on the imaginary axis, and 1 + 2 sup / pi.

    Arguments z = i y with y log-spaced over [1e-8, 1e8]; the sup over the closed
    right half-plane is attained on this boundary for both families.
    """
    if sample_count < 16:
        raise KernelDomainError("sample_count must be at least 16")
    y = np.logspace(-8.0, 8.0, sample_count)
    vals = kernel_laplace(spec, 1j * y)
    sup = float(np.max(np.abs(np.angle(vals))))
    return sup, 1.0 + 2.0 * sup / math.pi
