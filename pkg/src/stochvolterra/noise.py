"""Q-Wiener increments in the eigenbasis of A from a counter-based generator.

Entry (k, j) of sample ``s`` is a pure function of ``(seed, s, k, j)``, so paths
are reproducible regardless of how samples are scheduled.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from .fem1d import FemSystem, discrete_laplacian_solve, sine_moments

MAGIC = b"VOLTNOIS"
_HEADER = struct.Struct("<8sIIQ")


@dataclass(frozen=True)
class NoiseModel:
    q_diag: np.ndarray = field(repr=False)
    seed: int = 0

    def __post_init__(self):
        q = np.ascontiguousarray(self.q_diag, dtype=np.float64)
        if q.ndim != 1 or q.size == 0:
            raise ValueError("q_diag must be a non-empty 1-d array")
        if np.any(q < 0.0):
            raise ValueError("q_diag must be nonnegative")
        q.setflags(write=False)
        object.__setattr__(self, "q_diag", q)
        object.__setattr__(self, "seed", int(self.seed) & 0xFFFFFFFFFFFFFFFF)

    @property
    def dim(self) -> int:
        return self.q_diag.shape[0]

    @classmethod
    def power_law(cls, dim: int, mu: float, seed: int = 0, growth: float = 2.0) -> "NoiseModel":
        """q_j = lambda_j^-mu with lambda_j = (j pi)^growth."""
        lam = (np.pi * np.arange(1, dim + 1)) ** growth
        return cls(lam**-mu, seed)


@dataclass(frozen=True)
class IncrementSet:
    n_fine: int
    dt_fine: float
    increments: np.ndarray = field(repr=False)
    seed: int = 0

    @property
    def J(self) -> int:
        return self.increments.shape[1]


def standard_normals(seed: int, stream: int, k0: int, n: int, J: int) -> np.ndarray:
    """N(0, 1) draws addressed by (seed, stream, k, j); rows are k = k0..k0+n-1.

    Philox4x32-10 with key ``seed`` and counter ``(j, k, stream_lo, stream_hi)``;
    the four output words give two 53-bit uniforms for one Box-Muller normal.
    """
    return _backend.philox_normals(seed, stream, k0, n, J)


def sample_increments(model: NoiseModel, n_fine: int, dt_fine: float, sample_index: int) -> IncrementSet:
    if n_fine < 1:
        raise ValueError("n_fine must be >= 1")
    if not dt_fine > 0.0:
        raise ValueError("dt_fine must be positive")
    xi = standard_normals(model.seed, sample_index, 0, n_fine, model.dim)
    inc = xi * np.sqrt(dt_fine * model.q_diag)
    return IncrementSet(n_fine, dt_fine, inc, model.seed)


def coarsen(inc: IncrementSet, factor: int) -> IncrementSet:
    """Sum blocks of ``factor`` consecutive increments.

    Sums are formed by repeated pairwise halving, so coarsening by 4 equals
    coarsening by 2 twice, bit for bit.
    """
    if factor < 1 or factor & (factor - 1):
        raise ValueError("factor must be a power of two")
    if inc.n_fine % factor:
        raise ValueError(f"factor {factor} does not divide n_fine = {inc.n_fine}")
    data = inc.increments
    f = factor
    while f > 1:
        data = data[0::2] + data[1::2]
        f //= 2
    return IncrementSet(inc.n_fine // factor, inc.dt_fine * factor, data, inc.seed)


def project_noise_fem(sys: FemSystem, inc_row) -> np.ndarray:
    """P_h of sum_j inc_row[j] e_j with e_j = sqrt(2) sin(j pi x)."""
    return discrete_laplacian_solve(sys, 0.0, noise_loads(sys, inc_row))


def noise_loads(sys: FemSystem, increments) -> np.ndarray:
    """Mass-weighted increments (dW, phi_i); works on a single row or an (n, J) block."""
    inc = np.asarray(increments, dtype=np.float64)
    return inc @ sine_moments(sys, inc.shape[-1])


def dump_increments(path: str | Path, inc: IncrementSet) -> None:
    data = np.ascontiguousarray(inc.increments, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, inc.n_fine, data.shape[1], inc.seed))
        fh.write(data.tobytes())


def load_increments(path: str | Path, dt_fine: float) -> IncrementSet:
    raw = Path(path).read_bytes()
    magic, n_fine, J, seed = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: not an increment dump")
    data = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if data.size != n_fine * J:
        raise ValueError(f"{path}: expected {n_fine * J} values, found {data.size}")
    return IncrementSet(n_fine, dt_fine, data.reshape(n_fine, J).astype(np.float64), seed)
