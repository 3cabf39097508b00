"""CQ / implicit Euler time stepping, spectral and P1 in space.

Two engines produce the same discrete solution:

``step``
    marches the recurrence u_n (I + dt w_0 A) = u_{n-1} - dt sum_{k<n} w_{n-k} A u_k + dW_n,
    costing O(n^2) per path;
``distvar``
    uses the discrete variation of constants formula u_n = B_n u_0 + sum_k B_{n-k+1} dW_k,
    where B_k is diagonal in the (discrete) eigenbasis. The mode tables are
    built once per level, after which a path costs O(n J).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
import scipy.sparse as sp

from . import _backend
from .fem1d import (
    FemSystem,
    assemble,
    discrete_eigenvalues,
    discrete_laplacian_solve,
    discrete_modes,
    load_vector,
    sine_alias,
)
from .kernels import KernelSpec
from .noise import IncrementSet, coarsen, noise_loads
from .quadrature import WeightTable, weights
from .resolvent import SpectralOperator, mode_exact, mode_tables

ENGINES = ("distvar", "step")


class SchemeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# initial data


@dataclass(frozen=True)
class InitialData:
    """u_0 as a sine series (spectral side) and as a function (FEM side)."""

    name: str
    coeffs: Callable[[int], np.ndarray]
    func: Callable[[np.ndarray], np.ndarray]

    @classmethod
    def parse(cls, name: str) -> "InitialData":
        try:
            return _INITIAL[name.strip().lower()]
        except KeyError:
            raise SchemeError(f"unknown initial datum {name!r}; choose from {sorted(_INITIAL)}") from None


def _x1mx_coeffs(J: int) -> np.ndarray:
    j = np.arange(1, J + 1)
    # (x(1-x), sqrt(2) sin(j pi x)) = 2 sqrt(2) (1 - (-1)^j) / (j pi)^3
    return 2.0 * np.sqrt(2.0) * (1.0 - (-1.0) ** j) / (j * np.pi) ** 3


def _e1_coeffs(J: int) -> np.ndarray:
    c = np.zeros(J)
    c[0] = 1.0
    return c


_INITIAL = {
    "zero": InitialData("zero", lambda J: np.zeros(J), lambda x: np.zeros_like(x)),
    "e1": InitialData("e1", _e1_coeffs, lambda x: np.sqrt(2.0) * np.sin(np.pi * x)),
    "x1mx": InitialData("x1mx", _x1mx_coeffs, lambda x: x * (1.0 - x)),
}


# ---------------------------------------------------------------------------
# single-step API


@dataclass
class SchemeState:
    """History u_1..u_k of one path, with the weights driving it."""

    weights: WeightTable
    u0: np.ndarray
    history: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.history)

    @property
    def shift(self) -> float:
        return self.weights.shift

    @property
    def current(self) -> np.ndarray:
        return self.history[-1] if self.history else self.u0

    def _history_sum(self) -> np.ndarray:
        n = self.k + 1
        if n == 1:
            return np.zeros_like(self.u0)
        om = self.weights.omega
        return np.tensordot(om[n - 1 : 0 : -1], np.asarray(self.history), axes=(0, 0))

    def _check_room(self) -> None:
        if self.k >= self.weights.n:
            raise SchemeError(f"weight table supports {self.weights.n} steps")


def step_spectral(op: SpectralOperator | np.ndarray, state: SchemeState, dW) -> np.ndarray:
    """Advance one step in the eigenbasis; ``op`` may be an operator or an eigenvalue array."""
    state._check_room()
    lam = op.lam if isinstance(op, SpectralOperator) else np.asarray(op, dtype=np.float64)
    dt = state.weights.dt
    rhs = state.current - dt * lam * state._history_sum() + np.asarray(dW, dtype=np.float64)
    u = rhs / (1.0 + state.shift * lam)
    state.history.append(u)
    return u


def step_fem(sys: FemSystem, state: SchemeState, load) -> np.ndarray:
    """(M + dt w_0 K) u_n = M u_{n-1} - dt K sum_k w_{n-k} u_k + load."""
    state._check_room()
    dt = state.weights.dt
    rhs = sys.apply_mass(state.current) - dt * sys.apply_stiffness(state._history_sum())
    u = discrete_laplacian_solve(sys, state.shift, rhs + np.asarray(load, dtype=np.float64))
    state.history.append(u)
    return u


# ---------------------------------------------------------------------------
# problems and levels


class Level(NamedTuple):
    """``n`` time steps; ``m`` interior FEM nodes, or None for the spectral scheme."""

    n: int
    m: int | None = None


@dataclass(frozen=True)
class Problem:
    kernel: KernelSpec
    T: float
    op: SpectralOperator
    initial: InitialData = _INITIAL["zero"]

    @property
    def J(self) -> int:
        return self.op.dim


class LevelSolver:
    """Precomputed data for repeated solves at one level."""

    def __init__(self, problem: Problem, level: Level, engine: str = "distvar"):
        if engine not in ENGINES:
            raise SchemeError(f"engine must be one of {ENGINES}")
        if level.n < 0:
            raise SchemeError("n must be >= 0")
        self.problem = problem
        self.level = level
        self.engine = engine
        self.spatial = level.m is not None
        J = problem.J
        n = level.n
        self.dt = problem.T / n if n else 0.0
        self.w = weights(problem.kernel, self.dt, n) if n else None

        if not self.spatial:
            self.u0 = problem.initial.coeffs(J)
            if engine == "distvar" and n:
                self.table = mode_tables(self.w, problem.op.lam)
            return

        self.sys = assemble(level.m)
        load0 = load_vector(self.sys, problem.initial.func)
        self.u0 = discrete_laplacian_solve(self.sys, 0.0, load0)
        if engine == "step":
            return
        # M-orthonormal discrete sines: coefficients a = V M u, nodal u = V^T a
        self.modes = discrete_modes(self.sys)
        self.a0 = self.modes @ load0
        lam_h = discrete_eigenvalues(level.m)
        if n:
            self.table = mode_tables(self.w, lam_h)
        self.noise_map = _alias_matrix(self.sys, J)

    # -- output helpers ----------------------------------------------------
    def initial(self) -> np.ndarray:
        return self.u0.copy()

    def final(self, increments: IncrementSet | None) -> np.ndarray:
        """Discrete solution at T for one path (``None`` means no noise)."""
        n = self.level.n
        if n == 0:
            return self.initial()
        dW = self._increments(increments)
        if self.engine == "step":
            return self._final_step(dW)
        if self.spatial:
            a = self.table[n] * self.a0
            if dW is not None:
                a = a + _reverse_dot(self.table, self.noise_map.T.dot(dW.T).T)
            return self.modes.T @ a
        u = self.table[n] * self.u0
        if dW is not None:
            u = u + _reverse_dot(self.table, dW)
        return u

    def _increments(self, increments: IncrementSet | None) -> np.ndarray | None:
        if increments is None:
            return None
        n = self.level.n
        if increments.n_fine % n:
            raise SchemeError(f"cannot coarsen {increments.n_fine} increments to {n} steps")
        if not np.isclose(increments.n_fine * increments.dt_fine, self.problem.T, rtol=1e-12):
            raise SchemeError("increments do not span [0, T]")
        if increments.J != self.problem.J:
            raise SchemeError(f"increments carry {increments.J} modes, problem has {self.problem.J}")
        return coarsen(increments, increments.n_fine // n).increments

    def _final_step(self, dW: np.ndarray | None) -> np.ndarray:
        n = self.level.n
        if self.spatial:
            loads = None if dW is None else noise_loads(self.sys, dW)[:, None, :]
            traj = _backend.cq_fem(self.w.omega, self.dt, self.sys.h, self.u0[None, :], loads, n)
            return traj[n, 0]
        lam = self.problem.op.lam
        traj = _backend.cq_diag(self.w.omega, self.dt, lam, self.u0, dW, n)
        return traj[n]


def _reverse_dot(table: np.ndarray, inc: np.ndarray) -> np.ndarray:
    """sum_{k=1}^{n} table[n - k + 1] * inc[k - 1], fixed summation order."""
    n = inc.shape[0]
    return np.einsum("kj,kj->j", table[n:0:-1], inc, optimize=False)


def _alias_matrix(sys: FemSystem, J: int) -> sp.csr_matrix:
    """Sparse map from continuous sine increments to discrete-mode load coefficients.

    (sqrt(2) sin(l pi x), phi_i) = sqrt(2) sin(l pi x_i) g_l with
    g_l = 2 (1 - cos l pi h)/(h (l pi)^2), and sin(l pi x_i) aliases onto a single
    discrete sine, so each row has at most one nonzero.
    """
    m, h = sys.m, sys.h
    mode, sign = sine_alias(m, J)
    a = np.arange(1, J + 1) * np.pi
    g = 2.0 * (1.0 - np.cos(a * h)) / (h * a**2)
    c = np.cos(mode * np.pi * h)
    norm = np.sqrt((m + 1) / 2.0 * h * (2.0 + c) / 3.0)
    vals = np.sqrt(2.0) * g * sign * (m + 1) / 2.0 / norm
    keep = sign != 0.0
    rows = np.arange(J)[keep]
    return sp.csr_matrix((vals[keep], (rows, mode[keep] - 1)), shape=(J, m))


def solve_path(problem: Problem, increments: IncrementSet | None, level: Level, engine: str = "distvar"):
    """Discrete solution at T on one level for one noise path."""
    return LevelSolver(problem, level, engine).final(increments)


# ---------------------------------------------------------------------------
# references


class ExactModes:
    """Reference by the exact resolvent: u_j(T) = s_j(T) u0_j + sum_k s_j(T - t_{k+1/2}) dW_kj.

    s_j comes from the Mittag-Leffler function for the Riesz kernel, or from the
    CQ recurrence at half the increment step when no closed form exists.
    """

    def __init__(self, problem: Problem, n_fine: int):
        self.problem = problem
        self.n_fine = n_fine
        self.u0 = problem.initial.coeffs(problem.J)
        self._s_mid = None
        kernel = problem.kernel
        if kernel.is_pure_power:
            self.s_T = np.asarray(mode_exact(kernel, problem.op.lam, problem.T))
        else:
            self.s_T = self._cq_table()[-1]

    def _cq_table(self) -> np.ndarray:
        n = self.n_fine
        dt = self.problem.T / n
        return mode_tables(weights(self.problem.kernel, dt / 2.0, 2 * n), self.problem.op.lam)

    @property
    def s_mid(self) -> np.ndarray:
        """s_j(T - t_{k+1/2}) for k = 0..n_fine-1, shape (n_fine, J)."""
        if self._s_mid is None:
            n, T, lam = self.n_fine, self.problem.T, self.problem.op.lam
            if self.problem.kernel.is_pure_power:
                t_mid = T - T / n * (np.arange(n) + 0.5)
                self._s_mid = np.asarray(mode_exact(self.problem.kernel, lam[None, :], t_mid[:, None]))
            else:
                # T - t_{k+1/2} = (2n - 2k - 1) dt/2
                self._s_mid = self._cq_table()[2 * n - 1 - 2 * np.arange(n)]
        return self._s_mid

    def final(self, increments: IncrementSet | None) -> np.ndarray:
        u = self.s_T * self.u0
        if increments is None:
            return u
        if increments.n_fine != self.n_fine:
            raise SchemeError("increments must live on the reference grid")
        return u + np.einsum("kj,kj->j", self.s_mid, increments.increments, optimize=False)


def reference_solution(
    problem: Problem, increments: IncrementSet | None, mode: str = "self", level: Level | None = None
) -> np.ndarray:
    """Reference at T: the scheme on a finer ``level`` ("self"), or the exact resolvent ("ml-riemann")."""
    if mode == "self":
        if level is None:
            if increments is None:
                raise SchemeError("a self reference needs a level")
            level = Level(increments.n_fine)
        return solve_path(problem, increments, level)
    if mode == "ml-riemann":
        n_fine = increments.n_fine if increments is not None else (level.n if level else 1)
        return ExactModes(problem, n_fine).final(increments)
    raise SchemeError(f"unknown reference mode {mode!r}")
