"""Monte Carlo strong-error studies and their CSV reports.

Every sample draws its increments on the reference grid from the
counter-based generator, coarsens them to each measured level and records the
squared L2 error against the reference on the same path. Per-sample results
are stored by sample index and reduced in index order, so the output does not
depend on how samples were distributed over worker processes.
"""

from __future__ import annotations

import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .config import ConfigError, ExperimentConfig
from .fem1d import assemble, prolong, sine_moments
from .noise import NoiseModel, sample_increments
from .rates import RateFit, fit_rate
from .resolvent import SpectralOperator
from .scheme import ExactModes, Level, LevelSolver, Problem

LEVEL_HEADER = "level_index,n,m,dt,h,rms_error,stderr"
SUMMARY_HEADER = "fitted_rate,ci_lo,ci_hi,theoretical_rate,samples,seed"


@dataclass(frozen=True)
class LevelRow:
    level_index: int
    n: int
    m: int
    dt: float
    h: float
    rms_error: float
    stderr: float


@dataclass
class ConvergenceReport:
    label: str
    variable: str
    rows: list[LevelRow]
    fit: RateFit
    theoretical_rate: float
    samples: int
    seed: int
    partial: bool = False
    per_sample: np.ndarray = field(default=None, repr=False)

    @property
    def fitted_rate(self) -> float:
        return self.fit.rate

    @property
    def rate_ci(self) -> tuple[float, float]:
        return self.fit.ci


# ---------------------------------------------------------------------------
# study plans


@dataclass(frozen=True)
class Plan:
    """Everything a worker needs to evaluate per-sample errors."""

    cfg: ExperimentConfig
    levels: tuple[Level, ...]
    reference: Level
    reference_mode: str
    n_fine: int

    @property
    def spatial(self) -> bool:
        return self.levels[0].m is not None


@lru_cache(maxsize=8)
def _problem(cfg: ExperimentConfig) -> Problem:
    J = cfg.noise_dim()
    op = SpectralOperator.power_law(J, cfg.mu, cfg.growth)
    return Problem(cfg.kernel, cfg.T, op, cfg.initial)


@lru_cache(maxsize=8)
def _solvers(plan: Plan):
    problem = _problem(plan.cfg)
    levels = [LevelSolver(problem, lv, plan.cfg.engine) for lv in plan.levels]
    if plan.reference_mode == "self":
        ref = LevelSolver(problem, plan.reference, plan.cfg.engine)
    else:
        ref = ExactModes(problem, plan.n_fine)
    extra = {}
    if plan.spatial:
        if plan.reference_mode == "self":
            extra["ref_sys"] = assemble(plan.reference.m)
        else:
            extra["moments"] = {lv.m: sine_moments(assemble(lv.m), problem.J) for lv in plan.levels}
    return problem, levels, ref, extra


def _noise_model(cfg: ExperimentConfig) -> NoiseModel:
    return NoiseModel(_problem(cfg).op.q_diag, cfg.seed)


def sample_errors(plan: Plan, indices: Sequence[int]) -> np.ndarray:
    """Squared errors, shape (len(indices), levels)."""
    problem, levels, ref, extra = _solvers(plan)
    cfg = plan.cfg
    model = _noise_model(cfg) if cfg.noise else None
    out = np.empty((len(indices), len(levels)))
    for r, s in enumerate(indices):
        inc = sample_increments(model, plan.n_fine, cfg.T / plan.n_fine, s) if model else None
        u_ref = ref.final(inc)
        for c, (lv, solver) in enumerate(zip(plan.levels, levels)):
            u = solver.final(inc)
            out[r, c] = _sq_error(plan, lv, u, u_ref, extra)
    return out


def _sq_error(plan: Plan, lv: Level, u: np.ndarray, u_ref: np.ndarray, extra: dict) -> float:
    if lv.m is None:
        d = u - u_ref
        return float(np.dot(d, d))
    if plan.reference_mode == "self":
        sys = extra["ref_sys"]
        d = prolong(u, (plan.reference.m + 1) // (lv.m + 1)) - u_ref
        return float(np.dot(d, sys.apply_mass(d)))
    # ||u_h - u||^2 with u a sine series: exact through the closed-form moments
    sys = assemble(lv.m)
    G = extra["moments"][lv.m]
    val = np.dot(u, sys.apply_mass(u)) - 2.0 * np.dot(u_ref, G @ u) + np.dot(u_ref, u_ref)
    return float(max(val, 0.0))


def _chunks(M: int, size: int) -> list[range]:
    return [range(lo, min(M, lo + size)) for lo in range(0, M, size)]


def collect(plan: Plan, samples: int, workers: int = 1, budget: float = 0.0) -> tuple[np.ndarray, bool]:
    """Per-sample squared errors in sample order; flags a partial run on budget exhaustion.

    The first chunk always runs to completion, so a partial report holds at least
    one sample.
    """
    size = max(1, min(16, math.ceil(samples / (4 * workers))))
    chunks = _chunks(samples, size)
    start = time.monotonic()
    results: dict[int, np.ndarray] = {}
    partial = False
    if workers == 1:
        for i, ch in enumerate(chunks):
            if i and budget and time.monotonic() - start > budget:
                partial = True
                break
            results[i] = sample_errors(plan, list(ch))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(sample_errors, plan, list(ch)) for ch in chunks]
            for i, fut in enumerate(futures):
                remaining = None
                if i and budget:
                    remaining = max(0.0, budget - (time.monotonic() - start))
                try:
                    results[i] = fut.result(timeout=remaining)
                except FutureTimeout:
                    partial = True
                    for f in futures[i:]:
                        f.cancel()
                    break
    # keep a contiguous prefix of samples so partial runs stay well defined
    keep = []
    for i in range(len(chunks)):
        if i not in results:
            break
        keep.append(results[i])
    return np.concatenate(keep, axis=0), partial


def summarize(
    label: str, variable: str, plan: Plan, sq: np.ndarray, theoretical: float, partial: bool
) -> ConvergenceReport:
    cfg = plan.cfg
    M = sq.shape[0]
    rows = []
    for i, lv in enumerate(plan.levels):
        mean = float(np.mean(sq[:, i]))
        rms = math.sqrt(mean)
        sd = float(np.std(sq[:, i], ddof=1)) if M > 1 else 0.0
        se = sd / math.sqrt(M) / (2.0 * rms) if rms > 0.0 else 0.0
        m = lv.m if lv.m is not None else cfg.noise_dim()
        h = 1.0 / (lv.m + 1) if lv.m is not None else 0.0
        rows.append(LevelRow(i, lv.n, m, cfg.T / lv.n, h, rms, se))
    steps = [r.dt if variable == "dt" else r.h for r in rows]
    errs = [r.rms_error for r in rows]
    fit = fit_rate(steps, errs, [r.stderr for r in rows], per_sample=sq if M > 1 else None,
                   seed=cfg.seed)
    return ConvergenceReport(label, variable, rows, fit, theoretical, M, cfg.seed, partial, sq)


def _run(label, variable, plan, theoretical, workers) -> ConvergenceReport:
    cfg = plan.cfg
    sq, partial = collect(plan, cfg.effective_samples, workers or cfg.workers, cfg.budget)
    return summarize(label, variable, plan, sq, theoretical, partial)


# ---------------------------------------------------------------------------
# studies


def _require(cfg: ExperimentConfig, mode: str) -> None:
    if cfg.mode != mode:
        raise ConfigError(f"expected study.mode = {mode}, got {cfg.mode}")


def temporal_plan(cfg: ExperimentConfig) -> Plan:
    n_ref = cfg.time_reference()
    levels = tuple(Level(n) for n in cfg.levels)
    return Plan(cfg, levels, Level(n_ref), cfg.reference, n_ref)


def run_temporal_study(cfg: ExperimentConfig, workers: int | None = None) -> ConvergenceReport:
    _require(cfg, "temporal")
    return _run("temporal", "dt", temporal_plan(cfg), cfg.theoretical_rate(), workers)


def spatial_plan(cfg: ExperimentConfig) -> Plan:
    if cfg.reference != "self":
        raise ConfigError("spatial studies share one time grid and need the self reference")
    N_ref = cfg.mesh_reference()
    levels = tuple(Level(cfg.n_time, N - 1) for N in cfg.mesh_levels())
    return Plan(cfg, levels, Level(cfg.n_time, N_ref - 1), "self", cfg.n_time)


def run_spatial_study(cfg: ExperimentConfig, workers: int | None = None) -> ConvergenceReport:
    _require(cfg, "spatial")
    return _run("spatial", "h", spatial_plan(cfg), cfg.theoretical_rate(), workers)


def full_plan(cfg: ExperimentConfig) -> Plan:
    n_ref = cfg.time_reference()
    N_ref = cfg.mesh_reference()
    levels = tuple(Level(n, N - 1) for n, N in zip(cfg.time_levels(), cfg.levels))
    return Plan(cfg, levels, Level(n_ref, N_ref - 1), cfg.reference, n_ref)


def run_full_study(cfg: ExperimentConfig, workers: int | None = None) -> ConvergenceReport:
    """Joint refinement with n balanced against N; the rate is the effective order in dt."""
    _require(cfg, "full")
    return _run("full", "dt", full_plan(cfg), cfg.theoretical_rate(), workers)


def run_deterministic_study(cfg: ExperimentConfig, workers: int | None = None) -> list[ConvergenceReport]:
    """Noise-free sub-studies: order in dt (spectral) and in h (FEM on a shared fine time grid)."""
    _require(cfg, "deterministic")
    u0 = cfg.initial.name
    det = cfg.with_(noise=False, mode="temporal", u0=u0)
    time_report = _run("deterministic-time", "dt", temporal_plan(det), 1.0, workers)
    space_cfg = cfg.with_(noise=False, mode="spatial", levels=cfg.space_levels, reference="self", u0=u0)
    space_report = _run("deterministic-space", "h", spatial_plan(space_cfg), 2.0, workers)
    return [time_report, space_report]


def run_study(cfg: ExperimentConfig, workers: int | None = None) -> list[ConvergenceReport]:
    if cfg.mode == "temporal":
        return [run_temporal_study(cfg, workers)]
    if cfg.mode == "spatial":
        return [run_spatial_study(cfg, workers)]
    if cfg.mode == "full":
        return [run_full_study(cfg, workers)]
    return run_deterministic_study(cfg, workers)


# ---------------------------------------------------------------------------
# CSV output


def _g(x: float) -> str:
    return repr(float(x))


def level_csv(reports: Sequence[ConvergenceReport]) -> str:
    buf = io.StringIO()
    buf.write(LEVEL_HEADER + "\n")
    idx = 0
    for rep in reports:
        for r in rep.rows:
            buf.write(f"{idx},{r.n},{r.m},{_g(r.dt)},{_g(r.h)},{_g(r.rms_error)},{_g(r.stderr)}\n")
            idx += 1
    return buf.getvalue()


def summary_csv(reports: Sequence[ConvergenceReport]) -> str:
    buf = io.StringIO()
    buf.write(SUMMARY_HEADER + "\n")
    for rep in reports:
        f = rep.fit
        buf.write(
            f"{_g(f.rate)},{_g(f.ci_lo)},{_g(f.ci_hi)},{_g(rep.theoretical_rate)},{rep.samples},{rep.seed}\n"
        )
    return buf.getvalue()
