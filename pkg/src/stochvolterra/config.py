"""Flat ``key = value`` experiment configuration and its validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .kernels import KernelDomainError, KernelFamily, KernelSpec
from .scheme import ENGINES, InitialData, SchemeError

MODES = ("temporal", "spatial", "full", "deterministic")
REFERENCES = ("self", "ml-riemann")


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps this to exit code 2."""


@dataclass(frozen=True)
class Rates:
    rho: float
    alpha: float
    kappa: float
    gamma: float
    nu: float


def theoretical_rates(beta: float, mu: float, growth: float = 2.0) -> Rates:
    """Strong rates for q_j = lambda_j^-mu, lambda_j ~ j^growth.

    alpha is the limiting trace exponent 1/growth (Tr A^-alpha < oo for every
    larger alpha), kappa = min(mu, alpha). The returned gamma and nu are the
    suprema of the admissible exponents.
    """
    rho = 1.0 + beta
    alpha = 1.0 / growth
    kappa = min(mu, alpha)
    deficit = alpha - kappa
    if deficit >= 1.0 / rho:
        raise ConfigError(
            f"noise too rough: need alpha - kappa < 1/rho, got {deficit:.4g} >= {1.0 / rho:.4g}"
        )
    return Rates(rho, alpha, kappa, (1.0 - rho * deficit) / 2.0, 1.0 / rho - deficit)


@dataclass(frozen=True)
class ExperimentConfig:
    kernel: KernelSpec = field(default_factory=lambda: KernelSpec.riesz(0.5))
    mu: float = 1.0
    J: int | None = None
    seed: int = 0
    noise: bool = True
    growth: float = 2.0
    u0: str | None = None
    mode: str = "temporal"
    T: float = 1.0
    levels: tuple[int, ...] = (16, 32, 64, 128, 256, 512)
    space_levels: tuple[int, ...] = ()
    samples: int = 200
    reference: str = "self"
    reference_level: int | None = None
    workers: int = 1
    engine: str = "distvar"
    n_time: int = 256
    time_factor: int = 8
    space_factor: int = 4
    budget: float = 0.0
    tolerance: float | None = None
    expected: float | None = None

    # -- derived quantities -------------------------------------------------
    @property
    def rates(self) -> Rates:
        return theoretical_rates(self.kernel.beta, self.mu, self.growth)

    @property
    def initial(self) -> InitialData:
        if self.u0 is not None:
            return InitialData.parse(self.u0)
        return InitialData.parse("x1mx" if self.mode == "deterministic" else "zero")

    @property
    def effective_samples(self) -> int:
        return self.samples if self.noise else 1

    def time_reference(self) -> int:
        finest = max(self.time_levels())
        return self.reference_level or self.time_factor * finest

    def mesh_reference(self) -> int:
        """Reference mesh denominator for studies with a spatial part."""
        finest = max(self.mesh_levels())
        return self.space_factor * finest

    def mesh_levels(self) -> tuple[int, ...]:
        if self.mode in ("spatial", "full"):
            return self.levels
        if self.mode == "deterministic":
            return self.space_levels
        return ()

    def time_levels(self) -> tuple[int, ...]:
        if self.mode in ("temporal", "deterministic"):
            return self.levels
        if self.mode == "full":
            return tuple(self.balanced_steps(N) for N in self.levels)
        return (self.n_time,)

    def balanced_steps(self, N: int) -> int:
        """n with dt^gamma ~ h^nu, rounded to a power of two."""
        r = self.rates
        return 1 << max(0, round(math.log2(N) * r.nu / r.gamma))

    def noise_dim(self) -> int:
        if self.J is not None:
            return self.J
        if self.mode in ("spatial", "full"):
            return self.mesh_reference() - 1
        return 64

    def theoretical_rate(self) -> float:
        if self.mode == "spatial":
            return 2.0 if not self.noise else self.rates.nu
        if self.mode == "deterministic":
            return 1.0
        return 1.0 if not self.noise else self.rates.gamma

    def with_(self, **kw) -> "ExperimentConfig":
        cfg = replace(self, **kw)
        validate(cfg)
        return cfg


def _dyadic(values: tuple[int, ...], what: str) -> None:
    if len(values) < 3:
        raise ConfigError(f"{what}: need at least 3 levels for a rate fit, got {len(values)}")
    for a, b in zip(values, values[1:]):
        if b != 2 * a:
            raise ConfigError(f"{what} must double from one level to the next: {a} -> {b}")
    if values[0] < 1:
        raise ConfigError(f"{what} must be positive")


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.mode not in MODES:
        raise ConfigError(f"study.mode must be one of {MODES}")
    if cfg.reference not in REFERENCES:
        raise ConfigError(f"study.reference must be one of {REFERENCES}")
    if cfg.engine not in ENGINES:
        raise ConfigError(f"study.engine must be one of {ENGINES}")
    if not cfg.T > 0.0 or not math.isfinite(cfg.T):
        raise ConfigError("study.T must be positive")
    if cfg.samples < 1:
        raise ConfigError("study.samples must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("study.workers must be >= 1")
    if cfg.growth <= 0.0:
        raise ConfigError("space.growth must be positive")
    if cfg.mu < 0.0:
        raise ConfigError("noise.mu must be >= 0")
    if cfg.J is not None and cfg.J < 1:
        raise ConfigError("noise.J must be >= 1")
    if cfg.time_factor < 2 or cfg.time_factor & (cfg.time_factor - 1):
        raise ConfigError("study.time_factor must be a power of two >= 2")
    if cfg.space_factor < 2 or cfg.space_factor & (cfg.space_factor - 1):
        raise ConfigError("study.space_factor must be a power of two >= 2")
    if cfg.budget < 0.0:
        raise ConfigError("study.budget must be >= 0")
    if cfg.mode in ("spatial", "full", "deterministic") and cfg.growth != 2.0:
        raise ConfigError("FEM studies need the Laplacian growth law space.growth = 2")
    _dyadic(tuple(cfg.levels), "study.levels")
    if cfg.mode == "deterministic":
        _dyadic(tuple(cfg.space_levels), "study.space_levels")
    if cfg.mode in ("spatial", "full", "deterministic") and min(cfg.mesh_levels()) < 2:
        raise ConfigError("mesh denominators must be >= 2")
    try:
        cfg.initial
    except SchemeError as exc:
        raise ConfigError(str(exc)) from None
    if cfg.noise:
        cfg.rates  # raises on inadmissible noise
    n_ref = cfg.time_reference()
    if cfg.mode in ("temporal", "full", "deterministic"):
        if n_ref <= max(cfg.time_levels()):
            raise ConfigError("reference level must be finer than every measured level")
        ratio, rem = divmod(n_ref, max(cfg.time_levels()))
        if rem or ratio & (ratio - 1):
            raise ConfigError("reference level must be a power-of-two multiple of every measured level")
    return cfg


_FLOAT = {"kernel.beta", "kernel.eta", "kernel.scale", "noise.mu", "space.growth", "study.T",
          "study.budget", "study.tolerance", "study.expected"}
_INT = {"noise.J", "noise.seed", "study.samples", "study.workers", "study.n", "study.time_factor",
        "study.space_factor", "study.reference_level"}
_FIELD = {
    "noise.mu": "mu", "noise.J": "J", "noise.seed": "seed", "noise.enabled": "noise",
    "space.growth": "growth", "init.u0": "u0", "study.mode": "mode", "study.T": "T",
    "study.levels": "levels", "study.space_levels": "space_levels", "study.samples": "samples",
    "study.reference": "reference", "study.reference_level": "reference_level",
    "study.workers": "workers", "study.engine": "engine", "study.n": "n_time",
    "study.time_factor": "time_factor", "study.space_factor": "space_factor",
    "study.budget": "budget", "study.tolerance": "tolerance", "study.expected": "expected",
}
_KERNEL_KEYS = ("kernel.family", "kernel.beta", "kernel.eta", "kernel.scale")


def _levels(text: str) -> tuple[int, ...]:
    text = text.strip()
    if ".." in text:
        lo, hi = (int(v) for v in text.split(".."))
        out = [lo]
        while out[-1] < hi:
            out.append(out[-1] * 2)
        if out[-1] != hi:
            raise ValueError(f"{lo}..{hi} is not a doubling range")
        return tuple(out)
    return tuple(int(v) for v in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config(text: str) -> ExperimentConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _FIELD and key not in _KERNEL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    kw = {}
    try:
        family = KernelFamily.parse(raw.get("kernel.family", "riesz"))
        beta = float(raw.get("kernel.beta", 0.5))
        eta = float(raw.get("kernel.eta", 0.0))
        scale = float(raw.get("kernel.scale", 1.0))
        kw["kernel"] = KernelSpec(family, beta, eta, scale)
        for key, value in raw.items():
            if key in _KERNEL_KEYS:
                continue
            name = _FIELD[key]
            if key in _FLOAT:
                kw[name] = float(value)
            elif key in _INT:
                kw[name] = int(value, 0)
            elif key in ("study.levels", "study.space_levels"):
                kw[name] = _levels(value)
            elif key == "noise.enabled":
                kw[name] = _bool(value)
            else:
                kw[name] = value.lower() if key != "init.u0" else value
    except (ValueError, KernelDomainError) as exc:
        raise ConfigError(str(exc)) from None
    return validate(ExperimentConfig(**kw))


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text)


def dump_config(cfg: ExperimentConfig) -> str:
    k = cfg.kernel
    lines = [
        f"kernel.family = {k.family.value}",
        f"kernel.beta = {k.beta!r}",
        f"kernel.eta = {k.eta!r}",
        f"kernel.scale = {k.scale!r}",
        f"noise.mu = {cfg.mu!r}",
        f"noise.J = {cfg.noise_dim()}",
        f"noise.seed = {cfg.seed}",
        f"noise.enabled = {str(cfg.noise).lower()}",
        f"space.growth = {cfg.growth!r}",
        f"init.u0 = {cfg.initial.name}",
        f"study.mode = {cfg.mode}",
        f"study.T = {cfg.T!r}",
        f"study.levels = {', '.join(map(str, cfg.levels))}",
    ]
    if cfg.space_levels:
        lines.append(f"study.space_levels = {', '.join(map(str, cfg.space_levels))}")
    lines += [
        f"study.samples = {cfg.samples}",
        f"study.reference = {cfg.reference}",
        f"study.engine = {cfg.engine}",
        f"study.n = {cfg.n_time}",
    ]
    return "\n".join(lines) + "\n"
