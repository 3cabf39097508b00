"""Log-log rate regression with bootstrap confidence intervals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RateFit:
    rate: float
    ci_lo: float
    ci_hi: float
    intercept: float

    @property
    def ci(self) -> tuple[float, float]:
        return self.ci_lo, self.ci_hi


def _wls(x: np.ndarray, y: np.ndarray, w: np.ndarray | None) -> tuple[float, float]:
    if w is None:
        w = np.ones_like(x)
    sw = w.sum()
    xm = (w * x).sum() / sw
    ym = (w * y).sum() / sw
    dx = x - xm
    slope = float((w * dx * (y - ym)).sum() / (w * dx * dx).sum())
    return slope, float(ym - slope * xm)


def _weights(stderr, errors) -> np.ndarray | None:
    if stderr is None:
        return None
    se = np.asarray(stderr, dtype=np.float64)
    err = np.asarray(errors, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma = se / (err * np.log(2.0))
        w = 1.0 / sigma**2
    if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
        return None
    return w / w.max()


def fit_rate(
    steps,
    errors,
    stderr=None,
    per_sample=None,
    resamples: int = 1000,
    seed: int = 0,
    level: float = 0.95,
) -> RateFit:
    """Slope of log2(error) against log2(step).

    Weighted least squares with weights from the Monte Carlo standard errors
    when they are all positive. ``per_sample`` (samples x levels squared errors)
    drives a bootstrap over sample rows; without it the residuals are resampled.
    """
    x = np.log2(np.asarray(steps, dtype=np.float64))
    err = np.asarray(errors, dtype=np.float64)
    if x.shape != err.shape or x.ndim != 1:
        raise ValueError("steps and errors must be 1-d arrays of equal length")
    if x.size < 3:
        raise ValueError(f"need at least 3 levels to fit a rate, got {x.size}")
    if np.any(err <= 0.0) or not np.all(np.isfinite(err)):
        raise ValueError("errors must be positive and finite")
    y = np.log2(err)
    w = _weights(stderr, err)
    rate, icpt = _wls(x, y, w)

    rng = np.random.default_rng(seed)
    boot = np.empty(resamples)
    if per_sample is not None:
        sq = np.asarray(per_sample, dtype=np.float64)
        M = sq.shape[0]
        for b in range(resamples):
            idx = rng.integers(0, M, M)
            rms = np.sqrt(sq[idx].mean(axis=0))
            with np.errstate(divide="ignore"):
                yb = np.log2(rms)
            boot[b] = _wls(x, yb, w)[0] if np.all(np.isfinite(yb)) else rate
    else:
        resid = y - (icpt + rate * x)
        for b in range(resamples):
            boot[b] = _wls(x, icpt + rate * x + rng.choice(resid, resid.size), w)[0]
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(boot, [tail, 1.0 - tail])
    return RateFit(rate, float(min(lo, rate)), float(max(hi, rate)), icpt)
