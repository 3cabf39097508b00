import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochvolterra import mittag_leffler as mlmod
from stochvolterra.mittag_leffler import MittagLefflerDomainError, mittag_leffler



def ml_oracle(rho, x):
    """High precision series; x^m/Gamma(rho m + 1) summed until negligible.

    The terms peak near exp(|x|^(1/rho)), so the working precision grows with it.
    """
    if rho == 0.5:
        # E_1/2(-z) = exp(z^2) erfc(z)
        with mpmath.workdps(40):
            return float(mpmath.exp(mpmath.mpf(x) ** 2) * mpmath.erfc(-mpmath.mpf(x)))
    t = abs(x) ** (1.0 / rho)
    with mpmath.workdps(40 + int(t / 2.3)):
        return _series(rho, x)


def _series(rho, x):
    x = mpmath.mpf(x)
    rho = mpmath.mpf(rho)
    total, m = mpmath.mpf(0), 0
    while True:
        term = x**m / mpmath.gamma(rho * m + 1)
        total += term
        if m > 10 and abs(term) < mpmath.mpf(10) ** -40:
            return float(total)
        m += 1


def test_examples():
    for rho in (0.3, 1.0, 1.5, 2.0):
        assert mittag_leffler(rho, 0.0) == 1.0
    assert mittag_leffler(1.0, -1.0) == pytest.approx(math.exp(-1), abs=1e-15)
    assert mittag_leffler(2.0, -1.0) == pytest.approx(math.cos(1.0), abs=1e-15)
    assert mittag_leffler(1.5, -4.0) == pytest.approx(ml_oracle(1.5, -4.0), abs=1e-12)


def test_domain():
    for rho in (0.0, -1.0, 2.5, float("nan")):
        with pytest.raises(MittagLefflerDomainError):
            mittag_leffler(rho, -1.0)
    with pytest.raises(MittagLefflerDomainError):
        mittag_leffler(1.5, 0.5)


@pytest.mark.parametrize("rho", [0.5, 1.1, 1.25, 1.5, 1.75, 1.9])
def test_against_series_oracle(rho):
    xs = -np.concatenate([np.linspace(0, 10, 11), np.geomspace(10.5, 60, 12)])
    got = mittag_leffler(rho, xs)
    ref = np.array([ml_oracle(rho, x) for x in xs])
    assert np.max(np.abs(got - ref)) < 1e-10


@pytest.mark.parametrize("rho", [1.25, 1.5, 1.75])
def test_large_arguments_against_mpmath_integral(rho):
    # mpmath's own ML-free route: the integral representation at 40 digits
    def ref(s):
        t = mpmath.mpf(s) ** (1 / mpmath.mpf(rho))
        c = mpmath.cos(mpmath.pi * rho)
        f = lambda w: (mpmath.exp(-t * w ** (1 / mpmath.mpf(rho))) + mpmath.exp(-t * w ** (-1 / mpmath.mpf(rho)))) / (w * w + 2 * w * c + 1)
        integral = mpmath.quad(f, [0, mpmath.mpf(10) ** -8, 0.01, 0.5, 1])
        g = 2 / mpmath.mpf(rho) * mpmath.exp(t * mpmath.cos(mpmath.pi / rho)) * mpmath.cos(t * mpmath.sin(mpmath.pi / rho))
        return float(mpmath.sin(rho * mpmath.pi) / (rho * mpmath.pi) * integral + g)

    with mpmath.workdps(30):
        for s in (1e3, 1e4, 1e6):
            assert abs(mittag_leffler(rho, -s) - ref(s)) < 1e-10


@pytest.mark.parametrize("rho", [1.1, 1.25, 1.5, 1.75, 1.95])
def test_branch_continuity(rho):
    s = np.array([mlmod.TAYLOR_LIMIT])
    assert abs(mlmod._taylor(rho, -s)[0] - mlmod._integral(rho, s)[0]) < 1e-9
    s = np.array([mlmod.ASYMPTOTIC_T**rho])
    assert abs(mlmod._integral(rho, s)[0] - mlmod._asymptotic(rho, s)[0]) < 1e-10


@given(st.floats(1.01, 1.99), st.floats(-1e6, 0.0))
def test_bounded_by_one(rho, x):
    assert abs(mittag_leffler(rho, x)) <= 1.0 + 1e-10


def test_array_shape_and_scalar_return():
    out = mittag_leffler(1.5, -np.ones((3, 4)))
    assert out.shape == (3, 4)
    assert isinstance(mittag_leffler(1.5, -2.0), float)


def test_gradient_matches_integral_identity():
    # d/dt E(-lam t^rho) = -lam int_0^t b(t-s) s(s) ds, b Riesz with beta = rho - 1
    rho, lam, t = 1.5, 3.0, 0.8
    beta = rho - 1.0
    s = lambda u: mittag_leffler(rho, -lam * u**rho)
    h = 1e-5
    fd = (s(t + h) - s(t - h)) / (2 * h)
    conv = mpmath.quad(lambda v: (t - v) ** (beta - 1) / math.gamma(beta) * s(float(v)), [0, t / 2, t])
    assert abs(fd - (-lam * float(conv))) <= 1e-4 * abs(fd)
