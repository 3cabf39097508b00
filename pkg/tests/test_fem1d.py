import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import eigh
from scipy.integrate import quad

from stochvolterra.fem1d import (
    assemble,
    discrete_eigenvalues,
    discrete_laplacian_solve,
    discrete_modes,
    interpolate,
    l2_project,
    load_vector,
    prolong,
    ritz_project,
    sine_alias,
    sine_moments,
    sine_series,
)


def test_assemble_examples():
    s1 = assemble(1)
    np.testing.assert_allclose(s1.mass, [[1 / 3]])
    np.testing.assert_allclose(s1.stiffness, [[4.0]])
    s3 = assemble(3)
    np.testing.assert_allclose(np.diag(s3.mass), 1 / 6)
    np.testing.assert_allclose(np.diag(s3.mass, 1), 1 / 24)
    np.testing.assert_allclose(np.diag(s3.stiffness), 8.0)
    np.testing.assert_allclose(np.diag(s3.stiffness, -1), -4.0)
    lam = eigh(s3.stiffness, s3.mass, eigvals_only=True)
    assert lam[0] == pytest.approx(10.3866, abs=1e-4)
    assert lam[0] == pytest.approx(discrete_eigenvalues(3)[0], rel=1e-12)
    with pytest.raises(ValueError):
        assemble(0)


@given(st.integers(1, 64))
def test_spd_and_eigenvalues(m):
    s = assemble(m)
    np.linalg.cholesky(s.mass)
    np.linalg.cholesky(s.stiffness)
    if m >= 3:
        assert np.all(s.stiffness[1:-1].sum(axis=1) == pytest.approx(0.0, abs=1e-9))
    lam = eigh(s.stiffness, s.mass, eigvals_only=True)
    np.testing.assert_allclose(np.sort(discrete_eigenvalues(m)), lam, rtol=1e-10)
    j = np.arange(1, m // 4 + 1)
    assert np.all(np.abs(lam[: j.size] - (j * np.pi) ** 2) <= 2.0 * s.h**2 * (j * np.pi) ** 4)


def test_first_eigenvalue_limit():
    assert discrete_eigenvalues(1023)[0] == pytest.approx(math.pi**2, rel=1e-5)


def test_solver_examples(rng):
    s = assemble(1)
    assert discrete_laplacian_solve(s, 1.0, np.array([1.0]))[0] == pytest.approx(3 / 13)
    s = assemble(10)
    assert np.all(discrete_laplacian_solve(s, 0.3, np.zeros(10)) == 0.0)
    b = rng.standard_normal(10)
    np.testing.assert_allclose(discrete_laplacian_solve(s, 0.0, b), np.linalg.solve(s.mass, b), rtol=1e-12)


@given(st.integers(1, 64), st.floats(0.0, 1e4), st.integers(0, 2**32 - 1))
def test_solver_matches_dense(m, shift, seed):
    s = assemble(m)
    b = np.random.default_rng(seed).standard_normal((m, 3))
    A = s.mass + shift * s.stiffness
    x = discrete_laplacian_solve(s, shift, b)
    np.testing.assert_allclose(A @ x, b, atol=1e-12 * (1 + np.abs(b).max()) * (1 + shift / s.h))


def test_l2_project_examples():
    s = assemble(7)
    hat = lambda x: np.maximum(0.0, 1.0 - np.abs(x - s.nodes[3]) / s.h)
    np.testing.assert_allclose(l2_project(s, hat), np.eye(7)[3], atol=1e-13)
    assert np.all(l2_project(s, lambda x: 0.0 * x) == 0.0)
    errs = []
    for m in (15, 31, 63):
        s = assemble(m)
        errs.append(np.max(np.abs(l2_project(s, lambda x: np.sin(np.pi * x)) - np.sin(np.pi * s.nodes))))
    assert errs[1] < 0.5 / 31**2 * 10 and 3.5 < errs[0] / errs[1] < 4.5


def test_l2_project_sine_coefficients_match_quadrature():
    s = assemble(31)
    c = np.array([0.3, -1.0, 0.0, 0.25])
    np.testing.assert_allclose(l2_project(s, c), l2_project(s, sine_series(c)), atol=1e-12)


def test_sine_moments_closed_form():
    s = assemble(3)
    i = 1  # node at x = 1/2
    val, _ = quad(lambda x: math.sqrt(2) * math.sin(math.pi * x) * max(0.0, 1 - abs(x - 0.5) / 0.25), 0, 1, points=[0.25, 0.5, 0.75])
    assert sine_moments(s, 1)[0, i] == pytest.approx(val, rel=1e-13)
    G = sine_moments(assemble(20), 9)
    for j in range(1, 10):
        np.testing.assert_allclose(G[j - 1], load_vector(assemble(20), lambda x: math.sqrt(2) * np.sin(j * np.pi * x)), atol=1e-12)


def test_ritz_project():
    s = assemble(9)
    v = rng_vals = np.random.default_rng(1).standard_normal(9)
    vh = lambda x: np.interp(x, np.concatenate([[0.0], s.nodes, [1.0]]), np.concatenate([[0.0], v, [0.0]]))
    np.testing.assert_allclose(ritz_project(s, vh), v, atol=1e-13)
    f = lambda x: x * (1 - x)
    np.testing.assert_allclose(ritz_project(s, f), interpolate(s, f), atol=1e-14)
    errs = []
    for m in (15, 31, 63):
        s = assemble(m)
        d = ritz_project(s, lambda x: np.sin(np.pi * x)) - np.sin(np.pi * s.nodes)
        # L2 error of R_h v - v, measured against the P1 interpolant error plus the nodal part
        errs.append(math.sqrt(d @ s.apply_mass(d)) + l2_err_interp(s))
    assert 3.5 < errs[0] / errs[1] < 4.5 and 3.5 < errs[1] / errs[2] < 4.5


def l2_err_interp(s):
    xq = np.linspace(0, 1, 20001)
    nodal = np.concatenate([[0.0], np.sin(np.pi * s.nodes), [0.0]])
    grid = np.concatenate([[0.0], s.nodes, [1.0]])
    e = np.interp(xq, grid, nodal) - np.sin(np.pi * xq)
    return math.sqrt(np.trapezoid(e * e, xq))


def test_negative_norm_contraction(rng):
    # ||A_h^-1/2 P_h x|| <= ||A^-1/2 x|| for x a finite sine series
    for m in (7, 31):
        s = assemble(m)
        V = discrete_modes(s)
        lam_h = discrete_eigenvalues(m)
        for _ in range(20):
            c = rng.standard_normal(48)
            p = l2_project(s, c)
            a = V @ s.apply_mass(p)
            lhs = np.sum(a**2 / lam_h)
            rhs = np.sum(c**2 / (np.pi * np.arange(1, 49)) ** 2)
            assert lhs <= rhs * (1 + 1e-12)


def test_discrete_modes_orthonormal():
    s = assemble(12)
    V = discrete_modes(s)
    np.testing.assert_allclose(V @ s.mass @ V.T, np.eye(12), atol=1e-12)
    np.testing.assert_allclose(V @ s.stiffness @ V.T, np.diag(discrete_eigenvalues(12)), atol=1e-9)


def test_prolong_preserves_function():
    c = np.array([1.0, -2.0, 0.5])
    f = prolong(c, 4)
    assert f.shape == (15,)
    coarse = np.concatenate([[0.0], np.arange(1, 4) / 4, [1.0]])
    fine = np.arange(1, 16) / 16
    np.testing.assert_allclose(f, np.interp(fine, coarse, np.concatenate([[0.0], c, [0.0]])))
    with pytest.raises(ValueError):
        prolong(c, 3)


@given(st.integers(1, 20), st.integers(1, 100))
def test_sine_alias(m, J):
    mode, sign = sine_alias(m, J)
    x = np.arange(1, m + 1) / (m + 1)
    for l in range(1, J + 1):
        np.testing.assert_allclose(np.sin(l * np.pi * x), sign[l - 1] * np.sin(mode[l - 1] * np.pi * x), atol=1e-9)
