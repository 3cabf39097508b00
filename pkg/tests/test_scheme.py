import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stochvolterra.fem1d import assemble, discrete_modes, l2_project, load_vector, sine_to_nodal
from stochvolterra.kernels import KernelSpec
from stochvolterra.mittag_leffler import mittag_leffler
from stochvolterra.noise import IncrementSet, NoiseModel, coarsen, noise_loads, sample_increments
from stochvolterra.quadrature import weights, weights_riesz
from stochvolterra.resolvent import SpectralOperator, discrete_mode_operator
from stochvolterra.scheme import (
    ExactModes,
    InitialData,
    Level,
    LevelSolver,
    Problem,
    SchemeError,
    SchemeState,
    reference_solution,
    solve_path,
    step_fem,
    step_spectral,
)

RIESZ = KernelSpec.riesz(0.5)


def problem(J=16, mu=1.0, u0="zero", kernel=RIESZ):
    return Problem(kernel, 1.0, SpectralOperator.power_law(J, mu), InitialData.parse(u0))


def increments(J, n, sample=0, seed=0, mu=1.0):
    return sample_increments(NoiseModel.power_law(J, mu, seed), n, 1.0 / n, sample)


def test_step_spectral_examples():
    w = weights_riesz(0.5, 0.1, 10)
    st_ = SchemeState(w, np.array([1.0]))
    u1 = step_spectral(np.array([1.0]), st_, np.array([0.05]))
    assert u1[0] == pytest.approx(1.05 / (1 + 0.1 * 0.1**0.5), rel=1e-15)
    assert u1[0] == pytest.approx(1.0178139, abs=1e-7)
    # dW = 0 reproduces the discrete mode operator
    st_ = SchemeState(w, np.array([1.0]))
    vals = [step_spectral(np.array([7.0]), st_, [0.0])[0] for _ in range(10)]
    np.testing.assert_allclose(vals, discrete_mode_operator(RIESZ, 7.0, 0.1, 10)[1:], rtol=1e-14)
    # lambda = 0: random walk
    st_ = SchemeState(w, np.array([0.3]))
    dW = np.random.default_rng(0).standard_normal(10)
    for d in dW:
        step_spectral(np.array([0.0]), st_, [d])
    assert st_.current[0] == pytest.approx(0.3 + dW.sum())
    with pytest.raises(SchemeError):
        step_spectral(np.array([0.0]), st_, [0.0])


def test_step_fem_examples():
    w = weights_riesz(0.5, 0.1, 5)
    sys1 = assemble(1)
    st_ = SchemeState(w, np.array([1.0]))
    u1 = step_fem(sys1, st_, np.zeros(1))
    assert u1[0] == pytest.approx((1 / 3) / (1 / 3 + 0.1 * 0.1**0.5 * 4), rel=1e-14)
    assert u1[0] == pytest.approx(0.7249143, abs=1e-7)
    sys = assemble(7)
    st_ = SchemeState(w, np.zeros(7))
    for _ in range(5):
        assert np.all(step_fem(sys, st_, np.zeros(7)) == 0.0)


def test_engines_and_step_api_agree():
    pb = problem(J=12)
    inc = increments(12, 64, sample=3)
    a = solve_path(pb, inc, Level(32), "distvar")
    b = solve_path(pb, inc, Level(32), "step")
    st_ = SchemeState(weights(RIESZ, 1 / 32, 32), np.zeros(12))
    for row in coarsen(inc, 2).increments:
        c = step_spectral(pb.op, st_, row)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(a, c, rtol=1e-12, atol=1e-15)


def test_fem_engines_and_step_api_agree():
    pb = problem(J=40, u0="x1mx")
    inc = increments(40, 32, sample=1)
    lv = Level(32, 15)
    a = solve_path(pb, inc, lv, "distvar")
    b = solve_path(pb, inc, lv, "step")
    sys = assemble(15)
    st_ = SchemeState(weights(RIESZ, 1 / 32, 32), LevelSolver(pb, lv).initial())
    for load in noise_loads(sys, inc.increments):
        c = step_fem(sys, st_, load)
    np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-14)
    np.testing.assert_allclose(a, c, rtol=1e-11, atol=1e-14)


def test_deterministic_path_matches_modes():
    pb = problem(J=10, u0="x1mx")
    u = solve_path(pb, None, Level(200))
    tab = np.array([discrete_mode_operator(RIESZ, l, 1 / 200, 200)[-1] for l in pb.op.lam])
    np.testing.assert_allclose(u, tab * pb.initial.coeffs(10), rtol=1e-13, atol=1e-17)
    assert np.all(solve_path(pb, None, Level(0)) == pb.initial.coeffs(10))


def test_coupled_levels_converge_pathwise():
    pb = problem(J=32)
    inc = increments(32, 1024, sample=0)
    ref = solve_path(pb, inc, Level(1024))
    d = [np.linalg.norm(solve_path(pb, inc, Level(n)) - ref) for n in (16, 64, 256)]
    assert d[0] > d[1] > d[2] > 0.0


@given(st.integers(0, 2**32 - 1))
def test_linearity(seed):
    rng = np.random.default_rng(seed)
    J, n = 8, 16
    pb = Problem(RIESZ, 1.0, SpectralOperator.power_law(J, 1.0))
    a, b = rng.standard_normal(2)
    i1 = IncrementSet(n, 1 / n, rng.standard_normal((n, J)))
    i2 = IncrementSet(n, 1 / n, rng.standard_normal((n, J)))
    combo = IncrementSet(n, 1 / n, a * i1.increments + b * i2.increments)
    for lv in (Level(n), Level(n, 7)):
        lhs = solve_path(pb, combo, lv)
        rhs = a * solve_path(pb, i1, lv) + b * solve_path(pb, i2, lv)
        np.testing.assert_allclose(lhs, rhs, atol=1e-12 * (1 + np.abs(rhs).max()))


def test_deterministic_stability():
    pb = problem(J=64, u0="x1mx")
    u0 = pb.initial.coeffs(64)
    tab = LevelSolver(pb, Level(256)).table
    assert np.max(np.linalg.norm(tab * u0, axis=1)) <= np.linalg.norm(u0) * (1 + 1e-14)
    sys = assemble(31)
    solver = LevelSolver(pb, Level(64, 31), "step")
    w = weights(RIESZ, 1 / 64, 64)
    st_ = SchemeState(w, solver.initial())
    norm0 = math.sqrt(st_.u0 @ sys.apply_mass(st_.u0))
    for _ in range(64):
        u = step_fem(sys, st_, np.zeros(31))
        assert math.sqrt(u @ sys.apply_mass(u)) <= norm0 * (1 + 1e-13)


def test_fem_vs_spectral_deterministic():
    pb = problem(J=200, u0="x1mx")
    spec = solve_path(pb, None, Level(512))
    errs = []
    for m in (15, 31, 63):
        fem = solve_path(pb, None, Level(512, m))
        nodal = spec @ sine_to_nodal(m, 200)
        errs.append(np.max(np.abs(fem - nodal)))
    assert errs[0] / errs[1] > 3.0 and errs[1] / errs[2] > 3.0


def test_level_errors():
    pb = problem(J=8)
    with pytest.raises(SchemeError):
        LevelSolver(pb, Level(16), engine="magic")
    with pytest.raises(SchemeError):
        solve_path(pb, increments(8, 24), Level(16))
    with pytest.raises(SchemeError):
        solve_path(pb, increments(9, 32), Level(16))


def test_reference_modes():
    pb = problem(J=16, u0="e1")
    exact = reference_solution(pb, None, "ml-riemann", Level(64))
    assert exact[0] == pytest.approx(mittag_leffler(1.5, -math.pi**2), abs=1e-15)
    assert np.all(exact[1:] == 0.0)
    pb = problem(J=16)
    inc = increments(16, 4096, sample=2)
    self_ref = reference_solution(pb, inc, "self")
    ml = reference_solution(pb, inc, "ml-riemann")
    coarse_err = np.linalg.norm(solve_path(pb, inc, Level(16)) - self_ref)
    assert np.linalg.norm(self_ref - ml) < 0.5 * coarse_err
    with pytest.raises(SchemeError):
        reference_solution(pb, inc, "bogus")
    with pytest.raises(SchemeError):
        ExactModes(pb, 2048).final(inc)


def test_reference_mode_scaling():
    # RMS of reference mode j ~ lambda_j^(-1/(2 rho)) sqrt(q_j)
    J = 64
    pb = problem(J=J)
    ref = ExactModes(pb, 512)
    samples = np.array([ref.final(increments(J, 512, sample=s)) for s in range(200)])
    rms = np.sqrt(np.mean(samples**2, axis=0))
    pred = pb.op.lam ** (-1 / 3) * np.sqrt(pb.op.q_diag)
    ratio = rms[4:40] / pred[4:40]
    assert ratio.max() / ratio.min() < 2.0


def test_tempered_reference_consistent():
    pb = problem(J=8, kernel=KernelSpec.tempered(0.5, 1.0))
    inc = increments(8, 512, sample=0)
    ml = reference_solution(pb, inc, "ml-riemann")
    selfref = reference_solution(pb, inc, "self")
    coarse = np.linalg.norm(solve_path(pb, inc, Level(16)) - selfref)
    assert np.linalg.norm(ml - selfref) < 0.5 * coarse


def test_initial_data():
    c = InitialData.parse("x1mx").coeffs(5)
    from scipy.integrate import quad

    ref = [quad(lambda x: x * (1 - x) * math.sqrt(2) * math.sin(j * math.pi * x), 0, 1)[0] for j in range(1, 6)]
    np.testing.assert_allclose(c, ref, rtol=1e-12, atol=1e-15)
    with pytest.raises(SchemeError):
        InitialData.parse("nope")
