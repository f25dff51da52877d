import math

import numpy as np
import pytest

from timobeam import benchmarks
from timobeam.basis import SpectralCoefficients, basis_function, evaluate
from timobeam.legendre import Interval, integrate
from timobeam.timestepper import run


def test_unknown_id_rejected():
    with pytest.raises(ValueError):
        benchmarks.make_benchmark(9)


@pytest.mark.parametrize("problem_id", [1, 2, 3])
def test_boundary_vanishing(problem_id):
    prob = benchmarks.make_benchmark(problem_id)
    length = prob.params.length
    for t in (0.0, 0.3, prob.params.total_time):
        for x in (0.0, length):
            assert abs(prob.exact_u(x, t)) <= 1e-14
            assert abs(prob.exact_v(x, t)) <= 1e-14


def test_test1_initial_data():
    prob = benchmarks.make_benchmark(1)
    x = np.linspace(0.0, 2.0, 50)
    np.testing.assert_allclose(prob.phi0(x), 0.0, atol=1e-15)
    np.testing.assert_allclose(
        prob.phi1(x), (np.pi / 2) * np.sin(7 * np.pi * x), atol=1e-14
    )


@pytest.mark.parametrize("problem_id", [1, 2, 3])
def test_initial_data_matches_exact_solution(problem_id):
    prob = benchmarks.make_benchmark(problem_id)
    x = np.linspace(0.0, prob.params.length, 50)
    np.testing.assert_allclose(prob.phi0(x), prob.exact_u(x, 0.0), atol=1e-12)
    np.testing.assert_allclose(prob.phi1(x), prob.exact_u_t(x, 0.0), atol=1e-12)
    np.testing.assert_allclose(prob.psi0(x), prob.exact_v(x, 0.0), atol=1e-12)
    np.testing.assert_allclose(prob.psi1(x), prob.exact_v_t(x, 0.0), atol=1e-12)


@pytest.mark.parametrize("problem_id", [1, 2, 3])
def test_analytic_derivatives_match_finite_differences(problem_id):
    prob = benchmarks.make_benchmark(problem_id)
    rng = np.random.default_rng(problem_id)
    length, horizon = prob.params.length, prob.params.total_time
    h = 1e-5
    for _ in range(20):
        x = rng.uniform(2 * h, length - 2 * h)
        t = rng.uniform(2 * h, horizon - 2 * h)
        fd_x = (prob.exact_u(x + h, t) - prob.exact_u(x - h, t)) / (2 * h)
        assert fd_x == pytest.approx(prob.exact_u_x(x, t), rel=1e-5, abs=1e-6)
        fd_xx = (
            prob.exact_u(x + h, t) - 2 * prob.exact_u(x, t) + prob.exact_u(x - h, t)
        ) / h**2
        assert fd_xx == pytest.approx(prob.exact_u_xx(x, t), rel=1e-3, abs=1e-3)
        fd_t = (prob.exact_u(x, t + h) - prob.exact_u(x, t - h)) / (2 * h)
        assert fd_t == pytest.approx(prob.exact_u_t(x, t), rel=1e-5, abs=1e-7)
        fd_tt = (
            prob.exact_u(x, t + h) - 2 * prob.exact_u(x, t) + prob.exact_u(x, t - h)
        ) / h**2
        assert fd_tt == pytest.approx(prob.exact_u_tt(x, t), rel=1e-3, abs=1e-4)


@pytest.mark.parametrize("problem_id", [1, 2, 3])
def test_forcing_residuals(problem_id):
    # Substituting the exact solution back into the equations must leave a
    # negligible residual; the nonlocal term is recomputed by quadrature.
    prob = benchmarks.make_benchmark(problem_id)
    rng = np.random.default_rng(100 + problem_id)
    x = rng.uniform(0.0, prob.params.length, 200)
    for t in rng.uniform(0.0, prob.params.total_time, 5):
        r1, r2 = prob.forcing_residuals(x, float(t))
        f1 = np.asarray(prob.forcing.f1(x, float(t)))
        f2 = np.asarray(prob.forcing.f2(x, float(t)))
        assert np.all(np.abs(r1) <= 1e-9 * (1.0 + np.abs(f1)))
        assert np.all(np.abs(r2) <= 1e-9 * (1.0 + np.abs(f2)))


def test_nonlocal_energy_closed_forms_match_quadrature():
    for problem_id, t in ((1, 0.37), (3, 2.5)):
        prob = benchmarks.make_benchmark(problem_id)
        value = prob.nonlocal_energy(t)
        oracle = integrate(
            lambda x: np.asarray(prob.exact_u_x(x, t)) ** 2,
            Interval(0.0, prob.params.length),
            1e-13,
            min_depth=3,
        )
        assert value == pytest.approx(oracle, rel=1e-12)


def test_test3_nonlocal_energy_formula():
    prob = benchmarks.make_benchmark(3)
    t = 1.7
    expected = (1 / 16) * math.exp(2 * math.pi * t / 4.0) * (5 * math.pi / 2) ** 2 * 1.0
    assert prob.nonlocal_energy(t) == pytest.approx(expected, rel=1e-13)


def test_machine_precision_forcing_by_hand():
    # u = v = t x (2 - x): f1 = 2 t (alpha + beta t^2 8/3) + t (2 - 2 x).
    prob = benchmarks.make_machine_precision_case()
    x = np.linspace(0.0, 2.0, 9)
    for t in (0.0, 0.5, 1.0):
        expected = 2 * t * (1.0 + t**2 * 8.0 / 3.0) + t * (2.0 - 2.0 * x)
        np.testing.assert_allclose(prob.forcing.f1(x, t), expected, atol=1e-12)


def test_machine_precision_initial_data():
    prob = benchmarks.make_machine_precision_case()
    x = np.linspace(0.0, 2.0, 9)
    np.testing.assert_allclose(prob.phi0(x), 0.0, atol=0)
    np.testing.assert_allclose(prob.psi0(x), 0.0, atol=0)
    np.testing.assert_allclose(prob.phi1(x), x * (2.0 - x), atol=0)


def test_machine_precision_full_run():
    prob = benchmarks.make_machine_precision_case(
        benchmarks._default_params(n_steps=32, n_funcs=6, total_time=1.0)
    )
    result = run(prob, prob.params)
    assert max(max(r.E1, r.E2) for r in result.records) <= 1e-12


def test_layer_errors_zero_for_exact_match():
    prob = benchmarks.make_machine_precision_case()
    length = prob.params.length
    # At t = 1 the solution x (2 - x) is a multiple of the first trial function.
    scale = -(length**1.5) / math.sqrt(3.0)
    coeffs = SpectralCoefficients(length, np.array([scale, 0.0, 0.0]))
    e1, e2 = prob.layer_errors(coeffs, coeffs, 1.0)
    assert e1 <= 1e-13 and e2 <= 1e-13


def test_layer_errors_pythagorean_perturbation():
    prob = benchmarks.make_machine_precision_case()
    length = prob.params.length
    scale = -(length**1.5) / math.sqrt(3.0)
    exact = np.array([scale, 0.0, 0.0])
    eps = 1e-3
    perturbed = SpectralCoefficients(length, exact + np.array([0.0, eps, 0.0]))
    clean = SpectralCoefficients(length, exact)
    e1, _ = prob.layer_errors(perturbed, clean, 1.0)
    phi2_norm = math.sqrt(
        integrate(lambda x: basis_function(2, x, length) ** 2, Interval(0.0, length), 1e-13)
    )
    assert e1 == pytest.approx(eps * phi2_norm, rel=1e-10)


def test_derivative_errors_exact_difference():
    prob = benchmarks.make_machine_precision_case()
    length = prob.params.length
    scale = -(length**1.5) / math.sqrt(3.0)
    tau = 0.25
    t = 0.5
    # Central difference of the exact coefficients reproduces d/dt exactly for
    # a solution linear in time.
    c_prev = SpectralCoefficients(length, np.array([(t - tau) * scale, 0.0]))
    c_next = SpectralCoefficients(length, np.array([(t + tau) * scale, 0.0]))
    de1, de2 = prob.derivative_errors(c_next, c_prev, c_next, c_prev, t, tau)
    assert de1 <= 1e-13 and de2 <= 1e-13


def test_benchmark_default_configurations():
    assert benchmarks.make_benchmark(1).params.n_steps == 256
    assert benchmarks.make_benchmark(1).params.n_funcs == 35
    assert benchmarks.make_benchmark(2).params.n_funcs == 45
    prob3 = benchmarks.make_benchmark(3)
    assert prob3.params.total_time == 4.0
    assert prob3.params.n_steps == 1024
    assert prob3.params.n_funcs == 15
