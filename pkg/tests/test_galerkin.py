import math

import numpy as np
import pytest

from timobeam.galerkin import (
    GapTridiagonalSystem,
    PivotError,
    assemble_operators,
    assemble_oracle,
    shifted_system,
    solve_gap_tridiagonal,
)


def gap_dense(system):
    mat = np.diag(system.diagonal)
    if system.n > 2:
        mat += np.diag(system.gap, 2) + np.diag(system.gap, -2)
    return mat


def test_assembly_n2():
    ops = assemble_operators(2, 2.0)
    np.testing.assert_allclose(ops.mass_diag, [2 / 5, 2 / 21], atol=1e-15)
    assert ops.mass_gap.size == 0
    assert ops.coupling_band[0] == pytest.approx(1 / math.sqrt(15), abs=1e-15)


def test_assembly_n3_gap_entry():
    ops = assemble_operators(3, 2.0)
    assert ops.mass_gap[0] == pytest.approx(-1 / (5 * math.sqrt(21)), abs=1e-15)


def test_coupling_skew_structure():
    ops = assemble_operators(8, 2.0)
    dense = ops.coupling_dense()
    np.testing.assert_allclose(np.diag(dense), 0.0, atol=0)
    np.testing.assert_allclose(dense, -dense.T, atol=0)


def test_zero_size_rejected():
    with pytest.raises(ValueError):
        assemble_operators(0, 2.0)


def test_banded_application_matches_dense():
    rng = np.random.default_rng(2)
    ops = assemble_operators(9, 2.0)
    x = rng.standard_normal(9)
    np.testing.assert_allclose(ops.apply_mass(x), ops.mass_dense() @ x, atol=1e-14)
    np.testing.assert_allclose(ops.apply_coupling(x), ops.coupling_dense() @ x, atol=1e-14)


def test_skew_action_annihilates_quadratic_form():
    rng = np.random.default_rng(4)
    ops = assemble_operators(16, 2.0)
    for _ in range(20):
        x = rng.standard_normal(16)
        assert abs(x @ ops.apply_coupling(x)) <= 1e-12 * float(x @ x)


def test_shifted_system_n2():
    ops = assemble_operators(2, 2.0)
    system = shifted_system(ops, 1.0, np.array([1.4, 1 + 2 / 21]))
    np.testing.assert_allclose(system.diagonal, [1.4, 1 + 2 / 21], atol=1e-15)
    x = solve_gap_tridiagonal(system)
    np.testing.assert_allclose(x, [1.0, 1.0], atol=1e-14)


def test_zero_shift_rejected():
    ops = assemble_operators(4, 2.0)
    with pytest.raises(ValueError):
        shifted_system(ops, 0.0, np.zeros(4))


def test_shifted_system_n3_gap():
    ops = assemble_operators(3, 2.0)
    system = shifted_system(ops, 1.0, np.zeros(3))
    np.testing.assert_allclose(system.gap, [-1 / (5 * math.sqrt(21))], atol=1e-15)


def test_identity_system():
    system = GapTridiagonalSystem(np.ones(7), np.zeros(5), np.arange(7.0))
    np.testing.assert_allclose(solve_gap_tridiagonal(system), np.arange(7.0), atol=0)


def test_solver_against_dense_oracle():
    rng = np.random.default_rng(33)
    n = 33
    diag = rng.uniform(1.0, 3.0, n)
    gap = rng.uniform(-0.3, 0.3, n - 2)  # diagonally dominant, hence SPD
    rhs = rng.standard_normal(n)
    system = GapTridiagonalSystem(diag, gap, rhs)
    x = solve_gap_tridiagonal(system)
    expected = np.linalg.solve(gap_dense(system), rhs)
    np.testing.assert_allclose(x, expected, atol=1e-11 * np.max(np.abs(expected)))


def test_solver_parallel_bit_identical():
    rng = np.random.default_rng(12)
    n = 21
    system = GapTridiagonalSystem(
        rng.uniform(1.0, 2.0, n), rng.uniform(-0.2, 0.2, n - 2), rng.standard_normal(n)
    )
    serial = solve_gap_tridiagonal(system, parallel=False)
    threaded = solve_gap_tridiagonal(system, parallel=True)
    assert serial.tobytes() == threaded.tobytes()


def test_residual_contract():
    rng = np.random.default_rng(9)
    ops = assemble_operators(40, 2.0)
    rhs = rng.standard_normal(40)
    system = shifted_system(ops, 0.37, rhs)
    x = solve_gap_tridiagonal(system)
    residual = gap_dense(system) @ x - rhs
    assert np.max(np.abs(residual)) <= 1e-11 * np.max(np.abs(rhs))


def test_nonpositive_pivot_reported():
    system = GapTridiagonalSystem(np.array([1.0, -1.0, 1.0]), np.zeros(1), np.ones(3))
    with pytest.raises(PivotError) as info:
        solve_gap_tridiagonal(system)
    assert info.value.subsystem == "odd"
    assert info.value.index == 1


def test_spd_across_random_shifts():
    rng = np.random.default_rng(64)
    ops = assemble_operators(64, 2.0)
    for _ in range(100):
        shift = float(np.exp(rng.uniform(np.log(1e-8), np.log(1e3))))
        system = shifted_system(ops, shift, rng.standard_normal(64))
        solve_gap_tridiagonal(system)  # raises PivotError if not SPD


def test_oracle_pure_derivative_form():
    # With only the derivative form the scaled matrix is the identity.
    oracle = assemble_oracle(4, 2.0, a=0.0, b=1.0)
    np.testing.assert_allclose(oracle, np.eye(4), atol=1e-12)


def test_oracle_matches_closed_form_mass():
    ops = assemble_operators(4, 2.0)
    oracle = assemble_oracle(4, 2.0, a=1.0, b=0.0)
    np.testing.assert_allclose(oracle, ops.mass_dense(), atol=1e-11)


def test_oracle_matches_shifted_system():
    length, shift = 2.0, 0.7
    ops = assemble_operators(2, length)
    oracle = assemble_oracle(2, length, a=1.0, b=shift * length**2 / 4.0)
    system = shifted_system(ops, shift, np.zeros(2))
    np.testing.assert_allclose(np.diag(oracle), system.diagonal, atol=1e-11)


def test_oracle_nontrivial_length():
    ops = assemble_operators(6, 3.5)
    oracle = assemble_oracle(6, 3.5, a=1.0, b=0.0)
    np.testing.assert_allclose(oracle, ops.mass_dense(), atol=1e-11)
