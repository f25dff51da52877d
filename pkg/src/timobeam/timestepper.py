"""Three-layer time march for the coupled beam system in coefficient space.

Each step freezes the Kirchhoff coefficient at the middle layer, assembles the
two right-hand sides, solves the two decoupled gap-tridiagonal systems, and
recovers the new layer by subtracting the layer two steps back.  The two
per-layer solves are independent and may run concurrently; serial and parallel
execution produce bit-identical results.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .basis import SpectralCoefficients, basis_derivative_matrix, basis_matrix
from .galerkin import GalerkinOperatorSet, assemble_operators, shifted_system, solve_gap_tridiagonal
from .legendre import Interval, integrate
from .reporting import ErrorRecord

__all__ = [
    "SchemeParameters",
    "ForcingSampler",
    "TimeStepState",
    "RunResult",
    "StepFailure",
    "initial_layers",
    "kirchhoff_coefficient",
    "forcing_inner_products",
    "assemble_rhs",
    "step",
    "run",
]


@dataclass(frozen=True)
class SchemeParameters:
    """Physical constants, domain, and discretization sizes for one run."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    a1: float
    a2: float
    length: float
    total_time: float
    n_steps: int
    n_funcs: int

    def __post_init__(self) -> None:
        if self.alpha <= 0.0 or self.gamma <= 0.0 or self.delta <= 0.0:
            raise ValueError("alpha, gamma, and delta must be positive")
        # beta = 0 switches the Kirchhoff term off; useful for linear checks.
        if self.beta < 0.0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.length <= 0.0:
            raise ValueError(f"interval length must be positive, got {self.length}")
        if self.total_time <= 0.0:
            raise ValueError(f"final time must be positive, got {self.total_time}")
        if self.n_steps < 2:
            raise ValueError(f"need at least 2 time steps, got {self.n_steps}")
        if self.n_funcs < 1:
            raise ValueError(f"basis size must be >= 1, got {self.n_funcs}")

    @property
    def tau(self) -> float:
        return self.total_time / self.n_steps


@dataclass(frozen=True)
class ForcingSampler:
    """Forcing terms of the two equations as vectorized functions of (x, t)."""

    f1: Callable
    f2: Callable
    f1_x: Callable | None = None
    f2_x: Callable | None = None


@dataclass(frozen=True)
class TimeStepState:
    """Layers k-1 and k of both coefficient vectors plus the frozen coefficient."""

    k: int
    u_prev: SpectralCoefficients
    u_curr: SpectralCoefficients
    v_prev: SpectralCoefficients
    v_curr: SpectralCoefficients
    q: float


class StepFailure(RuntimeError):
    """A time step failed; carries the layer index and any partial results."""

    def __init__(self, message: str, layer: int, records=None):
        super().__init__(message)
        self.layer = layer
        self.records = records or []


@dataclass
class RunResult:
    params: SchemeParameters
    records: list[ErrorRecord]
    final_state: TimeStepState
    trajectory: list[tuple[np.ndarray, np.ndarray]] | None = None


def kirchhoff_coefficient(coeffs: SpectralCoefficients, alpha: float, beta: float) -> float:
    """Nonlocal stiffness coefficient from the coefficient-sum identity.

    The derivative basis is orthonormal, so the coefficient sum of squares
    equals the integral of the squared spatial derivative exactly.
    """
    return alpha + beta * float(np.dot(coeffs.values, coeffs.values))


class _BasisSampler:
    """Caches trial-function values at repeated quadrature panels of one run."""

    def __init__(self, n_funcs: int, length: float):
        self.n_funcs = n_funcs
        self.length = length
        self._values: dict[bytes, np.ndarray] = {}
        self._derivatives: dict[bytes, np.ndarray] = {}

    def values(self, x: np.ndarray) -> np.ndarray:
        key = x.tobytes()
        matrix = self._values.get(key)
        if matrix is None:
            matrix = basis_matrix(self.n_funcs, x, self.length)
            self._values[key] = matrix
        return matrix

    def derivatives(self, x: np.ndarray) -> np.ndarray:
        key = x.tobytes()
        matrix = self._derivatives.get(key)
        if matrix is None:
            matrix = basis_derivative_matrix(self.n_funcs, x, self.length)
            self._derivatives[key] = matrix
        return matrix


def _project_direct(
    derivative: Callable, sampler: _BasisSampler, tol: float
) -> np.ndarray:
    integrand = lambda x: np.asarray(derivative(x))[:, None] * sampler.derivatives(x)
    return integrate(integrand, Interval(0.0, sampler.length), tol, min_depth=3)


def _project_by_parts(g: Callable, n_funcs: int, length: float, tol: float) -> np.ndarray:
    from .basis import _orthonormal_derivative_matrix

    integrand = lambda x: -np.asarray(g(x))[:, None] * _orthonormal_derivative_matrix(
        n_funcs, x, length
    )
    return integrate(integrand, Interval(0.0, length), tol, min_depth=3)


def initial_layers(
    problem,
    params: SchemeParameters,
    quad_tol: float = 1e-12,
    sampler: _BasisSampler | None = None,
) -> tuple[SpectralCoefficients, SpectralCoefficients, SpectralCoefficients, SpectralCoefficients]:
    """Starting coefficient vectors for layers 0 and 1 from Taylor data.

    Layer 1 uses the three-term Taylor expansion whose second-order terms come
    from the equations themselves evaluated at t = 0.  The second-order terms
    need not vanish at the endpoints; they are projected through the
    integration-by-parts formula, which discards the incompatible part.
    """
    tau = params.tau
    length = params.length
    n = params.n_funcs
    if sampler is None:
        sampler = _BasisSampler(n, length)

    for name, func in (("phi0", problem.phi0), ("psi0", problem.psi0)):
        edge = max(abs(float(func(0.0))), abs(float(func(length))))
        if edge > 1e-10 * (1.0 + abs(edge)):
            raise ValueError(f"initial data {name} must vanish at the endpoints")

    energy = integrate(
        lambda x: np.asarray(problem.phi0_x(x)) ** 2, Interval(0.0, length), quad_tol,
        min_depth=3,
    )
    q0 = params.alpha + params.beta * float(energy)

    def phi2(x):
        return (
            np.asarray(problem.forcing.f1(x, 0.0))
            - params.a1 * np.asarray(problem.psi0_x(x))
            + q0 * np.asarray(problem.phi0_xx(x))
        )

    def psi2(x):
        return (
            np.asarray(problem.forcing.f2(x, 0.0))
            + params.a2 * np.asarray(problem.phi0_x(x))
            + params.gamma * np.asarray(problem.psi0_xx(x))
            - params.delta * np.asarray(problem.psi0(x))
        )

    for name, func in (("second-order u term", phi2), ("second-order v term", psi2)):
        edge = max(abs(float(func(np.array([0.0]))[0])), abs(float(func(np.array([length]))[0])))
        scale = 1.0 + float(np.max(np.abs(func(np.linspace(0.0, length, 9)))))
        if edge > 1e-8 * scale:
            warnings.warn(
                f"{name} does not vanish at the endpoints "
                f"(magnitude {edge:.2e}); projection discards the incompatible part",
                RuntimeWarning,
                stacklevel=2,
            )

    c_phi0 = _project_direct(problem.phi0_x, sampler, quad_tol)
    c_phi1 = _project_direct(problem.phi1_x, sampler, quad_tol)
    c_psi0 = _project_direct(problem.psi0_x, sampler, quad_tol)
    c_psi1 = _project_direct(problem.psi1_x, sampler, quad_tol)
    # The second-order terms are projected term by term (the projection is
    # linear); summing the pointwise values first would feed the quadrature a
    # heavily cancelling integrand and destroy its error control.
    by_parts = lambda g: _project_by_parts(g, n, length, quad_tol)
    c_phi2 = (
        by_parts(lambda x: problem.forcing.f1(x, 0.0))
        - params.a1 * by_parts(problem.psi0_x)
        + q0 * by_parts(problem.phi0_xx)
    )
    c_psi2 = (
        by_parts(lambda x: problem.forcing.f2(x, 0.0))
        + params.a2 * by_parts(problem.phi0_x)
        + params.gamma * by_parts(problem.psi0_xx)
        - params.delta * c_psi0
    )

    u0 = SpectralCoefficients(length, c_phi0)
    v0 = SpectralCoefficients(length, c_psi0)
    u1 = SpectralCoefficients(length, c_phi0 + tau * c_phi1 + 0.5 * tau**2 * c_phi2)
    v1 = SpectralCoefficients(length, c_psi0 + tau * c_psi1 + 0.5 * tau**2 * c_psi2)
    return u0, u1, v0, v1


def forcing_inner_products(
    forcing: ForcingSampler,
    t: float,
    sampler: _BasisSampler,
    quad_tol: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray]:
    """Inner products of both forcing terms with every trial function at time t."""
    interval = Interval(0.0, sampler.length)
    i1 = integrate(
        lambda x: np.asarray(forcing.f1(x, t))[:, None] * sampler.values(x),
        interval,
        quad_tol,
        min_depth=3,
    )
    i2 = integrate(
        lambda x: np.asarray(forcing.f2(x, t))[:, None] * sampler.values(x),
        interval,
        quad_tol,
        min_depth=3,
    )
    return i1, i2


def assemble_rhs(
    k: int,
    state: TimeStepState,
    i1: np.ndarray,
    i2: np.ndarray,
    ops: GalerkinOperatorSet,
    params: SchemeParameters,
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Right-hand sides and diagonal shifts of the two per-layer linear systems."""
    n = params.n_funcs
    if i1.shape != (n,) or i2.shape != (n,):
        raise ValueError(f"forcing products must have shape ({n},)")
    tau = params.tau
    length = params.length
    u = state.u_curr.values
    v = state.v_curr.values
    q = state.q
    a0 = 4.0 / (2.0 + params.delta * tau**2)

    rhs_u = (
        (4.0 * tau**2 / length**2) * i1
        + 2.0 * ops.apply_mass(u)
        - (2.0 * params.a1 * tau**2 / length) * ops.apply_coupling(v)
    )
    shift_u = (2.0 * tau**2 / length**2) * q

    rhs_v = (
        (2.0 * a0 * tau**2 / length**2) * i2
        + a0 * ops.apply_mass(v)
        + (a0 * params.a2 * tau**2 / length) * ops.apply_coupling(u)
    )
    shift_v = (a0 * tau**2 / length**2) * params.gamma
    return rhs_u, rhs_v, shift_u, shift_v


def _dual_solve(executor, system_u, system_v):
    future_u = executor.submit(solve_gap_tridiagonal, system_u)
    future_v = executor.submit(solve_gap_tridiagonal, system_v)
    return future_u.result(), future_v.result()


def step(
    state: TimeStepState,
    ops: GalerkinOperatorSet,
    forcing: ForcingSampler,
    params: SchemeParameters,
    quad_tol: float = 1e-12,
    parallel: bool = False,
    sampler: _BasisSampler | None = None,
    executor: ThreadPoolExecutor | None = None,
) -> TimeStepState:
    """Advance one layer: two decoupled solves, then the two-layer update."""
    if sampler is None:
        sampler = _BasisSampler(params.n_funcs, params.length)
    k = state.k
    t_k = k * params.tau
    try:
        i1, i2 = forcing_inner_products(forcing, t_k, sampler, quad_tol)
        rhs_u, rhs_v, shift_u, shift_v = assemble_rhs(k, state, i1, i2, ops, params)
        system_u = shifted_system(ops, shift_u, rhs_u)
        system_v = shifted_system(ops, shift_v, rhs_v)
        if executor is not None:
            w1, w2 = _dual_solve(executor, system_u, system_v)
        elif parallel:
            with ThreadPoolExecutor(max_workers=2) as pool:
                w1, w2 = _dual_solve(pool, system_u, system_v)
        else:
            w1 = solve_gap_tridiagonal(system_u)
            w2 = solve_gap_tridiagonal(system_v)
    except Exception as exc:
        raise StepFailure(f"step from layer {k} failed: {exc}", k) from exc

    u_next = SpectralCoefficients(params.length, w1 - state.u_prev.values)
    v_next = SpectralCoefficients(params.length, w2 - state.v_prev.values)
    if not (np.all(np.isfinite(u_next.values)) and np.all(np.isfinite(v_next.values))):
        raise StepFailure(f"non-finite coefficients after layer {k}", k)
    return TimeStepState(
        k=k + 1,
        u_prev=state.u_curr,
        u_curr=u_next,
        v_prev=state.v_curr,
        v_curr=v_next,
        q=kirchhoff_coefficient(u_next, params.alpha, params.beta),
    )


def _monitors(
    state_prev_u: np.ndarray,
    state_curr_u: np.ndarray,
    state_prev_v: np.ndarray,
    state_curr_v: np.ndarray,
    ops: GalerkinOperatorSet,
    params: SchemeParameters,
) -> tuple[float, float, float, float]:
    tau = params.tau
    du = float(np.linalg.norm(state_curr_u - state_prev_u)) / tau
    dv = float(np.linalg.norm(state_curr_v - state_prev_v)) / tau
    au = float(np.linalg.norm(state_curr_u))
    mass_quad = float(state_curr_v @ ops.apply_mass(state_curr_v))
    lv = float(
        np.sqrt(
            params.gamma * float(state_curr_v @ state_curr_v)
            + params.delta * (params.length**2 / 4.0) * mass_quad
        )
    )
    return du, dv, au, lv


def run(
    problem,
    params: SchemeParameters,
    monitors: Sequence[Callable] | None = None,
    quad_tol: float = 1e-12,
    parallel: bool = False,
    record_trajectory: bool = False,
) -> RunResult:
    """March all layers, producing the error/monitor stream.

    The problem supplies initial data with derivatives, forcing terms, and
    layer_errors / derivative_errors measurement hooks.  Monitor callbacks are
    invoked once per completed layer from the stepping thread.  A failed step
    raises StepFailure with the records accumulated so far attached.
    """
    ops = assemble_operators(params.n_funcs, params.length)
    sampler = _BasisSampler(params.n_funcs, params.length)
    tau = params.tau
    u0, u1, v0, v1 = initial_layers(problem, params, quad_tol, sampler)
    state = TimeStepState(
        k=1,
        u_prev=u0,
        u_curr=u1,
        v_prev=v0,
        v_curr=v1,
        q=kirchhoff_coefficient(u1, params.alpha, params.beta),
    )

    records: list[ErrorRecord] = []
    trajectory = [(u0.values, v0.values), (u1.values, v1.values)] if record_trajectory else None

    e1, e2 = problem.layer_errors(u0, v0, 0.0, quad_tol, sampler)
    records.append(
        ErrorRecord(
            k=0,
            t=0.0,
            E1=e1,
            E2=e2,
            dE1=None,
            dE2=None,
            q=kirchhoff_coefficient(u0, params.alpha, params.beta),
            mon_du=0.0,
            mon_dv=0.0,
            mon_Au=float(np.linalg.norm(u0.values)),
            mon_Lv=_monitors(u0.values, u0.values, v0.values, v0.values, ops, params)[3],
        )
    )

    pending_e = problem.layer_errors(u1, v1, tau, quad_tol, sampler)
    if monitors:
        for callback in monitors:
            callback(state)

    executor = ThreadPoolExecutor(max_workers=2) if parallel else None
    try:
        for k in range(1, params.n_steps):
            previous = state
            state = step(previous, ops, forcing=problem.forcing, params=params,
                         quad_tol=quad_tol, sampler=sampler, executor=executor)
            if record_trajectory:
                trajectory.append((state.u_curr.values, state.v_curr.values))

            # Layer k is now interior: its central-difference derivative errors
            # use layers k - 1 and k + 1.
            de1, de2 = problem.derivative_errors(
                state.u_curr, previous.u_prev, state.v_curr, previous.v_prev,
                k * tau, tau, quad_tol, sampler,
            )
            du, dv, au, lv = _monitors(
                previous.u_prev.values, previous.u_curr.values,
                previous.v_prev.values, previous.v_curr.values, ops, params,
            )
            records.append(
                ErrorRecord(
                    k=k, t=k * tau, E1=pending_e[0], E2=pending_e[1],
                    dE1=de1, dE2=de2, q=previous.q,
                    mon_du=du, mon_dv=dv, mon_Au=au, mon_Lv=lv,
                )
            )
            pending_e = problem.layer_errors(
                state.u_curr, state.v_curr, state.k * tau, quad_tol, sampler
            )
            if monitors:
                for callback in monitors:
                    callback(state)
    except StepFailure as exc:
        exc.records = records
        raise
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    du, dv, au, lv = _monitors(
        state.u_prev.values, state.u_curr.values,
        state.v_prev.values, state.v_curr.values, ops, params,
    )
    records.append(
        ErrorRecord(
            k=params.n_steps, t=params.total_time, E1=pending_e[0], E2=pending_e[1],
            dE1=None, dE2=None, q=state.q,
            mon_du=du, mon_dv=dv, mon_Au=au, mon_Lv=lv,
        )
    )
    return RunResult(params=params, records=records, final_state=state, trajectory=trajectory)
