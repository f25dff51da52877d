"""Finite-dimensional matrix realization of the three-layer scheme.

Works with an operator triple (A, B, C): A symmetric positive definite, C
symmetric positive semidefinite, and B subordinate to A in the sense that
norm(B x)^2 <= b0^2 <A x, x>.  Used to exercise the starting-vector
construction, the per-layer linear solves, and the boundedness monitors on
arbitrary instances, including coefficient-space images of the spectral
discretization.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "AbstractParameters",
    "OperatorTriple",
    "AbstractState",
    "MonitorValues",
    "make_triple",
    "random_triple",
    "subordination_constant",
    "sym_sqrt",
    "sym_inv_sqrt",
    "starting_vectors",
    "step",
    "run_abstract",
    "boundedness_monitor",
]

SYMMETRY_RTOL = 1e-10


@dataclass(frozen=True)
class AbstractParameters:
    """Scheme constants and time grid for a finite-dimensional instance."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    a1: float
    a2: float
    total_time: float
    n_steps: int

    def __post_init__(self) -> None:
        if self.alpha <= 0.0 or self.gamma <= 0.0 or self.delta <= 0.0:
            raise ValueError("alpha, gamma, and delta must be positive")
        if self.beta < 0.0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.n_steps < 2:
            raise ValueError(f"need at least 2 time steps, got {self.n_steps}")
        if self.total_time <= 0.0:
            raise ValueError(f"final time must be positive, got {self.total_time}")

    @property
    def tau(self) -> float:
        return self.total_time / self.n_steps


@dataclass(frozen=True)
class OperatorTriple:
    """Symmetric positive-definite A, PSD C, and subordinate coupling B."""

    a_mat: np.ndarray
    b_mat: np.ndarray
    c_mat: np.ndarray
    nu: float
    b0: float

    @property
    def dim(self) -> int:
        return self.a_mat.shape[0]

    def l_mat(self, gamma: float, delta: float) -> np.ndarray:
        return gamma * self.a_mat + delta * self.c_mat


@dataclass(frozen=True)
class AbstractState:
    k: int
    u_prev: np.ndarray
    u_curr: np.ndarray
    v_prev: np.ndarray
    v_curr: np.ndarray
    q: float


class MonitorValues(NamedTuple):
    """The six uniformly bounded discrete quantities tracked per layer."""

    du: float        # norm of (u_k - u_{k-1}) / tau
    dv: float        # norm of (v_k - v_{k-1}) / tau
    au_half: float   # <A u_k, u_k>^(1/2)
    lv_half: float   # <L v_k, v_k>^(1/2)
    au: float        # norm of A u_k
    adu_half: float  # <A du, du>^(1/2) / tau


def _check_symmetric(mat: np.ndarray, name: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    scale = np.max(np.abs(mat)) or 1.0
    if np.max(np.abs(mat - mat.T)) > SYMMETRY_RTOL * scale:
        raise ValueError(f"{name} must be symmetric")
    return 0.5 * (mat + mat.T)


def subordination_constant(a_mat: np.ndarray, b_mat: np.ndarray) -> float:
    """Smallest b with norm(B x)^2 <= b^2 <A x, x> for all x.

    Equals the square root of the largest eigenvalue of
    A^(-1/2) B^T B A^(-1/2).
    """
    a_mat = _check_symmetric(a_mat, "A")
    eigenvalues = np.linalg.eigvalsh(a_mat)
    if eigenvalues[0] <= 0.0:
        raise ValueError("A must be positive definite")
    inv_sqrt = sym_inv_sqrt(a_mat)
    b_mat = np.asarray(b_mat, dtype=float)
    sandwich = inv_sqrt @ (b_mat.T @ b_mat) @ inv_sqrt
    top = np.linalg.eigvalsh(0.5 * (sandwich + sandwich.T))[-1]
    return float(np.sqrt(max(top, 0.0)))


def sym_sqrt(mat: np.ndarray) -> np.ndarray:
    """Symmetric square root via eigendecomposition; validates reconstruction."""
    mat = _check_symmetric(mat, "matrix")
    values, vectors = np.linalg.eigh(mat)
    if values[0] < 0.0:
        raise ValueError("matrix must be positive semidefinite")
    root = (vectors * np.sqrt(values)) @ vectors.T
    if np.max(np.abs(root @ root - mat)) > 1e-12 * max(np.max(np.abs(mat)), 1.0):
        raise ValueError("square-root reconstruction failed the tolerance check")
    return root


def sym_inv_sqrt(mat: np.ndarray) -> np.ndarray:
    """Inverse symmetric square root of an SPD matrix."""
    mat = _check_symmetric(mat, "matrix")
    values, vectors = np.linalg.eigh(mat)
    if values[0] <= 0.0:
        raise ValueError("matrix must be positive definite")
    return (vectors / np.sqrt(values)) @ vectors.T


def make_triple(a_mat, b_mat, c_mat, n_psd_samples: int = 64, rng=None) -> OperatorTriple:
    """Validate an operator triple and compute its constants.

    C positive semidefiniteness is checked on random vectors, matching how the
    property is consumed.
    """
    a_mat = _check_symmetric(a_mat, "A")
    c_mat = _check_symmetric(c_mat, "C")
    b_mat = np.asarray(b_mat, dtype=float)
    nu = float(np.linalg.eigvalsh(a_mat)[0])
    if nu <= 0.0:
        raise ValueError("A must be positive definite")
    rng = np.random.default_rng(0) if rng is None else rng
    for _ in range(n_psd_samples):
        x = rng.standard_normal(a_mat.shape[0])
        if x @ c_mat @ x < -1e-12 * (x @ x):
            raise ValueError("C failed the positive-semidefiniteness sampling check")
    return OperatorTriple(
        a_mat=a_mat,
        b_mat=b_mat,
        c_mat=c_mat,
        nu=nu,
        b0=subordination_constant(a_mat, b_mat),
    )


def random_triple(
    dim: int,
    rng: np.random.Generator,
    spectrum: tuple[float, float] = (1.0, 10.0),
    coupling: float = 1.0,
    c_scale: float = 1.0,
) -> OperatorTriple:
    """Random instance: A with log-uniform spectrum, PSD C, B rescaled to b0."""
    lo, hi = spectrum
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    values = np.exp(rng.uniform(np.log(lo), np.log(hi), size=dim))
    a_mat = (q * values) @ q.T
    q2, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    c_values = c_scale * rng.uniform(0.0, 1.0, size=dim)
    c_mat = (q2 * c_values) @ q2.T
    b_raw = rng.standard_normal((dim, dim))
    b_mat = b_raw * (coupling / subordination_constant(a_mat, b_raw))
    return make_triple(a_mat, b_mat, c_mat, rng=rng)


def starting_vectors(
    phi0: np.ndarray,
    phi1: np.ndarray,
    psi0: np.ndarray,
    psi1: np.ndarray,
    triple: OperatorTriple,
    f1_0: np.ndarray,
    f2_0: np.ndarray,
    params: AbstractParameters,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Layers 0 and 1 from the three-term Taylor expansion at t = 0."""
    vectors = [np.asarray(v, dtype=float) for v in (phi0, phi1, psi0, psi1, f1_0, f2_0)]
    if any(v.shape != (triple.dim,) for v in vectors):
        raise ValueError(f"all data vectors must have shape ({triple.dim},)")
    phi0, phi1, psi0, psi1, f1_0, f2_0 = vectors
    tau = params.tau
    a_phi0 = triple.a_mat @ phi0
    q0 = params.alpha + params.beta * float(phi0 @ a_phi0)
    phi2 = f1_0 - params.a1 * (triple.b_mat @ psi0) - q0 * a_phi0
    l_mat = triple.l_mat(params.gamma, params.delta)
    psi2 = f2_0 - params.a2 * (triple.b_mat @ phi0) - l_mat @ psi0
    u1 = phi0 + tau * phi1 + 0.5 * tau**2 * phi2
    v1 = psi0 + tau * psi1 + 0.5 * tau**2 * psi2
    return phi0.copy(), u1, psi0.copy(), v1


def _spd_solve(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    factor = np.linalg.cholesky(mat)
    y = np.linalg.solve(factor, rhs)
    return np.linalg.solve(factor.T, y)


def step(
    state: AbstractState,
    triple: OperatorTriple,
    f1_k: np.ndarray,
    f2_k: np.ndarray,
    params: AbstractParameters,
    parallel: bool = False,
) -> AbstractState:
    """One layer of the scheme via two symmetric positive-definite solves."""
    tau = params.tau
    dim = triple.dim
    identity = np.eye(dim)
    m_u = identity + 0.5 * tau**2 * state.q * triple.a_mat
    m_v = identity + 0.5 * tau**2 * triple.l_mat(params.gamma, params.delta)
    rhs_u = tau**2 * (np.asarray(f1_k, dtype=float) - params.a1 * (triple.b_mat @ state.v_curr)) \
        + 2.0 * state.u_curr
    rhs_v = tau**2 * (np.asarray(f2_k, dtype=float) - params.a2 * (triple.b_mat @ state.u_curr)) \
        + 2.0 * state.v_curr
    try:
        if parallel:
            with ThreadPoolExecutor(max_workers=2) as pool:
                fu = pool.submit(_spd_solve, m_u, rhs_u)
                fv = pool.submit(_spd_solve, m_v, rhs_v)
                w1, w2 = fu.result(), fv.result()
        else:
            w1 = _spd_solve(m_u, rhs_u)
            w2 = _spd_solve(m_v, rhs_v)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"per-layer factorization failed at layer {state.k}; "
            f"an SPD precondition is violated: {exc}"
        ) from exc
    u_next = w1 - state.u_prev
    v_next = w2 - state.v_prev
    q_next = params.alpha + params.beta * float(u_next @ (triple.a_mat @ u_next))
    return AbstractState(
        k=state.k + 1, u_prev=state.u_curr, u_curr=u_next,
        v_prev=state.v_curr, v_curr=v_next, q=q_next,
    )


def boundedness_monitor(state: AbstractState, triple: OperatorTriple,
                        gamma: float = 1.0, delta: float = 1.0,
                        tau: float = 1.0) -> MonitorValues:
    """The six discrete quantities whose uniform boundedness drives convergence."""
    du = (state.u_curr - state.u_prev) / tau
    dv = (state.v_curr - state.v_prev) / tau
    a_u = triple.a_mat @ state.u_curr
    l_mat = triple.l_mat(gamma, delta)
    return MonitorValues(
        du=float(np.linalg.norm(du)),
        dv=float(np.linalg.norm(dv)),
        au_half=float(np.sqrt(max(state.u_curr @ a_u, 0.0))),
        lv_half=float(np.sqrt(max(state.v_curr @ (l_mat @ state.v_curr), 0.0))),
        au=float(np.linalg.norm(a_u)),
        adu_half=float(np.sqrt(max(du @ (triple.a_mat @ du), 0.0))),
    )


def run_abstract(
    triple: OperatorTriple,
    phi0: np.ndarray,
    phi1: np.ndarray,
    psi0: np.ndarray,
    psi1: np.ndarray,
    f1: Callable[[float], np.ndarray],
    f2: Callable[[float], np.ndarray],
    params: AbstractParameters,
    monitors: Sequence[Callable] | None = None,
    initial: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] | None = None,
) -> tuple[list[AbstractState], list[MonitorValues]]:
    """March the full time grid, collecting states and monitor tuples.

    When initial is given it overrides the Taylor starting vectors; this is how
    externally produced starting layers (e.g. from the spectral stepper) are
    injected for equivalence checks.
    """
    if initial is None:
        u0, u1, v0, v1 = starting_vectors(
            phi0, phi1, psi0, psi1, triple, f1(0.0), f2(0.0), params
        )
    else:
        u0, u1, v0, v1 = (np.asarray(v, dtype=float) for v in initial)
    q1 = params.alpha + params.beta * float(u1 @ (triple.a_mat @ u1))
    state = AbstractState(k=1, u_prev=u0, u_curr=u1, v_prev=v0, v_curr=v1, q=q1)
    states = [state]
    values = [boundedness_monitor(state, triple, params.gamma, params.delta, params.tau)]
    if monitors:
        for callback in monitors:
            callback(state)
    for k in range(1, params.n_steps):
        t_k = k * params.tau
        state = step(state, triple, f1(t_k), f2(t_k), params)
        states.append(state)
        values.append(
            boundedness_monitor(state, triple, params.gamma, params.delta, params.tau)
        )
        if monitors:
            for callback in monitors:
                callback(state)
    return states, values
