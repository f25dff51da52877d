"""Manufactured benchmark problems with exact solutions and derived forcings.

All cases share the same structure: both unknowns equal a separable function
g(t) * W(x) with W vanishing at the endpoints, so the nonlocal stiffness
integral reduces to g(t)^2 times a fixed spatial constant.  The forcing terms
follow by substituting the exact solution into the governing equations:

    f1 = u_tt - (alpha + beta * integral(u_x^2)) * u_xx + a1 * v_x
    f2 = v_tt - gamma * v_xx + delta * v - a2 * u_x
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .basis import SpectralCoefficients, evaluate
from .legendre import Interval, integrate
from .timestepper import ForcingSampler, SchemeParameters, _BasisSampler

__all__ = [
    "BenchmarkProblem",
    "make_benchmark",
    "make_machine_precision_case",
    "layer_errors",
    "BENCHMARK_IDS",
]

BENCHMARK_IDS = (1, 2, 3)


@dataclass(frozen=True)
class BenchmarkProblem:
    """Exact solutions, initial data with derivatives, and derived forcings."""

    id: int | str
    params: SchemeParameters
    exact_u: Callable
    exact_v: Callable
    exact_u_x: Callable
    exact_u_xx: Callable
    exact_u_t: Callable
    exact_u_tt: Callable
    exact_v_x: Callable
    exact_v_xx: Callable
    exact_v_t: Callable
    exact_v_tt: Callable
    phi0: Callable
    phi0_x: Callable
    phi0_xx: Callable
    phi1: Callable
    phi1_x: Callable
    psi0: Callable
    psi0_x: Callable
    psi0_xx: Callable
    psi1: Callable
    psi1_x: Callable
    forcing: ForcingSampler
    nonlocal_energy: Callable  # t -> integral of u_x(., t)^2

    def forcing_residuals(self, x, t: float, quad_tol: float = 1e-12):
        """Residuals of both equations with the exact solution inserted.

        The nonlocal integral is recomputed by quadrature here, independently
        of any closed form baked into the forcing, so this guards the
        manufactured construction.
        """
        x = np.asarray(x, dtype=float)
        p = self.params
        energy = float(
            integrate(
                lambda s: np.asarray(self.exact_u_x(s, t)) ** 2,
                Interval(0.0, p.length),
                quad_tol,
            )
        )
        stiffness = p.alpha + p.beta * energy
        r1 = (
            np.asarray(self.exact_u_tt(x, t))
            - stiffness * np.asarray(self.exact_u_xx(x, t))
            + p.a1 * np.asarray(self.exact_v_x(x, t))
            - np.asarray(self.forcing.f1(x, t))
        )
        r2 = (
            np.asarray(self.exact_v_tt(x, t))
            - p.gamma * np.asarray(self.exact_v_xx(x, t))
            + p.delta * np.asarray(self.exact_v(x, t))
            - p.a2 * np.asarray(self.exact_u_x(x, t))
            - np.asarray(self.forcing.f2(x, t))
        )
        return r1, r2

    def layer_errors(
        self,
        u_coeffs: SpectralCoefficients,
        v_coeffs: SpectralCoefficients,
        t: float,
        quad_tol: float = 1e-12,
        sampler: _BasisSampler | None = None,
    ) -> tuple[float, float]:
        """L2 norms of (exact - numeric) for both unknowns at time t."""
        length = self.params.length

        def integrand(x: np.ndarray) -> np.ndarray:
            phi = sampler.values(x) if sampler is not None else None
            if phi is not None:
                u_num = phi @ u_coeffs.values
                v_num = phi @ v_coeffs.values
            else:
                u_num = evaluate(u_coeffs, x)
                v_num = evaluate(v_coeffs, x)
            du = np.asarray(self.exact_u(x, t)) - u_num
            dv = np.asarray(self.exact_v(x, t)) - v_num
            return np.column_stack([du * du, dv * dv])

        result = integrate(integrand, Interval(0.0, length), quad_tol, min_depth=3)
        return float(np.sqrt(max(result[0], 0.0))), float(np.sqrt(max(result[1], 0.0)))

    def derivative_errors(
        self,
        u_next: SpectralCoefficients,
        u_prev: SpectralCoefficients,
        v_next: SpectralCoefficients,
        v_prev: SpectralCoefficients,
        t: float,
        tau: float,
        quad_tol: float = 1e-12,
        sampler: _BasisSampler | None = None,
    ) -> tuple[float, float]:
        """L2 errors of the central-difference time derivative at time t."""
        length = self.params.length
        cu = (u_next.values - u_prev.values) / (2.0 * tau)
        cv = (v_next.values - v_prev.values) / (2.0 * tau)

        def integrand(x: np.ndarray) -> np.ndarray:
            phi = (
                sampler.values(x)
                if sampler is not None
                else None
            )
            if phi is not None:
                u_num = phi @ cu
                v_num = phi @ cv
            else:
                u_num = evaluate(SpectralCoefficients(length, cu), x)
                v_num = evaluate(SpectralCoefficients(length, cv), x)
            du = np.asarray(self.exact_u_t(x, t)) - u_num
            dv = np.asarray(self.exact_v_t(x, t)) - v_num
            return np.column_stack([du * du, dv * dv])

        result = integrate(integrand, Interval(0.0, length), quad_tol, min_depth=3)
        return float(np.sqrt(max(result[0], 0.0))), float(np.sqrt(max(result[1], 0.0)))


def _build_separable(
    problem_id: int | str,
    params: SchemeParameters,
    g: Callable[[float], float],
    g_t: Callable[[float], float],
    g_tt: Callable[[float], float],
    w: Callable,
    w_x: Callable,
    w_xx: Callable,
    spatial_energy: float,
) -> BenchmarkProblem:
    """Assemble a problem with u = v = g(t) W(x) and spatial_energy = int W'^2."""
    alpha, beta = params.alpha, params.beta
    gamma, delta = params.gamma, params.delta
    a1, a2 = params.a1, params.a2

    def exact(x, t):
        return g(t) * np.asarray(w(x))

    def exact_x(x, t):
        return g(t) * np.asarray(w_x(x))

    def exact_xx(x, t):
        return g(t) * np.asarray(w_xx(x))

    def exact_t(x, t):
        return g_t(t) * np.asarray(w(x))

    def exact_tt(x, t):
        return g_tt(t) * np.asarray(w(x))

    def nonlocal_energy(t):
        return g(t) ** 2 * spatial_energy

    def f1(x, t):
        stiffness = alpha + beta * nonlocal_energy(t)
        return (
            g_tt(t) * np.asarray(w(x))
            - stiffness * g(t) * np.asarray(w_xx(x))
            + a1 * g(t) * np.asarray(w_x(x))
        )

    def f2(x, t):
        return (
            g_tt(t) * np.asarray(w(x))
            - gamma * g(t) * np.asarray(w_xx(x))
            + delta * g(t) * np.asarray(w(x))
            - a2 * g(t) * np.asarray(w_x(x))
        )

    g0, g1 = g(0.0), g_t(0.0)
    return BenchmarkProblem(
        id=problem_id,
        params=params,
        exact_u=exact,
        exact_v=exact,
        exact_u_x=exact_x,
        exact_u_xx=exact_xx,
        exact_u_t=exact_t,
        exact_u_tt=exact_tt,
        exact_v_x=exact_x,
        exact_v_xx=exact_xx,
        exact_v_t=exact_t,
        exact_v_tt=exact_tt,
        phi0=lambda x: g0 * np.asarray(w(x)),
        phi0_x=lambda x: g0 * np.asarray(w_x(x)),
        phi0_xx=lambda x: g0 * np.asarray(w_xx(x)),
        phi1=lambda x: g1 * np.asarray(w(x)),
        phi1_x=lambda x: g1 * np.asarray(w_x(x)),
        psi0=lambda x: g0 * np.asarray(w(x)),
        psi0_x=lambda x: g0 * np.asarray(w_x(x)),
        psi0_xx=lambda x: g0 * np.asarray(w_xx(x)),
        psi1=lambda x: g1 * np.asarray(w(x)),
        psi1_x=lambda x: g1 * np.asarray(w_x(x)),
        forcing=ForcingSampler(f1=f1, f2=f2),
        nonlocal_energy=nonlocal_energy,
    )


def _default_params(n_steps: int, n_funcs: int, total_time: float) -> SchemeParameters:
    # All physical constants equal one in every benchmark.
    return SchemeParameters(
        alpha=1.0, beta=1.0, gamma=1.0, delta=1.0, a1=1.0, a2=1.0,
        length=2.0, total_time=total_time, n_steps=n_steps, n_funcs=n_funcs,
    )


def _sine_mode(wavenumber: float, length: float):
    k = wavenumber * math.pi / length

    def w(x):
        return np.sin(k * np.asarray(x, dtype=float))

    def w_x(x):
        return k * np.cos(k * np.asarray(x, dtype=float))

    def w_xx(x):
        return -(k**2) * np.sin(k * np.asarray(x, dtype=float))

    # integral over [0, length] of (k cos(kx))^2 for integer wavenumber
    energy = k**2 * length / 2.0
    return w, w_x, w_xx, energy


def make_benchmark(problem_id: int, params: SchemeParameters | None = None) -> BenchmarkProblem:
    """One of the three oscillatory benchmark problems by id."""
    if problem_id == 1:
        params = params or _default_params(n_steps=256, n_funcs=35, total_time=1.0)
        w, w_x, w_xx, energy = _sine_mode(14.0, params.length)
        omega = math.pi / 2.0
        return _build_separable(
            1, params,
            g=lambda t: math.sin(omega * t),
            g_t=lambda t: omega * math.cos(omega * t),
            g_tt=lambda t: -(omega**2) * math.sin(omega * t),
            w=w, w_x=w_x, w_xx=w_xx, spatial_energy=energy,
        )
    if problem_id == 2:
        params = params or _default_params(n_steps=256, n_funcs=45, total_time=1.0)
        return _make_gaussian_envelope_case(params)
    if problem_id == 3:
        params = params or _default_params(n_steps=1024, n_funcs=15, total_time=4.0)
        w, w_x, w_xx, energy = _sine_mode(5.0, params.length)
        rate = math.pi / 4.0  # exponent pi t / T with the canonical T = 4
        return _build_separable(
            3, params,
            g=lambda t: 0.25 * math.exp(rate * t),
            g_t=lambda t: 0.25 * rate * math.exp(rate * t),
            g_tt=lambda t: 0.25 * rate**2 * math.exp(rate * t),
            w=w, w_x=w_x, w_xx=w_xx, spatial_energy=energy,
        )
    raise ValueError(f"unknown benchmark id {problem_id!r}; expected 1, 2, or 3")


def _make_gaussian_envelope_case(params: SchemeParameters) -> BenchmarkProblem:
    # Sine mode under a Gaussian envelope; the spatial energy integral has no
    # elementary closed form and is computed once by quadrature.
    length = params.length
    amplitude, lam1, width, lam = 0.5, 2.0, 1.0, 19.0
    horizon = 1.0  # canonical T in the time factor
    k = lam * math.pi / length

    def envelope(x):
        z = 2.0 * np.asarray(x, dtype=float) - length
        return np.exp(-(z**2) / width**2)

    def envelope_x(x):
        z = 2.0 * np.asarray(x, dtype=float) - length
        return -(4.0 * z / width**2) * np.exp(-(z**2) / width**2)

    def envelope_xx(x):
        z = 2.0 * np.asarray(x, dtype=float) - length
        return (16.0 * z**2 / width**4 - 8.0 / width**2) * np.exp(-(z**2) / width**2)

    def w(x):
        return envelope(x) * np.sin(k * np.asarray(x, dtype=float))

    def w_x(x):
        x = np.asarray(x, dtype=float)
        return envelope_x(x) * np.sin(k * x) + envelope(x) * k * np.cos(k * x)

    def w_xx(x):
        x = np.asarray(x, dtype=float)
        return (
            envelope_xx(x) * np.sin(k * x)
            + 2.0 * envelope_x(x) * k * np.cos(k * x)
            - envelope(x) * k**2 * np.sin(k * x)
        )

    energy = float(
        integrate(lambda x: np.asarray(w_x(x)) ** 2, Interval(0.0, length), 1e-12,
                  min_depth=3)
    )
    rate = lam1 * math.pi / horizon
    return _build_separable(
        2, params,
        g=lambda t: amplitude * (1.0 + math.cos(rate * t)),
        g_t=lambda t: -amplitude * rate * math.sin(rate * t),
        g_tt=lambda t: -amplitude * rate**2 * math.cos(rate * t),
        w=w, w_x=w_x, w_xx=w_xx, spatial_energy=energy,
    )


def make_machine_precision_case(
    params: SchemeParameters | None = None,
) -> BenchmarkProblem:
    """Quadratic-in-space, linear-in-time solution reproduced to roundoff.

    The solution t * x * (length - x) lies in the trial space and has vanishing
    second time derivative, so the combined scheme commits no discretization
    error at all.
    """
    params = params or _default_params(n_steps=64, n_funcs=8, total_time=1.0)
    length = params.length

    def w(x):
        x = np.asarray(x, dtype=float)
        return x * (length - x)

    def w_x(x):
        return length - 2.0 * np.asarray(x, dtype=float)

    def w_xx(x):
        return -2.0 * np.ones_like(np.asarray(x, dtype=float))

    energy = length**3 / 3.0  # integral of (length - 2x)^2 over [0, length]
    return _build_separable(
        "mp", params,
        g=lambda t: t, g_t=lambda t: 1.0, g_tt=lambda t: 0.0,
        w=w, w_x=w_x, w_xx=w_xx, spatial_energy=energy,
    )


def layer_errors(
    problem: BenchmarkProblem,
    u_coeffs: SpectralCoefficients,
    v_coeffs: SpectralCoefficients,
    t: float,
    quad_tol: float = 1e-12,
) -> tuple[float, float]:
    """Module-level convenience wrapper around BenchmarkProblem.layer_errors."""
    return problem.layer_errors(u_coeffs, v_coeffs, t, quad_tol)
