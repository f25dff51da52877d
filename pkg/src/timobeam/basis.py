"""Endpoint-vanishing trial functions built from shifted Legendre differences.

The m-th trial function (m >= 1) is the scaled difference of the shifted
Legendre polynomials of degrees m + 1 and m - 1; it vanishes at both ends of
[0, length] and its derivative is the orthonormal shifted Legendre polynomial
of degree m.  Coefficient vectors therefore satisfy the Parseval identity
sum(c_m^2) = integral of the squared derivative of the expansion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .legendre import Interval, integrate, legendre_derivative_table, legendre_table

__all__ = [
    "CompatibilityError",
    "SpectralCoefficients",
    "basis_function",
    "basis_derivative",
    "basis_matrix",
    "basis_derivative_matrix",
    "evaluate",
    "evaluate_derivative",
    "project",
]

COMPATIBILITY_RTOL = 1e-10


class CompatibilityError(ValueError):
    """The projected function does not vanish at the interval endpoints."""


@dataclass(frozen=True)
class SpectralCoefficients:
    """Coefficients of an expansion in the trial functions, indexed m = 1..N."""

    length: float
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.length <= 0.0:
            raise ValueError(f"interval length must be positive, got {self.length}")

    @property
    def n(self) -> int:
        return self.values.size


def _check_index(m: int) -> None:
    if m < 1:
        raise ValueError(f"trial-function index must be >= 1, got {m}")


def basis_matrix(n_funcs: int, x, length: float) -> np.ndarray:
    """Trial-function values, shape (x.size, n_funcs), columns m = 1..n_funcs."""
    _check_index(n_funcs)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0.0) or np.any(x > length):
        raise ValueError(f"evaluation point outside [0, {length}]")
    t = 2.0 * x / length - 1.0
    table = legendre_table(n_funcs + 1, t)
    m = np.arange(1, n_funcs + 1)
    scale = 0.5 * np.sqrt(length) / np.sqrt(2.0 * m + 1.0)
    return (table[2:] - table[:-2]).T * scale


def basis_derivative_matrix(n_funcs: int, x, length: float) -> np.ndarray:
    """Derivatives of the trial functions: orthonormal shifted Legendre values."""
    _check_index(n_funcs)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0.0) or np.any(x > length):
        raise ValueError(f"evaluation point outside [0, {length}]")
    t = 2.0 * x / length - 1.0
    table = legendre_table(n_funcs, t)
    m = np.arange(1, n_funcs + 1)
    scale = np.sqrt(2.0 * m + 1.0) / np.sqrt(length)
    return table[1:].T * scale


def basis_function(m: int, x, length: float):
    """Value of the m-th trial function at x."""
    _check_index(m)
    result = basis_matrix(m, x, length)[:, m - 1]
    return float(result[0]) if np.isscalar(x) else result


def basis_derivative(m: int, x, length: float):
    """Derivative of the m-th trial function at x."""
    _check_index(m)
    result = basis_derivative_matrix(m, x, length)[:, m - 1]
    return float(result[0]) if np.isscalar(x) else result


def evaluate(coeffs: SpectralCoefficients, x):
    """Value of the expansion at x."""
    result = basis_matrix(coeffs.n, x, coeffs.length) @ coeffs.values
    return float(result[0]) if np.isscalar(x) else result


def evaluate_derivative(coeffs: SpectralCoefficients, x):
    """Derivative of the expansion at x."""
    result = basis_derivative_matrix(coeffs.n, x, coeffs.length) @ coeffs.values
    return float(result[0]) if np.isscalar(x) else result


def project(
    g: Callable,
    n_funcs: int,
    length: float,
    derivative: Callable | None = None,
    tol: float = 1e-12,
) -> SpectralCoefficients:
    """Project g, with g(0) = g(length) = 0, onto the first n_funcs trial functions.

    The projection is orthogonal in the derivative seminorm: with g' supplied
    the coefficients are the inner products of g' with the orthonormal
    polynomials; otherwise integration by parts is used instead (the boundary
    terms vanish).
    """
    _check_index(n_funcs)
    scale = 1.0 + float(np.max(np.abs(np.asarray(g(np.linspace(0.0, length, 17))))))
    endpoint = max(abs(float(g(0.0))), abs(float(g(length))))
    if endpoint > COMPATIBILITY_RTOL * scale:
        raise CompatibilityError(
            f"projected function must vanish at the endpoints; "
            f"boundary magnitude {endpoint:.3e} exceeds {COMPATIBILITY_RTOL * scale:.3e}"
        )
    if derivative is not None:
        integrand = lambda x: np.asarray(derivative(x))[:, None] * basis_derivative_matrix(
            n_funcs, x, length
        )
    else:
        integrand = lambda x: -np.asarray(g(x))[:, None] * _orthonormal_derivative_matrix(
            n_funcs, x, length
        )
    values = integrate(integrand, Interval(0.0, length), tol, min_depth=3)
    return SpectralCoefficients(length, values)


def _orthonormal_derivative_matrix(n_funcs: int, x, length: float) -> np.ndarray:
    # d/dx of the orthonormal shifted Legendre polynomials, m = 1..n_funcs.
    x = np.atleast_1d(np.asarray(x, dtype=float))
    t = 2.0 * x / length - 1.0
    table = legendre_derivative_table(n_funcs, t)
    m = np.arange(1, n_funcs + 1)
    scale = (2.0 / length) * np.sqrt(2.0 * m + 1.0) / np.sqrt(length)
    return table[1:].T * scale
