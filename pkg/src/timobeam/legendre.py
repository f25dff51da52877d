"""Shifted Legendre polynomials and error-controlled Gauss-Legendre quadrature.

Everything here lives on a physical interval [0, length]; the classical
polynomials on [-1, 1] are reached through the affine map t = 2x/length - 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "MAX_DEGREE",
    "Interval",
    "QuadratureRule",
    "QuadratureConvergenceError",
    "norm_factor",
    "legendre_table",
    "legendre_derivative_table",
    "shifted_legendre",
    "shifted_legendre_derivative",
    "gauss_legendre_rule",
    "integrate",
]

# Polynomial degrees above this are far outside any sensible basis size and
# usually indicate a unit error in the caller.
MAX_DEGREE = 256

DEFAULT_PANEL_ORDER = 10
DEFAULT_TOL = 1e-12
DEFAULT_MAX_DEPTH = 32


@dataclass(frozen=True)
class Interval:
    """An integration interval [a, b] with a < b."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not self.a < self.b:
            raise ValueError(f"interval requires a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes and weights on the reference interval [-1, 1]."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray


class QuadratureConvergenceError(RuntimeError):
    """Adaptive subdivision hit the depth cap; carries the best estimate."""

    def __init__(self, message: str, estimate):
        super().__init__(message)
        self.estimate = estimate


def norm_factor(m: int) -> float:
    """Normalization constant of the degree-m Legendre polynomial.

    The shifted polynomial of degree m has L2 norm sqrt(length) * norm_factor(m).
    """
    return 1.0 / np.sqrt(2.0 * m + 1.0)


def _check_degree(m: int) -> None:
    if m < 0:
        raise ValueError(f"polynomial degree must be nonnegative, got {m}")
    if m > MAX_DEGREE:
        raise ValueError(f"polynomial degree {m} exceeds the supported cap {MAX_DEGREE}")


def legendre_table(n_max: int, t: np.ndarray) -> np.ndarray:
    """Values of P_0 .. P_n_max at reference points t, shape (n_max + 1, t.size)."""
    _check_degree(n_max)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    table = np.empty((n_max + 1, t.size))
    table[0] = 1.0
    if n_max >= 1:
        table[1] = t
    for k in range(2, n_max + 1):
        table[k] = ((2 * k - 1) * t * table[k - 1] - (k - 1) * table[k - 2]) / k
    return table


def legendre_derivative_table(n_max: int, t: np.ndarray) -> np.ndarray:
    """Values of P_0' .. P_n_max' at reference points t.

    Uses P_k' = P_{k-2}' + (2k - 1) P_{k-1}, which stays stable at t = +-1.
    """
    _check_degree(n_max)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    values = legendre_table(max(n_max - 1, 0), t)
    table = np.zeros((n_max + 1, t.size))
    if n_max >= 1:
        table[1] = 1.0
    for k in range(2, n_max + 1):
        table[k] = table[k - 2] + (2 * k - 1) * values[k - 1]
    return table


def _to_reference(x, length: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > length):
        raise ValueError(f"evaluation point outside [0, {length}]")
    return 2.0 * x / length - 1.0


def shifted_legendre(m: int, x, length: float):
    """Shifted Legendre polynomial of degree m at x in [0, length]."""
    _check_degree(m)
    t = _to_reference(x, length)
    result = legendre_table(m, t)[m]
    return float(result[0]) if np.isscalar(x) else result


def shifted_legendre_derivative(m: int, x, length: float):
    """d/dx of the shifted Legendre polynomial of degree m at x in [0, length]."""
    _check_degree(m)
    t = _to_reference(x, length)
    result = legendre_derivative_table(m, t)[m] * (2.0 / length)
    return float(result[0]) if np.isscalar(x) else result


def _legendre_and_derivative(order: int, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p_prev = np.ones_like(t)
    p = t.copy()
    for k in range(2, order + 1):
        p_prev, p = p, ((2 * k - 1) * t * p - (k - 1) * p_prev) / k
    dp = order * (p_prev - t * p) / (1.0 - t * t)
    return p, dp


def gauss_legendre_rule(order: int) -> QuadratureRule:
    """Gauss-Legendre rule on [-1, 1] via Newton iteration on P_order.

    Chebyshev-type initial guesses; nodes are assembled symmetrically, so the
    rule is exactly symmetric about 0.
    """
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    if order == 1:
        return QuadratureRule(1, np.array([0.0]), np.array([2.0]))

    half = order // 2
    i = np.arange(1, half + 1)
    t = np.cos(np.pi * (i - 0.25) / (order + 0.5))  # positive half, descending
    for _ in range(100):
        p, dp = _legendre_and_derivative(order, t)
        dt = p / dp
        t -= dt
        if np.max(np.abs(dt)) < 1e-15:
            break
    _, dp = _legendre_and_derivative(order, t)
    w_half = 2.0 / ((1.0 - t * t) * dp * dp)

    nodes = np.concatenate([-t, [0.0] if order % 2 else [], t[::-1]])
    if order % 2:
        _, dp0 = _legendre_and_derivative(order, np.array([0.0]))
        w_mid = [2.0 / (dp0[0] * dp0[0])]
    else:
        w_mid = []
    weights = np.concatenate([w_half, w_mid, w_half[::-1]])
    return QuadratureRule(order, nodes, weights)


_RULE_CACHE: dict[int, QuadratureRule] = {}


def _cached_rule(order: int) -> QuadratureRule:
    rule = _RULE_CACHE.get(order)
    if rule is None:
        rule = gauss_legendre_rule(order)
        _RULE_CACHE[order] = rule
    return rule


def _panel_values(
    f: Callable, a: float, b: float, rule: QuadratureRule
) -> tuple[np.ndarray, float]:
    """Panel estimate plus the L1-size of the integrand on the panel."""
    x = 0.5 * (b - a) * rule.nodes + 0.5 * (a + b)
    fx = np.asarray(f(x), dtype=float)
    if fx.ndim == 0 or fx.shape[0] != x.size:
        fx = np.array([f(xi) for xi in x], dtype=float)
    estimate = 0.5 * (b - a) * np.tensordot(rule.weights, fx, axes=(0, 0))
    size = 0.5 * (b - a) * float(np.max(np.tensordot(rule.weights, np.abs(fx), axes=(0, 0))))
    return estimate, size


def integrate(
    f: Callable,
    interval: Interval,
    tol: float = DEFAULT_TOL,
    *,
    order: int = DEFAULT_PANEL_ORDER,
    max_depth: int = DEFAULT_MAX_DEPTH,
    min_depth: int = 0,
):
    """Adaptive composite Gauss-Legendre integration of f over the interval.

    f is called with an array of nodes and may return one value per node
    (scalar integrand) or one row per node (vector integrand).  A panel is
    accepted once bisecting it changes its contribution by at most
    tol * panel_length; the refined value is kept.  The threshold carries a
    roundoff floor proportional to the local size of the integrand, so large
    integrands cannot force subdivision below machine precision.  min_depth
    panels are refined unconditionally, which guards oscillatory integrands
    against accidental early agreement.  Exceeding max_depth raises
    QuadratureConvergenceError with the best available estimate attached.
    """
    if tol <= 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    rule = _cached_rule(order)
    eps = np.finfo(float).eps
    root, _ = _panel_values(f, interval.a, interval.b, rule)
    total = np.zeros_like(root)
    # Stack holds (a, b, coarse estimate, depth); LIFO order is deterministic.
    stack: list[tuple[float, float, np.ndarray, int]] = [(interval.a, interval.b, root, 0)]
    while stack:
        a, b, coarse, depth = stack.pop()
        mid = 0.5 * (a + b)
        left, size_left = _panel_values(f, a, mid, rule)
        right, size_right = _panel_values(f, mid, b, rule)
        refined = left + right
        threshold = tol * (b - a) + 64.0 * eps * (size_left + size_right)
        if depth >= min_depth and np.max(np.abs(refined - coarse)) <= threshold:
            total = total + refined
        elif depth + 1 > max_depth:
            best = total + refined
            for _, _, pending, _ in stack:
                best = best + pending
            raise QuadratureConvergenceError(
                f"integration did not settle within depth {max_depth} on "
                f"[{a}, {b}]",
                best if best.ndim else float(best),
            )
        else:
            stack.append((mid, b, right, depth + 1))
            stack.append((a, mid, left, depth + 1))
    return total if total.ndim else float(total)
