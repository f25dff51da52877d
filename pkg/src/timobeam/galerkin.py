"""Banded Galerkin operators for the trial basis and the decoupled solver.

The scaled mass matrix (the trial functions' Gram matrix times 4/length^2) is
symmetric with nonzeros only on the main diagonal and the second off-diagonals;
the scaled derivative-coupling matrix (2/length times the Gram matrix between
derivatives and trial functions) is skew-symmetric with nonzeros on the first
off-diagonals.  Shifting the mass matrix by a positive multiple of the identity
gives a positive-definite "tridiagonal with a gap" system that splits by index
parity into two ordinary tridiagonal systems.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .basis import basis_derivative_matrix, basis_matrix
from .legendre import Interval, integrate, norm_factor

__all__ = [
    "PivotError",
    "GalerkinOperatorSet",
    "GapTridiagonalSystem",
    "assemble_operators",
    "shifted_system",
    "solve_gap_tridiagonal",
    "assemble_oracle",
]


class PivotError(RuntimeError):
    """Elimination hit a non-positive pivot; the system was not SPD."""

    def __init__(self, subsystem: str, index: int, pivot: float):
        super().__init__(
            f"non-positive pivot {pivot:.3e} at index {index} of the "
            f"{subsystem}-indexed subsystem"
        )
        self.subsystem = subsystem
        self.index = index
        self.pivot = pivot


class GalerkinOperatorSet:
    """Banded storage for the scaled mass and derivative-coupling matrices."""

    def __init__(self, n_funcs: int, length: float):
        if n_funcs < 1:
            raise ValueError(f"basis size must be >= 1, got {n_funcs}")
        if length <= 0.0:
            raise ValueError(f"interval length must be positive, got {length}")
        self.n = n_funcs
        self.length = length
        a = np.array([norm_factor(m) for m in range(n_funcs + 3)])
        i = np.arange(1, n_funcs + 1)
        self.mass_diag = 2.0 * a[i - 1] ** 2 * a[i + 1] ** 2
        j = np.arange(1, n_funcs - 1)
        self.mass_gap = -a[j] * a[j + 1] ** 2 * a[j + 2]
        k = np.arange(1, n_funcs)
        self.coupling_band = a[k] * a[k + 1]
        for arr in (self.mass_diag, self.mass_gap, self.coupling_band):
            arr.setflags(write=False)

    def apply_mass(self, x: np.ndarray) -> np.ndarray:
        """Product of the scaled mass matrix with x."""
        y = self.mass_diag * x
        if self.n > 2:
            y[:-2] += self.mass_gap * x[2:]
            y[2:] += self.mass_gap * x[:-2]
        return y

    def apply_coupling(self, x: np.ndarray) -> np.ndarray:
        """Product of the scaled skew-symmetric coupling matrix with x."""
        y = np.zeros_like(x)
        if self.n > 1:
            y[:-1] = self.coupling_band * x[1:]
            y[1:] -= self.coupling_band * x[:-1]
        return y

    def mass_dense(self) -> np.ndarray:
        m = np.diag(self.mass_diag)
        if self.n > 2:
            m += np.diag(self.mass_gap, 2) + np.diag(self.mass_gap, -2)
        return m

    def coupling_dense(self) -> np.ndarray:
        b = np.zeros((self.n, self.n))
        if self.n > 1:
            b += np.diag(self.coupling_band, 1) - np.diag(self.coupling_band, -1)
        return b


class GapTridiagonalSystem:
    """Linear system whose matrix couples unknowns i and i + 2 only."""

    def __init__(self, diagonal: np.ndarray, gap: np.ndarray, rhs: np.ndarray):
        diagonal = np.asarray(diagonal, dtype=float)
        gap = np.asarray(gap, dtype=float)
        rhs = np.asarray(rhs, dtype=float)
        n = diagonal.size
        if gap.size != max(n - 2, 0):
            raise ValueError(f"gap band must have length {max(n - 2, 0)}, got {gap.size}")
        if rhs.size != n:
            raise ValueError(f"rhs must have length {n}, got {rhs.size}")
        self.diagonal = diagonal
        self.gap = gap
        self.rhs = rhs

    @property
    def n(self) -> int:
        return self.diagonal.size


def assemble_operators(n_funcs: int, length: float) -> GalerkinOperatorSet:
    """Closed-form banded operators for the first n_funcs trial functions."""
    return GalerkinOperatorSet(n_funcs, length)


def shifted_system(
    ops: GalerkinOperatorSet, shift: float, rhs: np.ndarray
) -> GapTridiagonalSystem:
    """Mass matrix plus shift * identity, paired with a right-hand side."""
    if shift <= 0.0:
        raise ValueError(
            f"shift must be positive to keep the system positive definite, got {shift}"
        )
    return GapTridiagonalSystem(ops.mass_diag + shift, ops.mass_gap, rhs)


def _thomas_spd(
    d: np.ndarray, e: np.ndarray, b: np.ndarray, label: str, start: int = 0
) -> np.ndarray:
    # Elimination without pivoting; valid for SPD tridiagonal systems.  Pivot
    # failures report the index in the full (interleaved) system.
    n = d.size
    c = np.empty(n)
    y = np.empty(n)
    pivot = d[0]
    if pivot <= 0.0:
        raise PivotError(label, start, pivot)
    y[0] = b[0] / pivot
    for i in range(1, n):
        c[i - 1] = e[i - 1] / pivot
        pivot = d[i] - e[i - 1] * c[i - 1]
        if pivot <= 0.0:
            raise PivotError(label, start + 2 * i, pivot)
        y[i] = (b[i] - e[i - 1] * y[i - 1]) / pivot
    x = np.empty(n)
    x[n - 1] = y[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = y[i] - c[i] * x[i + 1]
    return x


def solve_gap_tridiagonal(
    system: GapTridiagonalSystem, parallel: bool = False
) -> np.ndarray:
    """Solve by splitting into the even- and odd-indexed tridiagonal systems.

    The two subsystem solves are independent; with parallel=True they run on
    separate threads and produce bit-identical results.
    """
    n = system.n
    x = np.empty(n)
    parts = []
    for start, label in ((0, "even"), (1, "odd")):
        d = system.diagonal[start::2]
        if d.size == 0:
            continue
        e = system.gap[start::2] if n > 2 else np.empty(0)
        e = e[: d.size - 1]
        b = system.rhs[start::2]
        parts.append((start, d, e, b, label))
    if parallel and len(parts) == 2:
        with ThreadPoolExecutor(max_workers=2) as pool:
            futures = [
                pool.submit(_thomas_spd, d, e, b, label, start)
                for start, d, e, b, label in parts
            ]
            results = [f.result() for f in futures]
        for (start, *_), sol in zip(parts, results):
            x[start::2] = sol
    else:
        for start, d, e, b, label in parts:
            x[start::2] = _thomas_spd(d, e, b, label, start)
    return x


def assemble_oracle(
    n_funcs: int, length: float, a: float, b: float, tol: float = 1e-12
) -> np.ndarray:
    """Quadrature-assembled dense matrix for a*(mass form) + b*(derivative form).

    Entries are (4/length^2) * [a (phi_i, phi_m) + b (phi_i', phi_m')].  This is
    a verification path only; the closed-form assembly is used at runtime.
    """
    if n_funcs < 1:
        raise ValueError(f"basis size must be >= 1, got {n_funcs}")

    def integrand(x: np.ndarray) -> np.ndarray:
        rows = np.zeros((x.size, n_funcs, n_funcs))
        if a != 0.0:
            f = basis_matrix(n_funcs, x, length)
            rows += a * np.einsum("xi,xm->xim", f, f)
        if b != 0.0:
            df = basis_derivative_matrix(n_funcs, x, length)
            rows += b * np.einsum("xi,xm->xim", df, df)
        return rows.reshape(x.size, n_funcs * n_funcs)

    flat = integrate(integrand, Interval(0.0, length), tol)
    return (4.0 / length**2) * flat.reshape(n_funcs, n_funcs)
