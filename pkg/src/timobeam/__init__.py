"""Solver library for the nonlinear dynamic Timoshenko beam system.

Combines a symmetric three-layer time-stepping scheme (the nonlinear term is
frozen at the middle layer, so every step is linear and splits into two
independent solves) with a Legendre-Galerkin spectral discretization whose
trial functions vanish at the endpoints and lead to banded, parity-decoupled
linear systems.  A finite-dimensional matrix realization of the underlying
abstract scheme is included for invariant verification.
"""

__version__ = "0.1.0"
