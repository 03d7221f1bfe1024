"""Classical finite-difference reference for steady and implicit-Euler problems.

The three-point stencil -nu (y_{k-1} - 2 y_k + y_{k+1}) / dx^2 - zeta p_k y_k = f_k
is assembled row by row; ghost values are eliminated with the same
first-order relations as the variational objective.  Tridiagonal systems
go through ``scipy.linalg.solve_banded``; periodic systems (corner entries)
and anchored singular systems through a dense solve.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

from .objective import ProblemSpec, ghost_relation, is_singular


class SingularProblemError(ValueError):
    """The discrete operator is singular and no anchor was requested."""


def _tridiagonal(problem: ProblemSpec, shift: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(lower, diag, upper, rhs) of the interior system, without periodic corners."""
    n_p, dx, nu = problem.n_points, problem.dx, problem.nu
    c = nu / dx**2
    diag = np.full(n_p, 2 * c) - problem.zeta * problem.potential + shift
    off = np.full(n_p - 1, -c)
    rhs = problem.source.astype(float).copy()
    if not problem.boundary.periodic:
        a_l, b_l = ghost_relation(problem.boundary.left, "left", dx)
        a_r, b_r = ghost_relation(problem.boundary.right, "right", dx)
        # y_0 = a_l y_1 + b_l enters row 1 through -c y_0
        diag[0] -= c * a_l
        rhs[0] += c * b_l
        diag[-1] -= c * a_r
        rhs[-1] += c * b_r
    return off.copy(), diag, off, rhs


def _solve(problem: ProblemSpec, shift: float, extra_rhs: np.ndarray | None, anchor: bool) -> np.ndarray:
    lower, diag, upper, rhs = _tridiagonal(problem, shift)
    if extra_rhs is not None:
        rhs = rhs + extra_rhs
    n_p = problem.n_points
    singular = shift == 0.0 and is_singular(problem)
    if problem.boundary.periodic or singular:
        a = np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)
        if problem.boundary.periodic:
            c = problem.nu / problem.dx**2
            a[0, -1] -= c
            a[-1, 0] -= c
        if singular:
            if not anchor:
                raise SingularProblemError("operator is singular; pass anchor=True to pin the central mean")
            # replace the last equation (redundant for compatible data) by the
            # central zero crossing: mean of the two central samples = 0
            a[-1] = 0.0
            a[-1, n_p // 2 - 1] = a[-1, n_p // 2] = 0.5
            rhs = rhs.copy()
            rhs[-1] = 0.0
        return np.linalg.solve(a, rhs)
    ab = np.zeros((3, n_p))
    ab[0, 1:], ab[1], ab[2, :-1] = upper, diag, lower
    return solve_banded((1, 1), ab, rhs)


def fd_solve_steady(problem: ProblemSpec, anchor: bool = True) -> np.ndarray:
    """Interior samples of the steady solution (time step ignored)."""
    return _solve(problem, 0.0, None, anchor)


def fd_step_transient(problem: ProblemSpec, y_prev) -> np.ndarray:
    """One implicit Euler step: (A + I/dt) y = f~ + y_prev/dt."""
    if problem.dt is None or not problem.dt > 0:
        raise ValueError("transient step needs dt > 0")
    y_prev = np.asarray(y_prev, dtype=float)
    return _solve(problem, 1.0 / problem.dt, y_prev / problem.dt, anchor=False)


def fd_march(problem: ProblemSpec) -> np.ndarray:
    """(n_steps, N_p) array of implicit Euler solutions starting from ``initial``."""
    if problem.initial is None:
        raise ValueError("transient problem needs initial data")
    out, y = [], problem.initial
    for _ in range(problem.n_steps):
        y = fd_step_transient(problem, y)
        out.append(y)
    return np.array(out)


def anchor_central(y: np.ndarray) -> np.ndarray:
    """Shift y so the mean of its two central samples is zero."""
    y = np.asarray(y, dtype=float)
    m = len(y) // 2
    return y - 0.5 * (y[m - 1] + y[m])


def boundary_values(problem: ProblemSpec, y: np.ndarray) -> tuple[float, float]:
    """Ghost/boundary values (y_0, y_{N+1}) implied by the interior samples."""
    y = np.asarray(y, dtype=float)
    if problem.boundary.periodic:
        return float(y[-1]), float(y[0])
    a_l, b_l = ghost_relation(problem.boundary.left, "left", problem.dx)
    a_r, b_r = ghost_relation(problem.boundary.right, "right", problem.dx)
    return float(a_l * y[0] + b_l), float(a_r * y[-1] + b_r)


def with_boundary(problem: ProblemSpec, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Grid including the two boundary nodes and the matching samples."""
    y0, y1 = boundary_values(problem, y)
    dx = problem.dx
    x = np.concatenate([[problem.x[0] - dx], problem.x, [problem.x[-1] + dx]])
    return x, np.concatenate([[y0], y, [y1]])
