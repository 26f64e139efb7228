"""Damped Newton solver for the small nonlinear systems in the M-steps.

The systems are at most three-dimensional, with residuals built from digamma
sums. Jacobians are approximated by forward differences; a step-halving line
search on the residual 2-norm keeps iterates from overshooting. Callers
enforce parameter positivity by handing the solver log-coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SolverError(RuntimeError):
    """Raised when Newton iteration cannot make progress (singular Jacobian
    with damping exhausted, or non-finite residuals)."""


@dataclass(frozen=True)
class SolveOptions:
    """Tolerances and limits for :func:`solve_system`.

    residual_tol bounds the 2-norm of the residual at an accepted root;
    fd_step scales the forward-difference perturbation; min_damping is the
    smallest line-search step factor tried before giving up.
    """

    residual_tol: float = 1e-10
    max_iters: int = 200
    fd_step: float = 1e-6
    min_damping: float = 1e-8

    def __post_init__(self) -> None:
        if self.residual_tol <= 0 or self.fd_step <= 0 or self.min_damping <= 0:
            raise ValueError("SolveOptions fields must all be positive")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class SolveReport:
    """Outcome of a solve: the final iterate, its residual norm, and status."""

    root: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool


def _fd_jacobian(residual_fn, x: np.ndarray, f: np.ndarray, step: float) -> np.ndarray:
    n = x.size
    jac = np.empty((n, n))
    for j in range(n):
        h = step * max(1.0, abs(x[j]))
        xp = x.copy()
        xp[j] += h
        fp = np.asarray(residual_fn(xp), dtype=float)
        jac[:, j] = (fp - f) / h
    return jac


def solve_system(residual_fn, x0, opts: SolveOptions = SolveOptions()) -> SolveReport:
    """Find a root of ``residual_fn`` near ``x0`` by damped Newton iteration.

    Parameters
    ----------
    residual_fn : callable
        Maps a length-k vector to a length-k residual vector.
    x0 : array_like
        Finite starting point.
    opts : SolveOptions
        Stopping and damping controls.

    Returns
    -------
    SolveReport
        ``converged`` is True only when the residual 2-norm at the root is
        at most ``opts.residual_tol``. Hitting ``max_iters`` returns a
        non-converged report rather than raising.

    Raises
    ------
    SolverError
        If the residual is non-finite at the start, or a Newton step cannot
        reduce the residual even at the smallest damping factor (which also
        covers effectively singular Jacobians).
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    if not np.all(np.isfinite(x)):
        raise SolverError(f"starting point is not finite: {x!r}")
    # Probing extreme iterates may overflow inside residual_fn; non-finite
    # results are rejected below, so the warnings are only noise.
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        f = np.atleast_1d(np.asarray(residual_fn(x), dtype=float))
        if f.shape != x.shape:
            raise SolverError(
                f"residual_fn must preserve dimension: got {f.shape} for input {x.shape}"
            )
        if not np.all(np.isfinite(f)):
            raise SolverError("residual is not finite at the starting point")
        norm = float(np.linalg.norm(f))

        for iteration in range(1, int(opts.max_iters) + 1):
            if norm <= opts.residual_tol:
                return SolveReport(root=x, residual_norm=norm, iterations=iteration - 1, converged=True)

            jac = _fd_jacobian(residual_fn, x, f, opts.fd_step)
            try:
                step = np.linalg.solve(jac, -f)
            except np.linalg.LinAlgError:
                # Nearly singular: fall back to the least-squares direction.
                step, *_ = np.linalg.lstsq(jac, -f, rcond=None)
            if not np.all(np.isfinite(step)):
                raise SolverError(
                    f"Newton direction is not finite at iteration {iteration} (singular Jacobian)"
                )

            damping = 1.0
            accepted = False
            while damping >= opts.min_damping:
                x_new = x + damping * step
                f_new = np.atleast_1d(np.asarray(residual_fn(x_new), dtype=float))
                if np.all(np.isfinite(f_new)):
                    norm_new = float(np.linalg.norm(f_new))
                    if norm_new < norm or norm_new <= opts.residual_tol:
                        x, f, norm = x_new, f_new, norm_new
                        accepted = True
                        break
                damping *= 0.5
            if not accepted:
                raise SolverError(
                    f"no residual decrease at iteration {iteration} with damping down to "
                    f"{opts.min_damping:g} (residual norm {norm:.3e})"
                )

    return SolveReport(root=x, residual_norm=norm, iterations=int(opts.max_iters), converged=norm <= opts.residual_tol)


def ascend_potential(potential_fn, gradient_fn, x0, opts: SolveOptions = SolveOptions(), step_cap: float = 1.0):
    """Maximize a smooth scalar potential by damped Newton ascent.

    The M-step stationarity residuals form a gradient field, and the
    residual-norm line search in :func:`solve_system` can wander into flat
    ridges where the norm keeps shrinking toward a positive infimum (the
    Poisson limit of the count model, the exponential limit of the Pareto).
    Following the potential uphill instead cannot leave the basin of an
    interior maximizer, so this is the recovery path when the root-finder
    strays. Directions come from the forward-difference Hessian (the Jacobian
    of ``gradient_fn``); when that direction is not an ascent direction the
    raw gradient is used, and every step is capped at ``step_cap`` in
    max-norm before backtracking.

    Returns ``(x, gradient_norm, improved)`` where ``improved`` says whether
    any uphill step was taken. Stops when the gradient max-norm falls to
    ``opts.residual_tol`` or no damped step improves the potential.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        phi = float(potential_fn(x))
        if not np.isfinite(phi):
            raise SolverError(f"potential is not finite at the starting point {x!r}")
        improved = False
        g = np.atleast_1d(np.asarray(gradient_fn(x), dtype=float))
        for _ in range(int(opts.max_iters)):
            gnorm = float(np.max(np.abs(g)))
            if not np.isfinite(gnorm) or gnorm <= opts.residual_tol:
                break
            hess = _fd_jacobian(gradient_fn, x, g, opts.fd_step)
            hess = 0.5 * (hess + hess.T)
            try:
                direction = np.linalg.solve(hess, -g)
            except np.linalg.LinAlgError:
                direction = g.copy()
            if not np.all(np.isfinite(direction)) or float(direction @ g) <= 0.0:
                direction = g.copy()
            largest = float(np.max(np.abs(direction)))
            if largest > step_cap:
                direction = direction * (step_cap / largest)
            damping = 1.0
            accepted = False
            while damping >= opts.min_damping:
                x_new = x + damping * direction
                phi_new = float(potential_fn(x_new))
                if np.isfinite(phi_new) and phi_new > phi:
                    x, phi = x_new, phi_new
                    accepted = improved = True
                    break
                damping *= 0.5
            if not accepted:
                break
            g = np.atleast_1d(np.asarray(gradient_fn(x), dtype=float))
    return x, float(np.max(np.abs(g))), improved
