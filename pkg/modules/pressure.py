# Surface pressure recovery: a 2D Neumann Poisson solve that removes the
# divergence of the depth-averaged velocity tendency (projection method)
from dataclasses import dataclass

import numpy as np

from modules.errors import ConvergenceError, SolvabilityError
from modules.fields import State, pad, SCALAR2_RULES, VELOCITY2_RULES
from modules.log import logger
from modules.operators import grad_h, div_h, depth_average
import modules.settings as my_settings

SOLVABILITY_RTOL = 1e-10


@dataclass(frozen=True)
class PoissonProblem:
    rhs: np.ndarray
    tolerance: float = 1e-10
    max_iterations: int = 20000


def surface_gradient(p_s, grid):
    return grad_h(pad(p_s, SCALAR2_RULES), grid)


def depth_mean_divergence(a1, a2, grid):
    """div_h of a 2D horizontal vector field with the barotropic wall rules."""
    rx, ry = VELOCITY2_RULES
    return div_h(pad(a1, rx), pad(a2, ry), grid)


def neumann_laplacian(phi, grid):
    # div_h(grad_h(phi)) with even scalar ghosts and odd normal-velocity ghosts;
    # the projection below is exact for this operator
    gx, gy = surface_gradient(phi, grid)
    return depth_mean_divergence(gx, gy, grid)


def _rms(a):
    return float(np.sqrt(np.mean(a * a)))


def solve_neumann_poisson(problem, grid):
    """Conjugate gradient on -neumann_laplacian, restricted to mean-zero fields.

    Returns the mean-zero phi with ||lap phi - rhs|| <= tolerance ||rhs||.
    """
    b = np.asarray(problem.rhs, dtype=float)
    b_norm = _rms(b)
    if b_norm == 0.0:
        return np.zeros(grid.shape2)
    if abs(b.mean()) > SOLVABILITY_RTOL * b_norm:
        raise SolvabilityError(f"Neumann right-hand side has mean {b.mean():.3e} (rms {b_norm:.3e})")
    b = b - b.mean()

    def apply(p):
        return -neumann_laplacian(p, grid)

    x = np.zeros(grid.shape2)
    target = problem.tolerance * b_norm
    iterations = 0
    # restart from the true residual if the recurrence drifted below it
    while True:
        r = -b - apply(x)
        r -= r.mean()
        res = _rms(r)
        if res <= target:
            break
        if iterations >= problem.max_iterations:
            raise ConvergenceError("Pressure: Neumann Poisson solve did not converge", res / b_norm, iterations)
        d = r.copy()
        rr = np.sum(r * r)
        while iterations < problem.max_iterations:
            Ad = apply(d)
            step = rr / np.sum(d * Ad)
            x += step * d
            r -= step * Ad
            r -= r.mean()
            iterations += 1
            rr_new = np.sum(r * r)
            if not np.isfinite(rr_new):
                raise ConvergenceError("Pressure: CG residual is not finite", float("nan"), iterations)
            if np.sqrt(rr_new / r.size) <= target:
                break
            d = r + (rr_new / rr) * d
            rr = rr_new
    x -= x.mean()
    logger.debug(f"Pressure: CG converged in {iterations} iterations, residual {res / b_norm:.2e}")
    return x


def project_step(tendency, grid, tolerance=None, max_iterations=None):
    """Remove the gradient part of the depth-averaged tendency.

    Returns the projected (dv1, dv2) and the surface pressure p_s (mean zero).
    """
    tolerance = my_settings.poisson_tol if tolerance is None else tolerance
    max_iterations = my_settings.poisson_max_iter if max_iterations is None else max_iterations
    dv1, dv2 = tendency
    if not (np.isfinite(dv1).all() and np.isfinite(dv2).all()):
        raise ConvergenceError("Pressure: tendency is not finite", float("nan"), 0)
    rhs = depth_mean_divergence(depth_average(dv1, grid), depth_average(dv2, grid), grid)
    # the divergence telescopes to a zero sum; any mean left is rounding
    rhs = rhs - rhs.mean()
    p_s = solve_neumann_poisson(PoissonProblem(rhs, tolerance, max_iterations), grid)
    gx, gy = surface_gradient(p_s, grid)
    return (dv1 - gx[..., None], dv2 - gy[..., None]), p_s


def project_velocity(state, grid, tolerance=None):
    """Copy of state whose depth-averaged velocity is discretely divergence free."""
    (v1, v2), _ = project_step((state.v1, state.v2), grid, tolerance)
    return State(v1, v2, state.T.copy(), state.t)


def barotropic_divergence(v1, v2, grid):
    return depth_mean_divergence(depth_average(v1, grid), depth_average(v2, grid), grid)
