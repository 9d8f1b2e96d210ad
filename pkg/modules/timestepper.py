# Explicit SSP-RK3 time integration with CFL control and a projection at every stage
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from modules.dynamics import Tendency, momentum_terms, rhs_temperature
from modules.errors import BlowUpError, ConfigError, ConvergenceError
from modules.fields import State, apply_bcs_velocity
from modules.log import logger, getPrettyTime
from modules.operators import diagnose_w
from modules.pressure import project_step


@dataclass(frozen=True)
class StepControl:
    t_end: float
    dt: float = 0.0  # 0 selects the CFL step every step
    cfl_adv: float = 0.5
    cfl_diff: float = 0.25

    def __post_init__(self):
        for name in ("cfl_adv", "cfl_diff"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {value}", key=name)
        if self.dt < 0 or not np.isfinite(self.dt):
            raise ConfigError(f"dt must be positive (or 0 for CFL), got {self.dt}", key="dt")
        if self.t_end < 0 or not np.isfinite(self.t_end):
            raise ConfigError(f"t_end must be >= 0, got {self.t_end}", key="t_end")


@dataclass
class Observer:
    """Callback run on (step, state) every `every` steps, at step 0 and at the final step."""
    callback: Callable
    every: int = 1
    flush: Optional[Callable] = None

    def __post_init__(self):
        if int(self.every) != self.every or self.every < 1:
            raise ConfigError(f"observer cadence must be a positive integer, got {self.every}", key="every")

    def due(self, step):
        return step % self.every == 0


def max_speed(state, grid):
    v1_p, v2_p = apply_bcs_velocity(state, grid)
    w = diagnose_w(v1_p, v2_p, grid)
    return float(max(np.abs(state.v1).max(), np.abs(state.v2).max(), np.abs(w).max()))


def diffusive_dt(params, grid, cfl_diff):
    products = (params.Re1 * grid.dx**2, params.Re1 * grid.dy**2, params.Re2 * grid.dz**2,
                params.Rt1 * grid.dx**2, params.Rt1 * grid.dy**2, params.Rt2 * grid.dz**2)
    return cfl_diff * min(products) / 2.0


def stable_dt(state, params, grid, control):
    dt = diffusive_dt(params, grid, control.cfl_diff)
    speed = max_speed(state, grid)
    if speed > 0.0:
        dt = min(dt, control.cfl_adv * min(grid.dx, grid.dy, grid.dz) / speed)
    return min(dt, max(control.t_end - state.t, 0.0))


def evaluate_tendency(state, params, forcing, grid, tolerance=None, source=None):
    """Fill ghosts, diagnose w, assemble both tendencies and project the momentum one.

    source(t), when given, returns an extra Tendency added before the projection.
    Returns the Tendency and the surface pressure p_s it implies.
    """
    ghosts = apply_bcs_velocity(state, grid)
    dv1, dv2 = momentum_terms(state, params, None, grid, ghosts=ghosts).total
    dT = rhs_temperature(state, params, forcing, grid)
    if source is not None:
        extra = source(state.t)
        dv1, dv2, dT = dv1 + extra.dv1, dv2 + extra.dv2, dT + extra.dT
    (dv1, dv2), p_s = project_step((dv1, dv2), grid, tolerance)
    return Tendency(dv1, dv2, dT), p_s


def surface_fields(state, params, forcing, grid, tolerance=None):
    """p_s and w belonging to state, for snapshots."""
    _, p_s = evaluate_tendency(state, params, forcing, grid, tolerance)
    v1_p, v2_p = apply_bcs_velocity(state, grid)
    return p_s, diagnose_w(v1_p, v2_p, grid)


def _combine(a, b, ca, cb, k, ck, t):
    # ca*a + cb*(b + ck*k) for every prognostic field
    return State(ca * a.v1 + cb * (b.v1 + ck * k.dv1),
                 ca * a.v2 + cb * (b.v2 + ck * k.dv2),
                 ca * a.T + cb * (b.T + ck * k.dT),
                 t)


def _stage_diagnostics(stage, state, dt):
    with np.errstate(invalid="ignore"):
        return {"stage": stage, "t": state.t, "dt": dt,
                "max_v1": float(np.nanmax(np.abs(state.v1))) if state.v1.size else 0.0,
                "max_v2": float(np.nanmax(np.abs(state.v2))) if state.v2.size else 0.0,
                "max_T": float(np.nanmax(np.abs(state.T))) if state.T.size else 0.0,
                "nonfinite": int(np.size(state.v1) * 3 - sum(np.isfinite(f).sum() for f in (state.v1, state.v2, state.T)))}


def step_ssprk3(state, params, forcing, grid, dt, tolerance=None, source=None):
    """One Shu-Osher SSP-RK3 step; each stage evaluates a projected tendency."""
    # (weight of the step start, weight of the stage update, time of the stage result)
    stages = ((0.0, 1.0, 1.0), (0.75, 0.25, 0.5), (1.0 / 3.0, 2.0 / 3.0, 1.0))
    current = state
    for number, (c_old, c_new, c_time) in enumerate(stages, start=1):
        try:
            k, _ = evaluate_tendency(current, params, forcing, grid, tolerance, source)
        except ConvergenceError as e:
            if np.isfinite(e.residual):
                raise
            raise BlowUpError(f"Stepper: pressure solve broke down in stage {number}", _stage_diagnostics(number, current, dt)) from e
        with np.errstate(over="ignore", invalid="ignore"):
            current = _combine(state, current, c_old, c_new, k, dt, state.t + c_time * dt)
        if not current.is_finite():
            raise BlowUpError(f"Stepper: non-finite values after stage {number} at t={state.t:.6g}",
                              _stage_diagnostics(number, current, dt))
    current.t = state.t + dt
    return current


def integrate(state, params, forcing, grid, control, observers=(), tolerance=None, source=None):
    """Advance state to control.t_end; observers see step 0, their cadence and the last step.

    Observers are flushed even when a step raises.
    """
    observers = list(observers)
    current = state.copy()
    step = 0
    started = time.monotonic()
    fixed_limit_warned = False
    try:
        for obs in observers:
            obs.callback(step, current)
        while current.t < control.t_end:
            if control.dt > 0:
                dt = min(control.dt, control.t_end - current.t)
                if not fixed_limit_warned and dt > stable_dt(current, params, grid, control) * (1 + 1e-12):
                    logger.warning(f"Stepper: fixed dt={dt:.4g} exceeds the CFL estimate")
                    fixed_limit_warned = True
            else:
                dt = stable_dt(current, params, grid, control)
            if dt <= 0.0:
                break
            # land exactly on t_end
            landing = control.t_end - (current.t + dt) <= 1e-12 * max(control.t_end, 1.0)
            if landing:
                dt = control.t_end - current.t
            current = step_ssprk3(current, params, forcing, grid, dt, tolerance, source)
            step += 1
            final = landing or current.t >= control.t_end
            if final:
                current.t = control.t_end
            for obs in observers:
                if obs.due(step) or final:
                    obs.callback(step, current)
            if step % 100 == 0:
                logger.debug(f"Stepper: step {step} t={current.t:.6g} dt={dt:.3e}")
    except BlowUpError as e:
        logger.error(f"Stepper: blow-up after step {step}: {e.diagnostics}")
        raise
    finally:
        for obs in observers:
            if obs.flush is not None:
                obs.flush()
    logger.info(f"Stepper: reached t={current.t:.6g} in {step} steps ({getPrettyTime(time.monotonic() - started)})")
    return current
