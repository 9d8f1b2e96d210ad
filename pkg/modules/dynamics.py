# Right-hand sides of the pressure-eliminated momentum and temperature equations
# and the barotropic/baroclinic split audit
from dataclasses import dataclass

import numpy as np

from modules.fields import (pad, apply_bcs_velocity, apply_bcs_temperature,
                            V1_RULES, V2_RULES, SCALAR_RULES, SCALAR2_RULES, VELOCITY2_RULES)
from modules.operators import (_window, _centered, grad_h, lap_h, d2dz2, vertical_cumint,
                               depth_average, fluctuation, broadcast_z, diagnose_w, pad_w, l2sq)


@dataclass
class Tendency:
    dv1: np.ndarray
    dv2: np.ndarray
    dT: np.ndarray


@dataclass
class MomentumTerms:
    """Individual contributions to dv/dt; each entry is a (component 1, component 2) pair."""
    advection: tuple
    surface_pressure: tuple
    baroclinic: tuple
    coriolis: tuple
    viscous: tuple

    @property
    def total(self):
        parts = (self.advection, self.surface_pressure, self.baroclinic, self.coriolis, self.viscous)
        return (sum(p[0] for p in parts), sum(p[1] for p in parts))


def transport_h(a1_p, a2_p, phi_p, grid):
    """Skew-symmetric horizontal transport of phi by (a1, a2): 1/2 a.grad(phi) + 1/2 div(a phi)."""
    a1 = _window(a1_p, 0)
    a2 = _window(a2_p, 0)
    advective = a1 * _centered(phi_p, 0, grid.dx) + a2 * _centered(phi_p, 1, grid.dy)
    conservative = _centered(a1_p * phi_p, 0, grid.dx) + _centered(a2_p * phi_p, 1, grid.dy)
    return 0.5 * (advective + conservative)


def transport_z(w_p, phi_p, grid):
    w = _window(w_p, 0)
    return 0.5 * (w * _centered(phi_p, 2, grid.dz) + _centered(w_p * phi_p, 2, grid.dz))


def advect(v1_p, v2_p, w_p, phi_p, grid):
    """Skew-symmetric transport by (v1, v2, w); <advect(v, w, phi), phi> = 0 for wall-tangent v and w = 0 on top and bottom."""
    return transport_h(v1_p, v2_p, phi_p, grid) + transport_z(w_p, phi_p, grid)


def coriolis(v1, v2, f0, beta, grid):
    # f k x v with f = f0 (beta + y); pointwise orthogonal to v
    f = f0 * (beta + grid.y)
    f = f[None, :, None] if v1.ndim == 3 else f[None, :]
    return -f * v2, f * v1


def baroclinic_pressure_grad(T, grid):
    """Gradient of the temperature part of the hydrostatic pressure, -grad int_{-h}^{z} T."""
    gx, gy = grad_h(pad(vertical_cumint(T, grid), SCALAR_RULES), grid)
    return -gx, -gy


def _surface_pressure_term(p_s, grid):
    gx, gy = grad_h(pad(p_s, SCALAR2_RULES), grid)
    return (-np.broadcast_to(gx[..., None], grid.shape), -np.broadcast_to(gy[..., None], grid.shape))


def momentum_terms(state, params, p_s, grid, ghosts=None):
    v1_p, v2_p = apply_bcs_velocity(state, grid) if ghosts is None else ghosts
    w_p = pad_w(diagnose_w(v1_p, v2_p, grid))
    advection = (-advect(v1_p, v2_p, w_p, v1_p, grid), -advect(v1_p, v2_p, w_p, v2_p, grid))
    if p_s is None:
        p_s = np.zeros(grid.shape2)
    bx, by = baroclinic_pressure_grad(state.T, grid)
    cx, cy = coriolis(state.v1, state.v2, params.f0, params.beta, grid)
    viscous = tuple(lap_h(p, grid) / params.Re1 + d2dz2(p, grid) / params.Re2 for p in (v1_p, v2_p))
    return MomentumTerms(advection=advection,
                         surface_pressure=_surface_pressure_term(p_s, grid),
                         baroclinic=(-bx, -by),
                         coriolis=(-cx, -cy),
                         viscous=viscous)


def rhs_velocity(state, params, p_s, grid):
    """dv/dt = -advect - grad p_s + grad int T - f k x v - L1 v, with every term kept for diagnostics."""
    return momentum_terms(state, params, p_s, grid)


def temperature_dissipation(T_p, params, grid):
    # L2 T; the Robin surface condition enters through the ghost layer of T_p
    return -lap_h(T_p, grid) / params.Rt1 - d2dz2(T_p, grid) / params.Rt2


def rhs_temperature(state, params, forcing, grid):
    v1_p, v2_p = apply_bcs_velocity(state, grid)
    w_p = pad_w(diagnose_w(v1_p, v2_p, grid))
    T_p = apply_bcs_temperature(state, params, grid)
    return forcing.Q - advect(v1_p, v2_p, w_p, T_p, grid) - temperature_dissipation(T_p, params, grid)


@dataclass(frozen=True)
class SplitResidual:
    barotropic: float
    baroclinic: float
    scale: float

    @property
    def relative(self):
        if self.scale == 0.0:
            return max(self.barotropic, self.baroclinic)
        return max(self.barotropic, self.baroclinic) / self.scale


def split_residual_check(state, params, p_s, grid):
    """Compare the depth mean and the fluctuation of rhs_velocity with the barotropic
    and baroclinic equations assembled directly from vbar and vtilde.

    The advective pieces use the bilinear transports, so the depth mean of the
    full transport is transport_h(vbar, vbar) + mean[transport_h(vt, vt) + transport_z(w, vt)].
    """
    dv1, dv2 = rhs_velocity(state, params, p_s, grid).total
    if p_s is None:
        p_s = np.zeros(grid.shape2)
    vb = (depth_average(state.v1, grid), depth_average(state.v2, grid))
    vt = (fluctuation(state.v1, grid), fluctuation(state.v2, grid))
    vb_p = (pad(np.array(broadcast_z(vb[0], grid)), V1_RULES), pad(np.array(broadcast_z(vb[1], grid)), V2_RULES))
    vt_p = (pad(vt[0], V1_RULES), pad(vt[1], V2_RULES))
    # w is linear in v: barotropic part plus fluctuation part
    w_p = pad_w(diagnose_w(*vb_p, grid) + diagnose_w(*vt_p, grid))

    cumT = vertical_cumint(state.T, grid)
    mean_cumT = depth_average(cumT, grid)
    gmx, gmy = grad_h(pad(mean_cumT, SCALAR2_RULES), grid)
    gpx, gpy = grad_h(pad(p_s, SCALAR2_RULES), grid)
    gfx, gfy = grad_h(pad(cumT - mean_cumT[..., None], SCALAR_RULES), grid)
    fb = coriolis(vb[0], vb[1], params.f0, params.beta, grid)
    ft = coriolis(vt[0], vt[1], params.f0, params.beta, grid)
    bar_rules = VELOCITY2_RULES

    bar_res = []
    tilde_res = []
    for c in range(2):
        self_bar = transport_h(*vb_p, vb_p[c], grid)[..., 0]
        self_tilde = transport_h(*vt_p, vt_p[c], grid) + transport_z(w_p, vt_p[c], grid)
        eq1 = (-self_bar - depth_average(self_tilde, grid) - fb[c]
               - (gpx, gpy)[c] + (gmx, gmy)[c]
               + lap_h(pad(vb[c], bar_rules[c]), grid) / params.Re1)
        cross = (transport_h(*vt_p, vb_p[c], grid) + transport_h(*vb_p, vt_p[c], grid)
                 + transport_z(w_p, vb_p[c], grid))
        eq4 = (-(self_tilde + cross) + depth_average(self_tilde, grid)[..., None] - ft[c]
               + (gfx, gfy)[c]
               + lap_h(vt_p[c], grid) / params.Re1 + d2dz2(vt_p[c], grid) / params.Re2)
        total = (dv1, dv2)[c]
        bar_res.append(depth_average(total, grid) - eq1)
        tilde_res.append(fluctuation(total, grid) - eq4)

    scale = np.sqrt(l2sq(dv1, grid) + l2sq(dv2, grid))
    return SplitResidual(barotropic=float(np.sqrt(sum(l2sq(r, grid) for r in bar_res))),
                         baroclinic=float(np.sqrt(sum(l2sq(r, grid) for r in tilde_res))),
                         scale=float(scale))
