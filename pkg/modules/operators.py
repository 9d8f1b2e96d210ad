# Discrete differential and integral operators on the cell-centered grid
# Stencil operators take ghost-padded arrays (see fields.pad) and return interior arrays.
# Vertical integrals use the midpoint rule everywhere so that w(0) = -h div(vbar) holds exactly.
import numpy as np

from modules.fields import pad, W_RULES


def _window(a, axis, shift=0):
    """Interior window of a padded array, shifted by one cell along axis."""
    idx = [slice(1, -1)] * a.ndim
    idx[axis] = slice(1 + shift, a.shape[axis] - 1 + shift)
    return a[tuple(idx)]


def _centered(a, axis, d):
    return (_window(a, axis, 1) - _window(a, axis, -1)) / (2.0 * d)


def _second(a, axis, d):
    return (_window(a, axis, 1) - 2.0 * _window(a, axis) + _window(a, axis, -1)) / d**2


def grad_h(phi_p, grid):
    return _centered(phi_p, 0, grid.dx), _centered(phi_p, 1, grid.dy)


def div_h(u_p, v_p, grid):
    return _centered(u_p, 0, grid.dx) + _centered(v_p, 1, grid.dy)


def lap_h(phi_p, grid):
    return _second(phi_p, 0, grid.dx) + _second(phi_p, 1, grid.dy)


def ddz(phi_p, grid):
    return _centered(phi_p, 2, grid.dz)


def d2dz2(phi_p, grid):
    return _second(phi_p, 2, grid.dz)


def vertical_cumint(phi, grid):
    """Midpoint cumulative integral from the bottom to each cell center along the last axis."""
    return grid.dz * (np.cumsum(phi, axis=-1) - 0.5 * phi)


def vertical_cumint_faces(phi, grid):
    # face values; index 0 is z = -h (exactly 0), index Nz is the full-depth integral
    faces = np.zeros(phi.shape[:-1] + (phi.shape[-1] + 1,))
    faces[..., 1:] = grid.dz * np.cumsum(phi, axis=-1)
    return faces


def depth_average(phi, grid):
    return phi.sum(axis=-1) * (grid.dz / grid.h)


def fluctuation(phi, grid):
    return phi - depth_average(phi, grid)[..., None]


def broadcast_z(phi2, grid):
    return np.broadcast_to(phi2[..., None], phi2.shape + (grid.Nz,))


def diagnose_w(v1_p, v2_p, grid):
    """Vertical velocity from continuity: w = -int_{-h}^{z} div v."""
    return -vertical_cumint(div_h(v1_p, v2_p, grid), grid)


def pad_w(w):
    return pad(w, W_RULES)


def hydrostatic_pressure(T, p_s, grid):
    return p_s[..., None] - vertical_cumint(T, grid)


def inner(a, b, grid):
    # midpoint-rule L2 inner product over Omega (3D arrays) or M (2D arrays)
    weight = grid.cell_volume if a.ndim == 3 else grid.cell_area
    return float(np.sum(a * b)) * weight


def l2sq(a, grid):
    return inner(a, a, grid)
