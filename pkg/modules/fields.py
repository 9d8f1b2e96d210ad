# Prognostic state, physical parameters, heat forcing and ghost-cell boundary conditions
# Boundary conditions are reflection factors: ghost = factor * adjacent interior, per axis and side
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from modules.errors import ConfigError

EVEN = (1.0, 1.0)
ODD = (-1.0, -1.0)

# (x, y, z) factors; z low side is the bottom z = -h, high side the surface z = 0
V1_RULES = (ODD, EVEN, EVEN)
V2_RULES = (EVEN, ODD, EVEN)
SCALAR_RULES = (EVEN, EVEN, EVEN)
SCALAR2_RULES = (EVEN, EVEN)
VELOCITY2_RULES = ((ODD, EVEN), (EVEN, ODD))
W_RULES = (EVEN, EVEN, ODD)


@dataclass
class State:
    v1: np.ndarray
    v2: np.ndarray
    T: np.ndarray
    t: float = 0.0

    @classmethod
    def rest(cls, grid, t=0.0):
        return cls(np.zeros(grid.shape), np.zeros(grid.shape), np.zeros(grid.shape), t)

    def copy(self):
        return State(self.v1.copy(), self.v2.copy(), self.T.copy(), self.t)

    def is_finite(self):
        return bool(np.isfinite(self.v1).all() and np.isfinite(self.v2).all() and np.isfinite(self.T).all())

    def check_shape(self, grid):
        for name in ("v1", "v2", "T"):
            if getattr(self, name).shape != grid.shape:
                raise ConfigError(f"state field {name} has shape {getattr(self, name).shape}, grid is {grid.shape}", key=name)


@dataclass(frozen=True)
class Params:
    Re1: float = 1.0
    Re2: float = 1.0
    Rt1: float = 1.0
    Rt2: float = 1.0
    f0: float = 0.0
    beta: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        for name in ("Re1", "Re2", "Rt1", "Rt2", "alpha"):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}", key=name)
        for name in ("f0", "beta"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite", key=name)

    def coriolis_parameter(self, y):
        return self.f0 * (self.beta + y)


@dataclass(frozen=True)
class Forcing:
    """Static heat source Q; wind stress and surface temperature are held at zero."""
    Q: np.ndarray
    tau: float = 0.0
    Tstar: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.Q).all():
            raise ConfigError("heat source Q has non-finite entries", key="forcing")
        if self.tau != 0.0 or self.Tstar != 0.0:
            raise ConfigError("only tau = 0 and T* = 0 are supported", key="forcing")

    @classmethod
    def zero(cls, grid):
        return cls(np.zeros(grid.shape))

    @classmethod
    def mode(cls, grid, amplitude=1.0):
        x, y, z = grid.mesh()
        Q = amplitude * np.cos(np.pi * x / grid.Lx) * np.cos(np.pi * y / grid.Ly) * np.cos(np.pi * (z + grid.h) / grid.h)
        return cls(np.broadcast_to(Q, grid.shape).copy())


def robin_factor(alpha, dz):
    # ghost/interior ratio that makes (dT/dz + alpha T) vanish on the surface face
    return (1.0 - 0.5 * alpha * dz) / (1.0 + 0.5 * alpha * dz)


def temperature_rules(alpha, grid):
    return (EVEN, EVEN, (1.0, robin_factor(alpha, grid.dz)))


def pad(a, rules):
    """Add one ghost layer on every axis of a; ghost = factor * adjacent interior.

    Axes are filled in order, so edges and corners take the product of the
    factors, which is what reflecting an already reflected row gives.
    """
    out = a
    for axis, (lo, hi) in enumerate(rules):
        width = [(0, 0)] * out.ndim
        width[axis] = (1, 1)
        out = np.pad(out, width, mode="edge")
        first = [slice(None)] * out.ndim
        last = [slice(None)] * out.ndim
        first[axis] = 0
        last[axis] = -1
        if lo != 1.0:
            out[tuple(first)] *= lo
        if hi != 1.0:
            out[tuple(last)] *= hi
    return out


def apply_bcs_velocity(state, grid):
    state.check_shape(grid)
    return pad(state.v1, V1_RULES), pad(state.v2, V2_RULES)


def apply_bcs_temperature(state, params, grid):
    state.check_shape(grid)
    return pad(state.T, temperature_rules(params.alpha, grid))


def robin_wavenumbers(alpha, h, count):
    """First roots mu of mu*tan(mu*h) = alpha: cos(mu(z+h)) then meets dT/dz + alpha T = 0 at z=0 and dT/dz = 0 at z=-h."""
    # with theta = n pi + s, solve (n pi + s) sin s = alpha h cos s on s in [0, pi/2]:
    # the ends have signs -alpha h and +(n + 1/2) pi, with no pole in between
    ah = alpha * h
    roots = []
    for n in range(count):
        s = brentq(lambda s: (n * np.pi + s) * np.sin(s) - ah * np.cos(s), 0.0, 0.5 * np.pi,
                   xtol=np.finfo(float).tiny, maxiter=1000)
        roots.append((n * np.pi + s) / h)
    return np.array(roots)


def make_smooth_state(grid, seed, alpha=1.0, amplitude=1.0, modes=3):
    """Random low-wavenumber state built from bases that satisfy every wall condition analytically."""
    rng = np.random.default_rng(seed)
    x, y, z = grid.mesh()
    kx = np.pi / grid.Lx
    ky = np.pi / grid.Ly
    kz = np.pi / grid.h
    mus = robin_wavenumbers(alpha, grid.h, modes)
    v1 = np.zeros(grid.shape)
    v2 = np.zeros(grid.shape)
    T = np.zeros(grid.shape)
    for m in range(modes):
        for n in range(modes):
            for l in range(modes):
                weight = 1.0 / (1.0 + m * m + n * n + l * l)
                a, b, c = rng.standard_normal(3) * weight
                cz = np.cos(l * kz * (z + grid.h))
                v1 = v1 + a * np.sin((m + 1) * kx * x) * np.cos(n * ky * y) * cz
                v2 = v2 + b * np.cos(m * kx * x) * np.sin((n + 1) * ky * y) * cz
                T = T + c * np.cos(m * kx * x) * np.cos(n * ky * y) * np.cos(mus[l] * (z + grid.h))
    return State(amplitude * v1, amplitude * v2, amplitude * T, 0.0)


def make_mode_state(grid, alpha=1.0, amplitude=1.0):
    """Single lowest mode in every field; the depth mean of v vanishes."""
    x, y, z = grid.mesh()
    Z = z + grid.h
    cz = np.cos(np.pi * Z / grid.h)
    mu = robin_wavenumbers(alpha, grid.h, 1)[0]
    v1 = np.sin(np.pi * x / grid.Lx) * np.cos(np.pi * y / grid.Ly) * cz
    v2 = np.cos(np.pi * x / grid.Lx) * np.sin(np.pi * y / grid.Ly) * cz
    T = np.cos(np.pi * x / grid.Lx) * np.cos(np.pi * y / grid.Ly) * np.cos(mu * Z)
    return State(*(amplitude * np.broadcast_to(f, grid.shape).copy() for f in (v1, v2, T)), 0.0)
