# Cylindrical domain Omega = M x (-h, 0) with a rectangular cross-section M,
# its cell-centered grid and the domain constants used by the bound certificates
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from modules.errors import ConfigError, NumericalError
from modules.log import logger
import modules.settings as my_settings

MIN_CELLS = 4


@dataclass(frozen=True)
class Domain:
    Lx: float
    Ly: float
    h: float


@dataclass(frozen=True)
class Grid:
    """Cell-centered collocated grid; one ghost layer per face is added by the fill rules.

    Arrays are indexed [i, j, k] with i along x, j along y and k along z,
    k = 0 being the cell next to the bottom z = -h.
    """
    Lx: float
    Ly: float
    h: float
    Nx: int
    Ny: int
    Nz: int

    @property
    def dx(self):
        return self.Lx / self.Nx

    @property
    def dy(self):
        return self.Ly / self.Ny

    @property
    def dz(self):
        return self.h / self.Nz

    @property
    def shape(self):
        return (self.Nx, self.Ny, self.Nz)

    @property
    def shape2(self):
        return (self.Nx, self.Ny)

    @property
    def cell_volume(self):
        return self.dx * self.dy * self.dz

    @property
    def cell_area(self):
        return self.dx * self.dy

    @cached_property
    def x(self):
        return (np.arange(self.Nx) + 0.5) * self.dx

    @cached_property
    def y(self):
        return (np.arange(self.Ny) + 0.5) * self.dy

    @cached_property
    def z(self):
        return -self.h + (np.arange(self.Nz) + 0.5) * self.dz

    def mesh(self):
        # broadcastable 3D coordinates (Nx,1,1), (1,Ny,1), (1,1,Nz)
        return (self.x[:, None, None], self.y[None, :, None], self.z[None, None, :])

    def mesh2(self):
        return (self.x[:, None], self.y[None, :])


@dataclass(frozen=True)
class DomainConstants:
    C_M: float
    volume: float
    area: float


def build_domain(Lx, Ly, h, Nx, Ny, Nz):
    for name, value in (("Lx", Lx), ("Ly", Ly), ("h", h)):
        if not np.isfinite(value) or value <= 0:
            raise ConfigError(f"extent {name} must be positive, got {value}", key=name)
    for name, value in (("Nx", Nx), ("Ny", Ny), ("Nz", Nz)):
        if int(value) != value or value < MIN_CELLS:
            raise ConfigError(f"cell count {name} must be an integer >= {MIN_CELLS}, got {value}", key=name)
    domain = Domain(float(Lx), float(Ly), float(h))
    grid = Grid(float(Lx), float(Ly), float(h), int(Nx), int(Ny), int(Nz))
    logger.debug(f"System: Grid {grid.Nx}x{grid.Ny}x{grid.Nz} dx={grid.dx:.4g} dy={grid.dy:.4g} dz={grid.dz:.4g}")
    return domain, grid


def second_difference_1d(n, d, lo, hi):
    """Compact 3-point second difference with ghost = factor * adjacent interior at each end."""
    main = np.full(n, -2.0)
    main[0] += lo
    main[-1] += hi
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / d**2


# wall reflection factors (x-walls, y-walls) per velocity component
VELOCITY_PROFILES = {
    "v1": (-1.0, 1.0),  # v1 = 0 on x-walls, free on y-walls
    "v2": (1.0, -1.0),  # v2 = 0 on y-walls, free on x-walls
}


def horizontal_laplacian_matrix(grid, fx, fy):
    Dxx = second_difference_1d(grid.Nx, grid.dx, fx, fx)
    Dyy = second_difference_1d(grid.Ny, grid.dy, fy, fy)
    # i (x) is the slow index to match C-order flattening of (Nx, Ny) arrays
    return (sp.kron(Dxx, sp.identity(grid.Ny)) + sp.kron(sp.identity(grid.Nx), Dyy)).tocsc()


def smallest_eigenvalue(A, tol, max_iter):
    """Inverse power iteration for the smallest eigenvalue of a symmetric positive definite matrix."""
    lu = spla.splu(A)
    x = np.ones(A.shape[0])
    x /= np.linalg.norm(x)
    lam = x @ (A @ x)
    for iteration in range(1, max_iter + 1):
        y = lu.solve(x)
        x = y / np.linalg.norm(y)
        lam_new = x @ (A @ x)
        if abs(lam_new - lam) <= tol * abs(lam_new):
            return lam_new, iteration
        lam = lam_new
    raise NumericalError(f"inverse iteration did not reach rtol {tol} in {max_iter} iterations (lambda={lam:.6e})")


def poincare_constant(grid, profile="velocity", tol=None, max_iter=None):
    """C_M = 1/lambda_min of the discrete horizontal Laplacian under the velocity wall conditions.

    profile "v1" or "v2" selects one component; "velocity" takes the larger
    constant so that ||v||^2 <= C_M ||grad v||^2 holds for both components.
    """
    tol = my_settings.poincare_tol if tol is None else tol
    max_iter = my_settings.poincare_max_iter if max_iter is None else max_iter
    if profile == "velocity":
        return max(poincare_constant(grid, p, tol, max_iter) for p in VELOCITY_PROFILES)
    if profile not in VELOCITY_PROFILES:
        raise ConfigError(f"unknown boundary profile '{profile}'", key="profile")
    fx, fy = VELOCITY_PROFILES[profile]
    A = -horizontal_laplacian_matrix(grid, fx, fy)
    lam, iterations = smallest_eigenvalue(A, tol, max_iter)
    logger.debug(f"System: Poincare {profile} lambda_min={lam:.8e} in {iterations} iterations")
    return 1.0 / lam


def domain_constants(grid, profile="velocity"):
    return DomainConstants(C_M=poincare_constant(grid, profile),
                           volume=grid.Lx * grid.Ly * grid.h,
                           area=grid.Lx * grid.Ly)
