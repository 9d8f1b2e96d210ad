# test_geometry.py
# Unit tests for the grid and the Poincare constant
import os
import sys

# Add the parent directory to sys.path to allow module imports
parent_path = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, parent_path)

import math
import unittest

import numpy as np
import scipy.linalg as sla

from modules.errors import ConfigError, NumericalError
from modules.geometry import (build_domain, poincare_constant, domain_constants, second_difference_1d,
                              horizontal_laplacian_matrix)

# Long sweeps only run with a .checkall file in the parent directory
CHECKALL = os.path.isfile(os.path.join(parent_path, '.checkall'))


def discrete_dirichlet_poincare(L, N):
    # 1 / smallest eigenvalue of the cell-centered Dirichlet second difference
    dx = L / N
    return dx**2 / (2.0 * (1.0 - math.cos(math.pi * dx / L)))


class TestBuildDomain(unittest.TestCase):
    def test_unit_cube_centers(self):
        domain, grid = build_domain(1, 1, 1, 8, 8, 8)
        self.assertEqual((grid.dx, grid.dy, grid.dz), (0.125, 0.125, 0.125))
        self.assertEqual(grid.z[0], -0.9375)
        self.assertEqual(domain.h, 1.0)

    def test_shallow_box(self):
        _, grid = build_domain(2, 1, 0.5, 4, 4, 4)
        self.assertEqual(grid.dz, 0.125)
        self.assertEqual(grid.z[3], -0.0625)
        self.assertEqual(grid.dx, 0.5)

    def test_too_few_cells(self):
        with self.assertRaises(ConfigError) as ctx:
            build_domain(1, 1, 1, 3, 8, 8)
        self.assertEqual(ctx.exception.key, "Nx")

    def test_non_positive_extent(self):
        with self.assertRaises(ConfigError):
            build_domain(1, 0, 1, 8, 8, 8)
        with self.assertRaises(ConfigError):
            build_domain(1, 1, -1, 8, 8, 8)

    def test_spacing_reproduces_extent(self):
        _, grid = build_domain(1.7, 0.3, 2.9, 13, 7, 11)
        for d, n, L in ((grid.dx, grid.Nx, grid.Lx), (grid.dy, grid.Ny, grid.Ly), (grid.dz, grid.Nz, grid.h)):
            self.assertAlmostEqual(d * n, L, places=14)
        self.assertAlmostEqual(grid.z[-1] + 0.5 * grid.dz, 0.0, places=14)
        self.assertEqual(grid.shape, (13, 7, 11))
        self.assertEqual(grid.shape2, (13, 7))


class TestSecondDifference(unittest.TestCase):
    def test_even_rows_sum_to_zero(self):
        D = second_difference_1d(6, 0.5, 1.0, 1.0).toarray()
        np.testing.assert_allclose(D.sum(axis=1), 0.0, atol=1e-14)

    def test_symmetric_for_any_factors(self):
        D = second_difference_1d(5, 0.2, -1.0, 0.9).toarray()
        np.testing.assert_array_equal(D, D.T)


class TestPoincareConstant(unittest.TestCase):
    def test_matches_discrete_dirichlet_eigenvalue(self):
        _, grid = build_domain(1, 1, 1, 32, 32, 4)
        C_M = poincare_constant(grid, "v1")
        self.assertAlmostEqual(C_M / discrete_dirichlet_poincare(1.0, 32), 1.0, places=7)

    def test_converges_to_continuum(self):
        _, grid = build_domain(1, 1, 1, 64, 64, 4)
        C_M = poincare_constant(grid, "v1")
        self.assertLess(abs(C_M - 1.0 / math.pi**2) / (1.0 / math.pi**2), 1e-3)

    def test_dense_eigensolve_agrees(self):
        _, grid = build_domain(1, 1, 1, 12, 10, 4)
        A = -horizontal_laplacian_matrix(grid, -1.0, 1.0).toarray()
        lam = sla.eigvalsh(A)[0]
        self.assertAlmostEqual(poincare_constant(grid, "v1") * lam, 1.0, places=7)

    def test_wide_box_takes_larger_constant(self):
        _, grid = build_domain(2, 1, 1, 48, 24, 4)
        C_M = poincare_constant(grid)
        self.assertAlmostEqual(C_M, poincare_constant(grid, "v1"), places=12)
        self.assertGreater(C_M, poincare_constant(grid, "v2"))
        self.assertLess(abs(C_M - 4.0 / math.pi**2) / (4.0 / math.pi**2), 2e-3)

    def test_dilation_scales_quadratically(self):
        _, small = build_domain(1, 1, 1, 16, 16, 4)
        _, large = build_domain(2, 2, 1, 16, 16, 4)
        self.assertAlmostEqual(poincare_constant(large) / poincare_constant(small), 4.0, places=6)

    def test_unknown_profile(self):
        _, grid = build_domain(1, 1, 1, 8, 8, 4)
        with self.assertRaises(ConfigError):
            poincare_constant(grid, "w")

    def test_iteration_cap(self):
        _, grid = build_domain(1, 1, 1, 16, 16, 4)
        with self.assertRaises(NumericalError):
            poincare_constant(grid, "v1", tol=0.0, max_iter=1)

    def test_domain_constants(self):
        _, grid = build_domain(2, 1, 0.5, 8, 8, 4)
        constants = domain_constants(grid)
        self.assertEqual(constants.volume, 1.0)
        self.assertEqual(constants.area, 2.0)
        self.assertGreater(constants.C_M, 0.0)

    @unittest.skipUnless(CHECKALL, "refinement sweep runs with .checkall")
    def test_refinement_sweep(self):
        errors = []
        for n in (16, 32, 64, 128):
            _, grid = build_domain(1, 1, 1, n, n, 4)
            errors.append(abs(poincare_constant(grid, "v1") - 1.0 / math.pi**2))
        for coarse, fine in zip(errors, errors[1:]):
            self.assertAlmostEqual(coarse / fine, 4.0, delta=0.1)


if __name__ == '__main__':
    unittest.main()
