# test_operators.py
# Unit tests for the stencil and vertical-integral operators
import os
import sys

# Add the parent directory to sys.path to allow module imports
parent_path = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, parent_path)

import unittest

import numpy as np

from modules.fields import pad, make_smooth_state, make_mode_state, SCALAR_RULES, V1_RULES, V2_RULES
from modules.geometry import build_domain
from modules.operators import (grad_h, div_h, lap_h, ddz, d2dz2, vertical_cumint, vertical_cumint_faces,
                               depth_average, fluctuation, broadcast_z, diagnose_w,
                               hydrostatic_pressure, inner, l2sq)
from modules.pressure import project_velocity


class TestStencils(unittest.TestCase):
    def setUp(self):
        _, self.grid = build_domain(1, 1, 1, 8, 8, 6)
        self.x, self.y, self.z = self.grid.mesh()

    def test_gradient_of_linear(self):
        phi = np.broadcast_to(self.x, self.grid.shape).copy()
        gx, gy = grad_h(pad(phi, SCALAR_RULES), self.grid)
        np.testing.assert_allclose(gx[1:-1], 1.0, rtol=1e-13)
        np.testing.assert_allclose(gy, 0.0, atol=1e-14)

    def test_laplacian_of_quadratic(self):
        phi = np.broadcast_to(self.x**2 + self.y**2, self.grid.shape).copy()
        lap = lap_h(pad(phi, SCALAR_RULES), self.grid)
        np.testing.assert_allclose(lap[1:-1, 1:-1], 4.0, rtol=1e-11)

    def test_vertical_derivatives_of_quadratic(self):
        phi = np.broadcast_to(self.z**2, self.grid.shape).copy()
        phi_p = pad(phi, SCALAR_RULES)
        np.testing.assert_allclose(ddz(phi_p, self.grid)[..., 1:-1], np.broadcast_to(2 * self.z, self.grid.shape)[..., 1:-1], atol=1e-12)
        np.testing.assert_allclose(d2dz2(phi_p, self.grid)[..., 1:-1], 2.0, rtol=1e-10)

    def test_div_is_negative_adjoint_of_grad(self):
        rng = np.random.default_rng(5)
        phi = rng.standard_normal(self.grid.shape)
        u = rng.standard_normal(self.grid.shape)
        v = rng.standard_normal(self.grid.shape)
        gx, gy = grad_h(pad(phi, SCALAR_RULES), self.grid)
        lhs = inner(gx, u, self.grid) + inner(gy, v, self.grid)
        rhs = -inner(phi, div_h(pad(u, V1_RULES), pad(v, V2_RULES), self.grid), self.grid)
        self.assertAlmostEqual(lhs, rhs, places=12)

    def test_laplacian_is_symmetric(self):
        rng = np.random.default_rng(6)
        a = rng.standard_normal(self.grid.shape)
        b = rng.standard_normal(self.grid.shape)
        ab = inner(lap_h(pad(a, V1_RULES), self.grid), b, self.grid)
        ba = inner(a, lap_h(pad(b, V1_RULES), self.grid), self.grid)
        self.assertAlmostEqual(ab, ba, places=11)


class TestVerticalIntegrals(unittest.TestCase):
    def setUp(self):
        _, self.grid = build_domain(1, 1, 2, 4, 4, 16)
        self.x, self.y, self.z = self.grid.mesh()

    def test_cumint_of_one(self):
        out = vertical_cumint(np.ones(self.grid.shape), self.grid)
        np.testing.assert_allclose(out, np.broadcast_to(self.z + self.grid.h, self.grid.shape), atol=1e-14)

    def test_cumint_of_linear(self):
        phi = np.broadcast_to(self.z, self.grid.shape).copy()
        out = vertical_cumint(phi, self.grid)
        exact = np.broadcast_to((self.z**2 - self.grid.h**2) / 2.0, self.grid.shape)
        self.assertLessEqual(np.abs(out - exact).max(), 0.2 * self.grid.dz**2)

    def test_full_depth_of_odd_profile(self):
        phi = np.broadcast_to(self.z + 0.5 * self.grid.h, self.grid.shape).copy()
        faces = vertical_cumint_faces(phi, self.grid)
        self.assertLess(np.abs(faces[..., -1]).max(), 1e-14)
        self.assertEqual(np.abs(faces[..., 0]).max(), 0.0)

    def test_depth_average_and_fluctuation(self):
        phi2 = np.random.default_rng(2).standard_normal(self.grid.shape2)
        phi = np.array(broadcast_z(phi2, self.grid))
        np.testing.assert_allclose(depth_average(phi, self.grid), phi2, rtol=1e-14)
        self.assertLess(np.abs(fluctuation(phi, self.grid)).max(), 1e-14)
        odd = np.broadcast_to(self.z + 0.5 * self.grid.h, self.grid.shape)
        self.assertLess(np.abs(depth_average(odd, self.grid)).max(), 1e-15)

    def test_fluctuation_has_zero_mean(self):
        phi = np.random.default_rng(9).standard_normal(self.grid.shape)
        mean = depth_average(fluctuation(phi, self.grid), self.grid)
        self.assertLessEqual(np.abs(mean).max(), 1e-14 * np.abs(phi).max())


class TestDiagnosedVelocity(unittest.TestCase):
    def setUp(self):
        _, self.grid = build_domain(1, 1, 1, 8, 8, 8)
        self.x, self.y, self.z = self.grid.mesh()

    def test_constant_velocity(self):
        ones = np.ones(self.grid.shape)
        w = diagnose_w(pad(ones, SCALAR_RULES), pad(2 * ones, SCALAR_RULES), self.grid)
        self.assertEqual(np.abs(w).max(), 0.0)

    def test_linear_velocity(self):
        a = 0.7
        v1 = np.broadcast_to(a * self.x, self.grid.shape).copy()
        w = diagnose_w(pad(v1, SCALAR_RULES), pad(np.zeros(self.grid.shape), SCALAR_RULES), self.grid)
        exact = np.broadcast_to(-a * (self.z + self.grid.h), self.grid.shape)
        np.testing.assert_allclose(w[1:-1], exact[1:-1], atol=1e-13)

    def test_projected_velocity_has_no_surface_outflow(self):
        state = project_velocity(make_smooth_state(self.grid, 3), self.grid, tolerance=1e-12)
        v1_p, v2_p = pad(state.v1, V1_RULES), pad(state.v2, V2_RULES)
        div = div_h(v1_p, v2_p, self.grid)
        top = vertical_cumint_faces(div, self.grid)[..., -1]
        self.assertLess(np.abs(top).max(), 1e-9 * np.abs(div).max() * self.grid.h)

    def test_mode_state_w_vanishes_at_both_ends(self):
        state = make_mode_state(self.grid)
        v1_p, v2_p = pad(state.v1, V1_RULES), pad(state.v2, V2_RULES)
        top = vertical_cumint_faces(div_h(v1_p, v2_p, self.grid), self.grid)[..., -1]
        self.assertLess(np.abs(top).max(), 1e-13)


class TestHydrostaticPressure(unittest.TestCase):
    def setUp(self):
        _, self.grid = build_domain(1, 1, 1, 4, 4, 16)
        self.x, self.y, self.z = self.grid.mesh()
        self.p_s = np.random.default_rng(4).standard_normal(self.grid.shape2)

    def test_constant_temperature(self):
        p = hydrostatic_pressure(np.full(self.grid.shape, 2.5), self.p_s, self.grid)
        exact = self.p_s[..., None] - 2.5 * (self.z + self.grid.h)
        np.testing.assert_allclose(p, exact, atol=1e-13)

    def test_zero_temperature(self):
        p = hydrostatic_pressure(np.zeros(self.grid.shape), self.p_s, self.grid)
        np.testing.assert_array_equal(p, np.broadcast_to(self.p_s[..., None], self.grid.shape))

    def test_hydrostatic_balance_is_second_order(self):
        errors = []
        for n in (16, 32):
            _, grid = build_domain(1, 1, 1, 4, 4, n)
            z = grid.mesh()[2]
            T = np.broadcast_to(np.cos(3.0 * (z + grid.h)), grid.shape).copy()
            p = hydrostatic_pressure(T, np.zeros(grid.shape2), grid)
            residual = ddz(pad(p, SCALAR_RULES), grid) + T
            errors.append(np.abs(residual[..., 1:-1]).max())
            self.assertLess(errors[-1], 3.0 * grid.dz**2)
        self.assertGreater(errors[0] / errors[1], 3.5)


class TestQuadrature(unittest.TestCase):
    def test_constant_norm(self):
        _, grid = build_domain(2, 1, 0.5, 4, 4, 4)
        self.assertAlmostEqual(l2sq(np.full(grid.shape, 3.0), grid), 9.0, places=12)
        self.assertAlmostEqual(l2sq(np.full(grid.shape2, 3.0), grid), 18.0, places=12)


if __name__ == '__main__':
    unittest.main()
