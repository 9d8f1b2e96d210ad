# test_verification.py
# Unit tests for the dense operator oracle, the convergence study and the twin runs
import os
import sys

# Add the parent directory to sys.path to allow module imports
parent_path = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, parent_path)

import math
import unittest

import numpy as np

from modules.errors import ConfigError, VerificationFailure
from modules.fields import Params, Forcing
from modules.geometry import build_domain
from modules.runconfig import parse_config
from modules.timestepper import evaluate_tendency
from modules.verification import (dense_oracle_check, ManufacturedProfile, mms_run, twin_run, epsilon_scaling,
                                  operator_matrix, calibration_stability, CalibrationStability)

# Long sweeps only run with a .checkall file in the parent directory
CHECKALL = os.path.isfile(os.path.join(parent_path, '.checkall'))

TWIN_CONFIG = """
Nx=8
Ny=8
Nz=6
f0=1.0
beta=0.5
init=random
seed=3
t_end=0.04
"""

GROWTH_CONFIG = """
Nx=8
Ny=8
Nz=6
Re1=200.0
Re2=200.0
Rt1=200.0
f0=5.0
beta=0.5
forcing=mode
forcing_amplitude=20.0
init=random
seed=3
t_end=0.3
"""

CALIBRATION_CONFIG = """
Nx=8
Ny=8
Nz=8
f0=1.0
beta=0.5
init=random
t_end=0.05
"""


class TestOracle(unittest.TestCase):
    def test_small_grids_agree(self):
        for shape in ((4, 4, 4), (6, 6, 6), (4, 6, 5)):
            _, grid = build_domain(1.0, 1.3, 0.7, *shape)
            report = dense_oracle_check(grid)
            self.assertTrue(report.passed, report.as_table())
            self.assertGreater(len(report.checks), 20)

    def test_large_grid_rejected(self):
        _, grid = build_domain(1, 1, 1, 8, 4, 4)
        with self.assertRaises(ConfigError):
            dense_oracle_check(grid)

    def test_operator_matrix_of_identity(self):
        M = operator_matrix(lambda a: 2.0 * a, (2, 3))
        np.testing.assert_array_equal(M, 2.0 * np.eye(6))


class TestManufacturedSolution(unittest.TestCase):
    def test_steady_profile_is_balanced_by_its_source(self):
        # the source cancels the continuum tendency, so the discrete residual is truncation error
        params = Params(Re1=10.0, Re2=10.0, Rt1=10.0, Rt2=10.0, f0=1.0, beta=0.5)
        profile = ManufacturedProfile()
        residuals = []
        for n in (16, 32):
            _, grid = build_domain(1, 1, 1, n, n, n // 2)
            state = profile.fields(grid, params.alpha, 0.0)
            k, _ = evaluate_tendency(state, params, Forcing.zero(grid), grid, tolerance=1e-12,
                                     source=profile.source(grid, params))
            residuals.append(max(np.abs(k.dv1).max(), np.abs(k.dv2).max(), np.abs(k.dT).max()))
        self.assertGreater(residuals[0] / residuals[1], 3.0)

    def test_profile_has_zero_depth_mean(self):
        _, grid = build_domain(1, 1, 1, 8, 8, 8)
        state = ManufacturedProfile().fields(grid, 1.0, 0.0)
        self.assertLess(np.abs(state.v1.sum(axis=-1)).max(), 1e-13)

    def test_cosine_time_profile(self):
        profile = ManufacturedProfile(time_profile="cos")
        self.assertEqual(profile.g(0.0), 1.0)
        self.assertAlmostEqual(profile.dg(math.pi / 2), -1.0, places=15)

    def test_cosine_profile_is_balanced_by_its_source(self):
        # at t > 0 the tendency must reproduce dg/dt times the unit-amplitude fields
        params = Params(Re1=10.0, Re2=10.0, Rt1=10.0, Rt2=10.0, f0=1.0, beta=0.5)
        profile = ManufacturedProfile(time_profile="cos")
        t = 0.7
        residuals = []
        for n in (16, 32):
            _, grid = build_domain(1, 1, 1, n, n, n // 2)
            state = profile.fields(grid, params.alpha, t)
            unit = ManufacturedProfile().fields(grid, params.alpha, t)
            k, _ = evaluate_tendency(state, params, Forcing.zero(grid), grid, tolerance=1e-12,
                                     source=profile.source(grid, params))
            rate = profile.dg(t)
            residuals.append(max(np.abs(k.dv1 - rate * unit.v1).max(), np.abs(k.dv2 - rate * unit.v2).max(),
                                 np.abs(k.dT - rate * unit.T).max()))
        self.assertGreater(residuals[0] / residuals[1], 3.0)

    def test_unknown_time_profile(self):
        with self.assertRaises(ConfigError) as ctx:
            ManufacturedProfile(time_profile="sine")
        self.assertEqual(ctx.exception.key, "profile")

    def test_too_few_levels(self):
        with self.assertRaises(ConfigError) as ctx:
            mms_run([8, 16])
        self.assertEqual(ctx.exception.key, "levels")

    def test_unreachable_order_fails(self):
        with self.assertRaises(VerificationFailure) as ctx:
            mms_run([8, 12, 16], t_end=0.005, min_order=50.0)
        self.assertIsNotNone(ctx.exception.report)
        self.assertEqual(ctx.exception.report.levels, [8, 12, 16])

    @unittest.skipUnless(CHECKALL, "long convergence study")
    def test_second_order_convergence(self):
        report = mms_run([16, 32, 64])
        for name, order in report.finest_orders.items():
            self.assertGreaterEqual(order, 1.8, name)
            self.assertLessEqual(order, 2.3, name)

    @unittest.skipUnless(CHECKALL, "long convergence study")
    def test_second_order_convergence_of_time_dependent_profile(self):
        report = mms_run([16, 32, 64], profile=ManufacturedProfile(time_profile="cos"), t_end=0.5)
        for name, order in report.finest_orders.items():
            self.assertGreaterEqual(order, 1.8, name)
            self.assertLessEqual(order, 2.3, name)


class TestTwinRun(unittest.TestCase):
    def setUp(self):
        self.config = parse_config(TWIN_CONFIG)

    def test_difference_starts_at_eps_squared_and_decays(self):
        eps = 1e-3
        report = twin_run(self.config, eps)
        self.assertAlmostEqual(report.delta[0] / eps**2, 1.0, places=8)
        self.assertEqual(report.times[0], 0.0)
        self.assertAlmostEqual(report.times[-1], self.config.t_end, places=12)
        self.assertTrue(report.passed, report.as_table())
        self.assertTrue(np.all(np.diff(report.accumulator) >= 0))

    def test_zero_perturbation(self):
        report = twin_run(self.config, 0.0)
        self.assertEqual(report.delta.max(), 0.0)
        self.assertTrue(report.passed)

    def test_response_is_linear_in_eps(self):
        times, ratio = epsilon_scaling(self.config, 1e-4, record_every=4)
        np.testing.assert_allclose(ratio, 4.0, rtol=1e-2)
        self.assertEqual(len(times), len(ratio))

    def test_growing_difference_is_fitted(self):
        # weakly damped and strongly heated: the difference grows and C_fit has to carry it
        config = parse_config(GROWTH_CONFIG)
        report = twin_run(config, 1e-4, slack=1.25)
        self.assertGreater(report.C_fit, 0.0)
        self.assertGreater(report.margin, 0.0)
        self.assertTrue(report.passed, report.as_table())

    @unittest.skipUnless(CHECKALL, "twin runs over several configurations")
    def test_growth_configurations(self):
        variants = (GROWTH_CONFIG,
                    GROWTH_CONFIG.replace("f0=5.0", "f0=2.0").replace("forcing_amplitude=20.0", "forcing_amplitude=10.0"),
                    GROWTH_CONFIG.replace("seed=3", "seed=8").replace("t_end=0.3", "t_end=0.6"))
        reports = [twin_run(parse_config(text), 1e-4, slack=1.25) for text in variants]
        for report in reports:
            self.assertTrue(report.passed, report.as_table())
        self.assertGreaterEqual(sum(report.C_fit > 0.0 for report in reports), 2)


class TestCalibrationStability(unittest.TestCase):
    def test_kappa_is_stable_under_refinement(self):
        report = calibration_stability(parse_config(CALIBRATION_CONFIG), (0, 1), 16, tolerance=0.1)
        compared = {key: r for key, r in report.ratios.items() if r is not None}
        self.assertTrue(compared, report.as_table())
        self.assertTrue(report.passed, report.as_table())

    def test_mismatched_calibration_fails(self):
        base = {"kappa6": 1.0, "kappa2": 2.0, "kappaz": None, "kappaV": 1.0, "kappat": 1.0}
        self.assertTrue(CalibrationStability(base, dict(base), 0.1).passed)
        self.assertFalse(CalibrationStability(base, {**base, "kappa2": 2.5}, 0.1).passed)
        self.assertFalse(CalibrationStability(base, {**base, "kappaz": 1.0}, 0.1).passed)
        nothing = dict.fromkeys(base)
        self.assertFalse(CalibrationStability(nothing, nothing, 0.1).passed)
        self.assertIn("kappa2", CalibrationStability(base, dict(base), 0.1).as_table())

    def test_bad_arguments(self):
        config = parse_config(CALIBRATION_CONFIG)
        with self.assertRaises(ConfigError):
            calibration_stability(config, (), 16)
        with self.assertRaises(ConfigError):
            calibration_stability(config, (0,), 2)

    @unittest.skipUnless(CHECKALL, "five runs on a 48^3 grid")
    def test_kappa_is_stable_on_fine_grid(self):
        config = parse_config(CALIBRATION_CONFIG.replace("Nx=8\nNy=8\nNz=8", "Nx=16\nNy=16\nNz=16")
                              .replace("t_end=0.05", "t_end=0.02"))
        report = calibration_stability(config, range(5), 48, tolerance=0.1)
        self.assertTrue(report.passed, report.as_table())


if __name__ == '__main__':
    unittest.main()
