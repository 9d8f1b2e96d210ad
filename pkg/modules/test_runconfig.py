# test_runconfig.py
# Unit tests for run-config parsing and validation
import os
import sys

# Add the parent directory to sys.path to allow module imports
parent_path = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, parent_path)

import tempfile
import unittest

from modules.errors import ConfigError
from modules.runconfig import RunConfig, parse_config, load_config

SAMPLE = """# a small forced run
Lx=2.0
Nx=8  # cells
Ny=8
Nz=4

forcing=mode
forcing_amplitude=0.5
t_end=0.1
kappa6=3.5
"""


class TestParse(unittest.TestCase):
    def test_values_and_defaults(self):
        config = parse_config(SAMPLE)
        self.assertEqual(config.Lx, 2.0)
        self.assertEqual((config.Nx, config.Ny, config.Nz), (8, 8, 4))
        self.assertEqual(config.forcing, "mode")
        self.assertEqual(config.Re1, 1.0)
        self.assertEqual(config.kappa(), {"kappa6": 3.5})

    def test_empty_text_gives_defaults(self):
        self.assertEqual(parse_config(""), RunConfig())

    def test_negative_reynolds_names_key_and_line(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("Nx=8\nRe1=-1\n")
        self.assertEqual(ctx.exception.key, "Re1")
        self.assertEqual(ctx.exception.lines, (2,))
        self.assertIn("line 2", str(ctx.exception))

    def test_duplicate_key_cites_both_lines(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("Nx=8\nNy=8\nNx=16\n")
        self.assertEqual(ctx.exception.key, "Nx")
        self.assertEqual(ctx.exception.lines, (1, 3))

    def test_unknown_key(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("Nx=8\nRe3=2\n")
        self.assertEqual(ctx.exception.key, "Re3")
        self.assertIn("unknown key", str(ctx.exception))

    def test_line_without_value(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("Nx=8\nthis is not a setting\n")
        self.assertEqual(ctx.exception.lines, (2,))

    def test_bad_choice(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("init=noise\n")
        self.assertEqual(ctx.exception.key, "init")

    def test_too_few_cells(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("Nz=2\n")
        self.assertEqual(ctx.exception.key, "Nz")

    def test_text_round_trip(self):
        config = parse_config(SAMPLE)
        self.assertEqual(parse_config(config.to_text()), config)

    def test_load_missing_file(self):
        with self.assertRaises(ConfigError):
            load_config(os.path.join(tempfile.gettempdir(), "no-such-peq-run.cfg"))

    def test_load_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "run.cfg")
            with open(path, "w", encoding="utf-8") as f:
                f.write(SAMPLE)
            self.assertEqual(load_config(path), parse_config(SAMPLE))


class TestBuilders(unittest.TestCase):
    def test_objects_follow_the_config(self):
        config = parse_config(SAMPLE + "Re2=4\nalpha=2\ninit=mode\ndt=0.01\n")
        grid = config.build_grid()
        self.assertEqual(grid.shape, (8, 8, 4))
        self.assertEqual(grid.Lx, 2.0)
        params = config.build_params()
        self.assertEqual((params.Re2, params.alpha), (4.0, 2.0))
        self.assertEqual(config.build_control().dt, 0.01)
        self.assertEqual(config.build_forcing(grid).Q.shape, grid.shape)
        self.assertEqual(config.build_initial_state(grid).T.shape, grid.shape)

    def test_rest_initial_state(self):
        config = parse_config("Nx=4\nNy=4\nNz=4\ninit=rest\n")
        state = config.build_initial_state(config.build_grid())
        self.assertEqual(abs(state.v1).max() + abs(state.T).max(), 0.0)


if __name__ == '__main__':
    unittest.main()
