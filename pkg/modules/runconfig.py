# Run configuration: line-oriented key=value text, validated before any compute
import configparser
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from modules.energetics import KAPPA_NAMES
from modules.errors import ConfigError
from modules.fields import Params, Forcing, State, make_smooth_state, make_mode_state
from modules.geometry import build_domain
from modules.pressure import project_velocity
from modules.timestepper import StepControl

RUN_SECTION = "run"


class RunConfig(BaseModel):
    """Everything one run needs; reproducible from this alone (the seed included)."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    Lx: float = Field(1.0, gt=0, description="Domain extent in x")
    Ly: float = Field(1.0, gt=0, description="Domain extent in y")
    h: float = Field(1.0, gt=0, description="Depth; the domain spans -h < z < 0")
    Nx: int = Field(16, ge=4, description="Cells in x")
    Ny: int = Field(16, ge=4, description="Cells in y")
    Nz: int = Field(16, ge=4, description="Cells in z")
    Re1: float = Field(1.0, gt=0, description="Horizontal Reynolds number")
    Re2: float = Field(1.0, gt=0, description="Vertical Reynolds number")
    Rt1: float = Field(1.0, gt=0, description="Horizontal heat diffusion number")
    Rt2: float = Field(1.0, gt=0, description="Vertical heat diffusion number")
    f0: float = Field(0.0, description="Coriolis scale, f = f0 (beta + y)")
    beta: float = Field(0.0, description="Beta-plane offset")
    alpha: float = Field(1.0, gt=0, description="Surface heat exchange coefficient (Robin)")
    forcing: Literal["zero", "mode"] = Field("zero", description="Heat source profile")
    forcing_amplitude: float = Field(1.0, description="Amplitude of the mode heat source")
    init: Literal["random", "mode", "rest"] = Field("random", description="Initial condition")
    seed: int = Field(0, ge=0, description="Seed of the random initial condition")
    init_amplitude: float = Field(1.0, description="Scale applied to the initial fields")
    t_end: float = Field(1.0, ge=0, description="Final time")
    dt: float = Field(0.0, ge=0, description="Fixed time step; 0 uses the CFL step")
    cfl_adv: float = Field(0.5, gt=0, lt=1, description="Advective safety factor")
    cfl_diff: float = Field(0.25, gt=0, lt=1, description="Diffusive safety factor")
    ledger_every: int = Field(1, ge=1, description="Steps between ledger rows")
    snapshot_every: int = Field(0, ge=0, description="Steps between snapshots; 0 writes the final one only")
    out_dir: str = Field("data/run", description="Output directory for ledger and snapshots")
    poisson_tol: float = Field(1e-10, gt=0, lt=1, description="Relative residual of the surface-pressure solve")
    exp_cap: float = Field(700.0, gt=0, description="Log-space cap beyond which a bound is reported as +inf")
    kappa6: Optional[float] = Field(None, ge=0, description="Calibration multiplier for the L6 fluctuation bound")
    kappa2: Optional[float] = Field(None, ge=0, description="Calibration multiplier for the barotropic gradient bound")
    kappaz: Optional[float] = Field(None, ge=0, description="Calibration multiplier for the vertical shear bound")
    kappaV: Optional[float] = Field(None, ge=0, description="Calibration multiplier for the velocity gradient bound")
    kappat: Optional[float] = Field(None, ge=0, description="Calibration multiplier for the temperature H1 bound")

    def build_grid(self):
        _, grid = build_domain(self.Lx, self.Ly, self.h, self.Nx, self.Ny, self.Nz)
        return grid

    def build_params(self):
        return Params(Re1=self.Re1, Re2=self.Re2, Rt1=self.Rt1, Rt2=self.Rt2,
                      f0=self.f0, beta=self.beta, alpha=self.alpha)

    def build_forcing(self, grid):
        if self.forcing == "zero":
            return Forcing.zero(grid)
        return Forcing.mode(grid, self.forcing_amplitude)

    def build_control(self):
        return StepControl(t_end=self.t_end, dt=self.dt, cfl_adv=self.cfl_adv, cfl_diff=self.cfl_diff)

    def build_initial_state(self, grid):
        if self.init == "rest":
            return State.rest(grid)
        if self.init == "mode":
            return make_mode_state(grid, self.alpha, self.init_amplitude)
        state = make_smooth_state(grid, self.seed, alpha=self.alpha, amplitude=self.init_amplitude)
        return project_velocity(state, grid, self.poisson_tol)

    def kappa(self):
        return {name: getattr(self, name) for name in KAPPA_NAMES if getattr(self, name) is not None}

    def to_text(self):
        lines = []
        for name in type(self).model_fields:
            value = getattr(self, name)
            if value is not None:
                lines.append(f"{name}={value!r}" if isinstance(value, float) else f"{name}={value}")
        return "\n".join(lines) + "\n"


def _key_lines(text):
    # physical line numbers of every key=value line, in order of appearance
    found = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")) or "=" not in line:
            continue
        key = line.split("=", 1)[0].strip()
        found.setdefault(key, []).append(number)
    return found


def parse_config(text):
    parser = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#", ";"),
                                       inline_comment_prefixes=("#",), strict=True, interpolation=None)
    parser.optionxform = str
    try:
        # the file has no sections; line numbers below are shifted back by the header
        parser.read_string(f"[{RUN_SECTION}]\n" + text, source="run config")
    except configparser.DuplicateOptionError as e:
        lines = _key_lines(text).get(e.option, [e.lineno - 1])
        raise ConfigError(f"duplicate key '{e.option}'", key=e.option, lines=lines[:2]) from None
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("malformed config text", lines=[e.lineno - 1]) from None
    except configparser.ParsingError as e:
        lines = [lineno - 1 for lineno, _ in e.errors]
        raise ConfigError("expected key=value", lines=lines) from None
    except configparser.DuplicateSectionError as e:
        raise ConfigError("section headers are not allowed in a run config", lines=[e.lineno - 1]) from None
    if parser.sections() != [RUN_SECTION]:
        extra = [s for s in parser.sections() if s != RUN_SECTION]
        raise ConfigError(f"section headers are not allowed in a run config: {extra}")

    values = dict(parser[RUN_SECTION])
    positions = _key_lines(text)
    try:
        return RunConfig(**values)
    except ValidationError as e:
        first = e.errors()[0]
        key = str(first["loc"][0]) if first["loc"] else None
        if first["type"] == "extra_forbidden":
            message = f"unknown key '{key}'"
        else:
            message = f"invalid value for {key}: {first['msg']}"
        raise ConfigError(message, key=key, lines=positions.get(key, [])) from None


def load_config(path):
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read run config {path}: {e.strerror}", key="config") from None
    return parse_config(text)
