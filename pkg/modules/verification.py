# Correctness machinery: dense-matrix operator oracle, manufactured-solution
# convergence studies, twin-run continuous dependence and kappa calibration stability
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.integrate import cumulative_trapezoid

from modules.dynamics import Tendency, baroclinic_pressure_grad
from modules.energetics import (DissipationTracker, KAPPA_NAMES, calibrate_kappa, certificate_series,
                                compute_forcing_norms, compute_norms)
from modules.errors import ConfigError, VerificationFailure
from modules.fields import (State, Params, Forcing, pad, robin_wavenumbers, temperature_rules, make_smooth_state,
                            V1_RULES, V2_RULES, SCALAR_RULES, EVEN, ODD)
from modules.geometry import build_domain, second_difference_1d, horizontal_laplacian_matrix, poincare_constant
from modules.log import logger
from modules.operators import (grad_h, div_h, lap_h, ddz, d2dz2, vertical_cumint, vertical_cumint_faces,
                               depth_average, fluctuation, broadcast_z, diagnose_w)
from modules.pressure import neumann_laplacian, project_step, project_velocity
from modules.timestepper import Observer, StepControl, integrate, stable_dt, step_ssprk3
import modules.settings as my_settings

ORACLE_MAX_CELLS = 6
ORACLE_TOL = 1e-12


@dataclass
class OracleCheck:
    name: str
    error: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self):
        return bool(self.error <= self.tolerance)


@dataclass
class OracleReport:
    shape: tuple
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def as_table(self):
        lines = [f"oracle on {self.shape[0]}x{self.shape[1]}x{self.shape[2]}",
                 f"{'check':<34} {'error':>12} {'tolerance':>12}  status"]
        for c in self.checks:
            status = my_settings.CERT_PASS if c.passed else my_settings.CERT_FAIL
            lines.append(f"{c.name:<34} {c.error:>12.3e} {c.tolerance:>12.3e}  {status}{('  ' + c.detail) if c.detail else ''}")
        return "\n".join(lines)


def operator_matrix(op, shape_in):
    """Dense matrix of a linear stencil operator by applying it to each unit basis array (C-order flattening)."""
    n = int(np.prod(shape_in))
    columns = []
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        columns.append(np.ravel(op(e.reshape(shape_in))))
    return np.array(columns).T


def first_difference_1d(n, d, lo, hi):
    """Centered first difference with ghost = factor * adjacent interior at each end."""
    main = np.zeros(n)
    main[0] = -lo
    main[-1] = hi
    return sp.diags([-np.ones(n - 1), main, np.ones(n - 1)], [-1, 0, 1], format="csr") / (2.0 * d)


def _kron3(ax, ay, az):
    return sp.kron(ax, sp.kron(ay, az)).toarray()


def _eye(n):
    return sp.identity(n, format="csr")


def _vertical_cumint_1d(n, dz):
    return dz * (np.tril(np.ones((n, n))) - 0.5 * np.eye(n))


def _mismatch(name, assembled, reference, shape, tol=ORACLE_TOL):
    diff = np.abs(assembled - reference)
    scale = max(1.0, float(np.abs(reference).max()))
    error = float(diff.max()) / scale
    detail = ""
    if error > tol:
        column = int(np.argmax(diff.max(axis=0)))
        detail = f"worst basis cell {np.unravel_index(column, shape)}"
    return OracleCheck(name, error, tol, detail)


def dense_oracle_check(grid):
    """Assemble every linear operator column by column and compare with independent
    Kronecker assemblies, adjoint pairs, compositions and known spectra."""
    if max(grid.shape) > ORACLE_MAX_CELLS:
        raise ConfigError(f"oracle grid must be at most {ORACLE_MAX_CELLS} cells per axis, got {grid.shape}", key="grid")
    Nx, Ny, Nz = grid.shape
    shape3, shape2 = grid.shape, grid.shape2
    Ix, Iy, Iz = _eye(Nx), _eye(Ny), _eye(Nz)
    report = OracleReport(shape3)
    add = report.checks.append

    # scalar (even) operators
    G_x = operator_matrix(lambda a: grad_h(pad(a, SCALAR_RULES), grid)[0], shape3)
    G_y = operator_matrix(lambda a: grad_h(pad(a, SCALAR_RULES), grid)[1], shape3)
    add(_mismatch("grad_h x", G_x, _kron3(first_difference_1d(Nx, grid.dx, 1, 1), Iy, Iz), shape3))
    add(_mismatch("grad_h y", G_y, _kron3(Ix, first_difference_1d(Ny, grid.dy, 1, 1), Iz), shape3))

    D_1 = operator_matrix(lambda a: div_h(pad(a, V1_RULES), pad(np.zeros(shape3), V2_RULES), grid), shape3)
    D_2 = operator_matrix(lambda a: div_h(pad(np.zeros(shape3), V1_RULES), pad(a, V2_RULES), grid), shape3)
    add(_mismatch("div_h v1 part", D_1, _kron3(first_difference_1d(Nx, grid.dx, -1, -1), Iy, Iz), shape3))
    add(_mismatch("div_h v2 part", D_2, _kron3(Ix, first_difference_1d(Ny, grid.dy, -1, -1), Iz), shape3))
    # summation by parts: grad_h (even) and div_h (odd) are negative transposes
    add(_mismatch("adjoint grad_h x / div_h", G_x.T, -D_1, shape3))
    add(_mismatch("adjoint grad_h y / div_h", G_y.T, -D_2, shape3))

    L_h = operator_matrix(lambda a: lap_h(pad(a, V1_RULES), grid), shape3)
    ref = (_kron3(second_difference_1d(Nx, grid.dx, -1, -1), Iy, Iz)
           + _kron3(Ix, second_difference_1d(Ny, grid.dy, 1, 1), Iz))
    add(_mismatch("lap_h v1 rules", L_h, ref, shape3))
    add(_mismatch("lap_h symmetry", L_h, L_h.T, shape3))

    rules_T = temperature_rules(1.0, grid)
    r = rules_T[2][1]
    Dz = operator_matrix(lambda a: ddz(pad(a, SCALAR_RULES), grid), shape3)
    add(_mismatch("ddz", Dz, _kron3(Ix, Iy, first_difference_1d(Nz, grid.dz, 1, 1)), shape3))
    Dzz = operator_matrix(lambda a: d2dz2(pad(a, rules_T), grid), shape3)
    add(_mismatch("d2dz2 Robin rules", Dzz, _kron3(Ix, Iy, second_difference_1d(Nz, grid.dz, 1, r)), shape3))
    add(_mismatch("d2dz2 symmetry", Dzz, Dzz.T, shape3))

    C = operator_matrix(lambda a: vertical_cumint(a, grid), shape3)
    add(_mismatch("vertical_cumint", C, _kron3(Ix, Iy, _vertical_cumint_1d(Nz, grid.dz)), shape3))
    A = operator_matrix(lambda a: depth_average(a, grid), shape3)
    A_ref = sp.kron(sp.kron(Ix, Iy), np.full((1, Nz), grid.dz / grid.h)).toarray()
    add(_mismatch("depth_average", A, A_ref, shape3))
    B = operator_matrix(lambda a: np.array(broadcast_z(a, grid)), shape2)
    add(_mismatch("adjoint depth_average / broadcast", A.T, B * grid.dz / grid.h, shape2))
    F = operator_matrix(lambda a: fluctuation(a, grid), shape3)
    add(_mismatch("depth_average . fluctuation", A @ F, np.zeros_like(A), shape3, tol=1e-14))
    top = operator_matrix(lambda a: vertical_cumint_faces(a, grid)[..., -1], shape3)
    add(_mismatch("full-depth integral = h mean", top, grid.h * A, shape3))

    W = operator_matrix(lambda a: diagnose_w(pad(a, V1_RULES), pad(np.zeros(shape3), V2_RULES), grid), shape3)
    add(_mismatch("diagnose_w = -cumint div", W, -C @ D_1, shape3))
    P = operator_matrix(lambda a: baroclinic_pressure_grad(a, grid)[0], shape3)
    add(_mismatch("baroclinic = -grad cumint", P, -G_x @ C, shape3))

    # Neumann (projection) Laplacian: constants in the kernel, known cosine spectrum
    N = operator_matrix(lambda a: neumann_laplacian(a, grid), shape2)
    add(OracleCheck("Neumann row sums", float(np.abs(N.sum(axis=1)).max()) * grid.dx**2, ORACLE_TOL))
    m = np.arange(Nx)[:, None]
    n = np.arange(Ny)[None, :]
    predicted = np.sort((-(np.sin(m * np.pi / Nx) / grid.dx) ** 2 - (np.sin(n * np.pi / Ny) / grid.dy) ** 2).ravel())
    eig = np.sort(sla.eigvalsh(0.5 * (N + N.T)))
    add(OracleCheck("Neumann spectrum", float(np.abs(eig - predicted).max()) * grid.dx**2, 1e-10))
    add(_mismatch("Neumann symmetry", N, N.T, shape2))

    # projection against the dense pseudo-inverse
    rng = np.random.default_rng(7)
    tendency = (rng.standard_normal(shape3), rng.standard_normal(shape3))
    (p1, p2), p_s = project_step(tendency, grid, tolerance=1e-13)
    rhs = div_h(pad(depth_average(tendency[0], grid), (ODD, EVEN)), pad(depth_average(tendency[1], grid), (EVEN, ODD)), grid)
    phi = sla.pinv(N) @ rhs.ravel()
    phi -= phi.mean()
    add(OracleCheck("projection vs pseudo-inverse", float(np.abs(phi - p_s.ravel()).max() / max(1.0, np.abs(phi).max())), 1e-9))

    # mixed-condition Laplacian: smallest eigenvalue and the Poincare constant
    M = -horizontal_laplacian_matrix(grid, -1.0, 1.0).toarray()
    lam = float(sla.eigvalsh(M)[0])
    lam_pred = 2.0 / grid.dx**2 * (1.0 - math.cos(math.pi * grid.dx / grid.Lx))
    add(OracleCheck("mixed Laplacian lambda_min", abs(lam - lam_pred) / lam_pred, 1e-12))
    add(OracleCheck("Poincare constant", abs(poincare_constant(grid, "v1", tol=1e-14, max_iter=2000) * lam - 1.0), 1e-9))

    failed = [c.name for c in report.checks if not c.passed]
    if failed:
        logger.warning(f"Verify: oracle mismatches in {', '.join(failed)}")
    else:
        logger.info(f"Verify: oracle {len(report.checks)} checks agree on {Nx}x{Ny}x{Nz}")
    return report


@dataclass(frozen=True)
class ManufacturedProfile:
    """Analytic fields meeting every wall condition:

    v1 = A sin(a x) cos(b y) cos(c Z) g(t), v2 = B cos(a x) sin(b y) cos(c Z) g(t),
    T = C cos(a x) cos(b y) cos(mu Z) g(t), Z = z + h, mu tan(mu h) = alpha.
    The depth mean of v vanishes, so the barotropic constraint holds trivially.
    """
    A: float = 1.0
    B: float = 0.5
    C: float = 1.0
    time_profile: str = "steady"  # steady: g = 1, cos: g = cos t

    def __post_init__(self):
        if self.time_profile not in ("steady", "cos"):
            raise ConfigError(f"unknown time profile '{self.time_profile}'", key="profile")

    def g(self, t):
        return 1.0 if self.time_profile == "steady" else math.cos(t)

    def dg(self, t):
        return 0.0 if self.time_profile == "steady" else -math.sin(t)

    def _basis(self, grid, alpha):
        x, y, z = grid.mesh()
        a, b, c = math.pi / grid.Lx, math.pi / grid.Ly, math.pi / grid.h
        mu = robin_wavenumbers(alpha, grid.h, 1)[0]
        Z = z + grid.h
        return dict(a=a, b=b, c=c, mu=mu, sx=np.sin(a * x), cx=np.cos(a * x), sy=np.sin(b * y), cy=np.cos(b * y),
                    sz=np.sin(c * Z), cz=np.cos(c * Z), smu=np.sin(mu * Z), cmu=np.cos(mu * Z), y=y)

    def fields(self, grid, alpha, t):
        k = self._basis(grid, alpha)
        g = self.g(t)
        shape = grid.shape
        return State(np.broadcast_to(self.A * k["sx"] * k["cy"] * k["cz"] * g, shape).copy(),
                     np.broadcast_to(self.B * k["cx"] * k["sy"] * k["cz"] * g, shape).copy(),
                     np.broadcast_to(self.C * k["cx"] * k["cy"] * k["cmu"] * g, shape).copy(), t)

    def source(self, grid, params):
        """Returns source(t): the Tendency making the profile an exact solution of the continuum equations with Q = 0."""
        k = self._basis(grid, params.alpha)
        a, b, c, mu = k["a"], k["b"], k["c"], k["mu"]
        sx, cx, sy, cy, sz, cz, smu, cmu = (k[n] for n in ("sx", "cx", "sy", "cy", "sz", "cz", "smu", "cmu"))
        A, B, C = self.A, self.B, self.C
        f = params.f0 * (params.beta + k["y"])
        # unit-amplitude (g = 1) pieces; advection scales with g^2, the rest with g
        v1 = A * sx * cy * cz
        v2 = B * cx * sy * cz
        T = C * cx * cy * cmu
        w = -(A * a + B * b) / c * cx * cy * sz
        adv1 = v1 * (A * a * cx * cy * cz) + v2 * (-A * b * sx * sy * cz) + w * (-A * c * sx * cy * sz)
        adv2 = v1 * (-B * a * sx * sy * cz) + v2 * (B * b * cx * cy * cz) + w * (-B * c * cx * sy * sz)
        advT = v1 * (-C * a * sx * cy * cmu) + v2 * (-C * b * cx * sy * cmu) + w * (-C * mu * cx * cy * smu)
        lin1 = (-(a * a + b * b) / params.Re1 - c * c / params.Re2) * v1 + f * v2 - C * a * sx * cy * smu / mu
        lin2 = (-(a * a + b * b) / params.Re1 - c * c / params.Re2) * v2 - f * v1 - C * b * cx * sy * smu / mu
        linT = (-(a * a + b * b) / params.Rt1 - mu * mu / params.Rt2) * T
        shape = grid.shape

        def source(t):
            g, dg = self.g(t), self.dg(t)
            return Tendency(np.broadcast_to(dg * v1 + g * g * adv1 - g * lin1, shape),
                            np.broadcast_to(dg * v2 + g * g * adv2 - g * lin2, shape),
                            np.broadcast_to(dg * T + g * g * advT - g * linT, shape))
        return source


@dataclass
class ConvergenceReport:
    levels: list
    errors: dict  # field name -> error per level
    orders: dict  # field name -> log2 ratio per consecutive pair

    @property
    def finest_orders(self):
        return {name: values[-1] for name, values in self.orders.items() if values}

    def as_table(self):
        names = list(self.errors)
        lines = [f"{'level':>8} " + " ".join(f"{'err ' + n:>14} {'order':>7}" for n in names)]
        for i, level in enumerate(self.levels):
            cells = []
            for n in names:
                order = f"{self.orders[n][i - 1]:7.3f}" if i > 0 else f"{'':>7}"
                cells.append(f"{self.errors[n][i]:14.6e} {order}")
            lines.append(f"{level:>8} " + " ".join(cells))
        return "\n".join(lines)


def _relative_l2_error(numeric, exact, grid):
    scale = math.sqrt(float(np.sum(exact * exact)) * grid.cell_volume)
    error = math.sqrt(float(np.sum((numeric - exact) ** 2)) * grid.cell_volume)
    return error / scale if scale > 0 else error


def mms_run(levels, profile=None, params=None, t_end=0.05, extents=(1.0, 1.0, 1.0), vertical_ratio=0.5,
            min_order=1.7, tolerance=1e-12):
    """Manufactured-solution convergence study.

    levels are horizontal cell counts; the vertical count follows as
    vertical_ratio * level. Raises VerificationFailure when a field's order
    on the finest pair falls below min_order.
    """
    levels = sorted(int(n) for n in levels)
    if len(levels) < 3:
        raise ConfigError(f"a convergence study needs at least 3 levels, got {len(levels)}", key="levels")
    profile = profile or ManufacturedProfile()
    params = params or Params(Re1=10.0, Re2=10.0, Rt1=10.0, Rt2=10.0, f0=1.0, beta=0.5, alpha=1.0)
    Lx, Ly, h = extents
    errors = {"v1": [], "v2": [], "T": []}
    for n in levels:
        _, grid = build_domain(Lx, Ly, h, n, n, max(4, int(round(vertical_ratio * n))))
        state = profile.fields(grid, params.alpha, 0.0)
        source = profile.source(grid, params)
        control = StepControl(t_end=t_end)
        final = integrate(state, params, Forcing.zero(grid), grid, control, tolerance=tolerance, source=source)
        exact = profile.fields(grid, params.alpha, final.t)
        for name in errors:
            numeric, reference = getattr(final, name), getattr(exact, name)
            if np.abs(reference).max() == 0.0:
                errors[name].append(float(np.abs(numeric).max()))
            else:
                errors[name].append(_relative_l2_error(numeric, reference, grid))
        logger.info(f"Verify: MMS level {n} errors " + ", ".join(f"{k}={v[-1]:.3e}" for k, v in errors.items()))
    orders = {}
    for name, values in errors.items():
        orders[name] = [math.log2(values[i] / values[i + 1]) if values[i + 1] > 0 and values[i] > 0 else math.inf
                        for i in range(len(values) - 1)]
    report = ConvergenceReport(levels, errors, orders)
    slow = [name for name, order in report.finest_orders.items() if order < min_order]
    if slow:
        raise VerificationFailure(f"Verify: MMS order below {min_order} for {', '.join(slow)}", report)
    return report


@dataclass
class TwinRunReport:
    eps: float
    times: np.ndarray
    delta: np.ndarray
    accumulator: np.ndarray
    C_fit: float
    margin: float  # min over the held-out window of (envelope - log growth)
    slack: float

    @property
    def passed(self):
        return bool(self.margin >= 0.0)

    def as_table(self):
        lines = [f"twin run eps={self.eps:.3e} C_fit={self.C_fit:.6e} margin={self.margin:.6e} slack={self.slack}",
                 f"{'t':>12} {'delta':>14} {'A':>14}"]
        for t, d, a in zip(self.times, self.delta, self.accumulator):
            lines.append(f"{t:>12.6g} {d:>14.6e} {a:>14.6e}")
        return "\n".join(lines)


def _difference_sq(a, b, grid):
    return float((np.sum((a.v1 - b.v1) ** 2) + np.sum((a.v2 - b.v2) ** 2) + np.sum((a.T - b.T) ** 2)) * grid.cell_volume)


def gronwall_integrand(record):
    """||grad v||^4 + ||grad T||^4 + ||v_z||^2 ||grad v_z||^2 + ||T_z||^2 ||grad T_z||^2 of one trajectory."""
    return (record.grad_v_sq**2 + record.grad_T_sq**2
            + record.vz_sq * record.grad_vz_sq + record.Tz_sq * record.grad_Tz_sq)


def twin_perturbation(grid, seed, alpha):
    pert = project_velocity(make_smooth_state(grid, seed, alpha=alpha), grid)
    norm = math.sqrt(_difference_sq(pert, State.rest(grid), grid))
    return State(pert.v1 / norm, pert.v2 / norm, pert.T / norm, 0.0)


def twin_run(config, eps, record_every=1, slack=None, perturbation=None):
    """Run the configured trajectory and a copy perturbed by eps * perturbation in lockstep.

    C_fit is the least-squares slope of log(delta / delta0) against A on the
    first half of the run (clipped at zero); the held-out second half must
    satisfy log(delta / delta0) <= slack * C_fit * A.
    """
    slack = my_settings.twin_slack if slack is None else slack
    grid = config.build_grid()
    params = config.build_params()
    forcing = config.build_forcing(grid)
    control = config.build_control()
    base = config.build_initial_state(grid)
    if perturbation is None:
        perturbation = twin_perturbation(grid, config.seed + 1, params.alpha)
    twin = State(base.v1 + eps * perturbation.v1, base.v2 + eps * perturbation.v2, base.T + eps * perturbation.T, base.t)

    times, delta, integrand = [], [], []

    def record(a, b):
        times.append(a.t)
        delta.append(_difference_sq(a, b, grid))
        integrand.append(gronwall_integrand(compute_norms(a, grid, params)))

    record(base, twin)
    step = 0
    while base.t < control.t_end:
        if control.dt > 0:
            dt = min(control.dt, control.t_end - base.t)
        else:
            dt = min(stable_dt(base, params, grid, control), stable_dt(twin, params, grid, control))
        if dt <= 0.0:
            break
        base = step_ssprk3(base, params, forcing, grid, dt, config.poisson_tol)
        twin = step_ssprk3(twin, params, forcing, grid, dt, config.poisson_tol)
        step += 1
        if step % record_every == 0 or base.t >= control.t_end:
            record(base, twin)

    times = np.array(times)
    delta = np.array(delta)
    accumulator = cumulative_trapezoid(np.array(integrand), times, initial=0.0)
    C_fit, margin = _fit_gronwall(times, delta, accumulator, control.t_end, slack)
    report = TwinRunReport(eps, times, delta, accumulator, C_fit, margin, slack)
    logger.info(f"Verify: twin run eps={eps:.2e} C_fit={C_fit:.4e} margin={margin:.3e}")
    return report


def _fit_gronwall(times, delta, accumulator, t_end, slack):
    if delta[0] == 0.0:
        # identical data: every later difference must vanish as well
        return 0.0, -float(np.max(delta))
    growth = np.log(np.maximum(delta, np.finfo(float).tiny) / delta[0])
    train = (times > 0) & (times <= 0.5 * t_end)
    held_out = times > 0.5 * t_end
    denom = float(np.sum(accumulator[train] ** 2))
    C_fit = max(0.0, float(np.sum(growth[train] * accumulator[train])) / denom) if denom > 0 else 0.0
    if not held_out.any():
        return C_fit, math.inf
    margin = float(np.min(slack * C_fit * accumulator[held_out] - growth[held_out]))
    return C_fit, margin


def epsilon_scaling(config, eps, record_every=1):
    """delta_eps / delta_(eps/2) per recorded time; 4 for a linear response."""
    full = twin_run(config, eps, record_every)
    half = twin_run(config, 0.5 * eps, record_every)
    with np.errstate(divide="ignore", invalid="ignore"):
        return full.times, full.delta / half.delta


def tracked_ledger(config):
    """Integrate a run config and return its norm records, one per step, integrals included."""
    grid = config.build_grid()
    params = config.build_params()
    forcing = config.build_forcing(grid)
    tracker = DissipationTracker(grid, params)
    records = []
    integrate(config.build_initial_state(grid), params, forcing, grid, config.build_control(),
              [Observer(lambda step, state: records.append(tracker(step, state)))], config.poisson_tol)
    return records, grid, params, forcing


def calibrate_family(configs):
    """kappa calibrated jointly over the runs of a family of run configs."""
    ledgers, cert_series = [], []
    for config in configs:
        records, grid, params, forcing = tracked_ledger(config)
        ledgers.append(records)
        cert_series.append(certificate_series(records, compute_forcing_norms(forcing, grid), params,
                                              poincare_constant(grid), grid.h, config.exp_cap))
    return calibrate_kappa(ledgers, cert_series)


def _cell(value, width, spec):
    return f"{'-':>{width}}" if value is None else f"{value:>{width}{spec}}"


@dataclass
class CalibrationStability:
    base: dict
    fine: dict
    tolerance: float

    @property
    def ratios(self):
        """fine / base per key; None where either side is uncalibrated or the base is zero."""
        out = {}
        for key in KAPPA_NAMES:
            a, b = self.base.get(key), self.fine.get(key)
            out[key] = b / a if a is not None and b is not None and a > 0 else None
        return out

    @property
    def passed(self):
        compared = [r for r in self.ratios.values() if r is not None]
        # a key calibrated on one grid and not the other has changed by more than any tolerance
        mismatched = [k for k in KAPPA_NAMES if (self.base.get(k) is None) != (self.fine.get(k) is None)]
        return bool(compared) and not mismatched and all(abs(r - 1.0) <= self.tolerance for r in compared)

    def as_table(self):
        lines = [f"kappa calibration stability, tolerance {self.tolerance:.0%}",
                 f"{'kappa':<8} {'base':>14} {'fine':>14} {'ratio':>9}"]
        for key, ratio in self.ratios.items():
            lines.append(f"{key:<8} {_cell(self.base.get(key), 14, '.6e')} {_cell(self.fine.get(key), 14, '.6e')} "
                         f"{_cell(ratio, 9, '.4f')}")
        return "\n".join(lines)


def calibration_stability(config, seeds, fine_cells, tolerance=0.1):
    """Calibrate kappa over one initial condition per seed at the config's grid and again
    with fine_cells cells per axis; the two calibrations must agree to within tolerance."""
    seeds = list(seeds)
    if not seeds:
        raise ConfigError("calibration needs at least one seed", key="seeds")
    if int(fine_cells) != fine_cells or fine_cells < 4:
        raise ConfigError(f"fine grid must have at least 4 cells per axis, got {fine_cells}", key="fine")
    family = [config.model_copy(update={"seed": seed}) for seed in seeds]
    refined = [c.model_copy(update={"Nx": int(fine_cells), "Ny": int(fine_cells), "Nz": int(fine_cells)})
               for c in family]
    report = CalibrationStability(calibrate_family(family), calibrate_family(refined), tolerance)
    logger.info(f"Verify: kappa calibration {config.Nx}x{config.Ny}x{config.Nz} vs {fine_cells}^3 "
                f"ratios {report.ratios}")
    return report
