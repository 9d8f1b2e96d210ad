# Norms of the estimate chain, the bound functions K1 ... Kt and the inequality monitor
#
# Gradient norms are face based: every cell face carries (difference / spacing)^2
# with weight 1/2 on wall faces, which makes -<lap phi, phi> equal the gradient
# norm exactly for the reflection ghost rules.
import math
from dataclasses import dataclass, field, fields, asdict, replace
from typing import Optional

import numpy as np

from modules.dynamics import (advect, transport_h, coriolis, rhs_temperature,
                              temperature_dissipation, _surface_pressure_term)
from modules.errors import CertificateDomainError, InsufficientDataError
from modules.fields import (pad, apply_bcs_velocity, apply_bcs_temperature,
                            V1_RULES, V2_RULES, SCALAR_RULES, VELOCITY2_RULES)
from modules.log import logger
from modules.operators import (d2dz2, lap_h, depth_average, fluctuation, broadcast_z,
                               diagnose_w, pad_w, inner, l2sq)
import modules.settings as my_settings

KAPPA_NAMES = ("kappa6", "kappa2", "kappaz", "kappaV", "kappat")


@dataclass(frozen=True)
class NormRecord:
    t: float
    v_l2sq: float
    grad_v_sq: float
    vz_sq: float
    grad_vz_sq: float
    vzz_sq: float
    T_l2sq: float
    grad_T_sq: float
    Tz_sq: float
    T_trace_sq: float
    vt_l6_6: float
    T_l6: float
    vbar_l2sq: float
    grad_vbar_sq: float
    lap_vbar_sq: float
    v_h1sq: float
    T_h1sq: float
    vt_l2sq: float
    grad_Tz_sq: float
    # running time integrals from the first tracked state, summed every step
    thermal_h_int: float = 0.0  # int ||grad_h T||^2 / Rt1
    thermal_v_int: float = 0.0  # int ||T_z||^2 / Rt2 + alpha |T|_surface^2
    viscous_int: float = 0.0  # int ||grad_h v||^2 / Re1 + ||v_z||^2 / Re2
    work_int: float = 0.0  # int 2h ||T|| ||grad_h v||

    @classmethod
    def columns(cls):
        return tuple(f.name for f in fields(cls))

    def values(self):
        return tuple(getattr(self, name) for name in self.columns())


@dataclass(frozen=True)
class ForcingNorms:
    l2sq: float
    h1: float  # ||Q||_{H^1}, not squared

    @classmethod
    def zero(cls):
        return cls(0.0, 0.0)


@dataclass(frozen=True)
class BoundCertificate:
    t: float
    K1: float
    K6: float
    K2: float
    Kz: float
    KV: float
    Kt: float
    KT6: float  # L^6 temperature bound, ||Q||_{H^1} t + ||T0||_{H^1}
    C_M: float
    kappa: dict = field(default_factory=dict)

    @classmethod
    def columns(cls):
        return ("K1", "K6", "K2", "Kz", "KV", "Kt", "KT6")

    def values(self):
        return tuple(getattr(self, name) for name in self.columns())


def _face_sum(g, face_axes):
    sq = g * g
    total = float(sq.sum())
    for axis in face_axes:
        lo = [slice(None)] * sq.ndim
        hi = [slice(None)] * sq.ndim
        lo[axis] = 0
        hi[axis] = -1
        total -= 0.5 * float(sq[tuple(lo)].sum() + sq[tuple(hi)].sum())
    return total


def _crop(a, axes):
    idx = [slice(None)] * a.ndim
    for axis in axes:
        idx[axis] = slice(1, -1)
    return a[tuple(idx)]


def _spacing(grid, axis):
    return (grid.dx, grid.dy, grid.dz)[axis]


def face_gradient_sq(phi_p, axes, grid):
    """Sum over the given axes of the face-based ||d phi / d axis||^2 of a padded array."""
    total = 0.0
    for axis in axes:
        others = [a for a in range(phi_p.ndim) if a != axis]
        g = _crop(np.diff(phi_p, axis=axis), others) / _spacing(grid, axis)
        total += _face_sum(g, (axis,))
    weight = grid.cell_volume if phi_p.ndim == 3 else grid.cell_area
    return total * weight


def _grad_of_dz_sq(v_p, grid):
    gz = np.diff(v_p, axis=2) / grid.dz
    total = 0.0
    for axis, other in ((0, 1), (1, 0)):
        g = _crop(np.diff(gz, axis=axis), (other,)) / _spacing(grid, axis)
        total += _face_sum(g, (axis, 2))
    return total * grid.cell_volume


def surface_trace(T_p):
    # top-face interpolant between the last interior cell and the Robin ghost
    return 0.5 * (T_p[1:-1, 1:-1, -1] + T_p[1:-1, 1:-1, -2])


def compute_norms(state, grid, params):
    v1_p, v2_p = apply_bcs_velocity(state, grid)
    T_p = apply_bcs_temperature(state, params, grid)
    v_l2sq = l2sq(state.v1, grid) + l2sq(state.v2, grid)
    grad_v_sq = face_gradient_sq(v1_p, (0, 1), grid) + face_gradient_sq(v2_p, (0, 1), grid)
    vz_sq = face_gradient_sq(v1_p, (2,), grid) + face_gradient_sq(v2_p, (2,), grid)
    grad_vz_sq = _grad_of_dz_sq(v1_p, grid) + _grad_of_dz_sq(v2_p, grid)
    vzz_sq = l2sq(d2dz2(v1_p, grid), grid) + l2sq(d2dz2(v2_p, grid), grid)

    T_l2sq = l2sq(state.T, grid)
    grad_T_sq = face_gradient_sq(T_p, (0, 1), grid)
    Tz_sq = face_gradient_sq(T_p, (2,), grid)
    trace = surface_trace(T_p)
    T_trace_sq = float(np.sum(trace * trace)) * grid.cell_area
    T_l6 = (float(np.sum(state.T**6)) * grid.cell_volume) ** (1.0 / 6.0)

    vt1 = fluctuation(state.v1, grid)
    vt2 = fluctuation(state.v2, grid)
    vt_sq = vt1 * vt1 + vt2 * vt2
    vt_l6_6 = float(np.sum(vt_sq**3)) * grid.cell_volume
    vt_l2sq = l2sq(vt1, grid) + l2sq(vt2, grid)

    vb1 = depth_average(state.v1, grid)
    vb2 = depth_average(state.v2, grid)
    rx, ry = VELOCITY2_RULES
    vb1_p, vb2_p = pad(vb1, rx), pad(vb2, ry)
    vbar_l2sq = l2sq(vb1, grid) + l2sq(vb2, grid)
    grad_vbar_sq = face_gradient_sq(vb1_p, (0, 1), grid) + face_gradient_sq(vb2_p, (0, 1), grid)
    lap_vbar_sq = l2sq(lap_h(vb1_p, grid), grid) + l2sq(lap_h(vb2_p, grid), grid)

    return NormRecord(t=float(state.t), v_l2sq=v_l2sq, grad_v_sq=grad_v_sq, vz_sq=vz_sq,
                      grad_vz_sq=grad_vz_sq, vzz_sq=vzz_sq, T_l2sq=T_l2sq, grad_T_sq=grad_T_sq,
                      Tz_sq=Tz_sq, T_trace_sq=T_trace_sq, vt_l6_6=vt_l6_6, T_l6=T_l6,
                      vbar_l2sq=vbar_l2sq, grad_vbar_sq=grad_vbar_sq, lap_vbar_sq=lap_vbar_sq,
                      v_h1sq=v_l2sq + grad_v_sq + vz_sq, T_h1sq=T_l2sq + grad_T_sq + Tz_sq,
                      vt_l2sq=vt_l2sq, grad_Tz_sq=_grad_of_dz_sq(T_p, grid))


INTEGRAL_COLUMNS = ("thermal_h_int", "thermal_v_int", "viscous_int", "work_int")


def integrand_rates(record, params, h):
    """Instantaneous integrands of the INTEGRAL_COLUMNS for one record."""
    return {"thermal_h_int": record.grad_T_sq / params.Rt1,
            "thermal_v_int": record.Tz_sq / params.Rt2 + params.alpha * record.T_trace_sq,
            "viscous_int": record.grad_v_sq / params.Re1 + record.vz_sq / params.Re2,
            "work_int": 2.0 * h * math.sqrt(record.T_l2sq * record.grad_v_sq)}


class DissipationTracker:
    """Observer callback for every step: norms of the state plus trapezoid sums of the
    dissipation and baroclinic-work rates since the first state it saw.

    `last` holds the newest record with its integrals filled in.
    """

    def __init__(self, grid, params):
        self.grid = grid
        self.params = params
        self.last = None
        self.steps = 0

    def __call__(self, step, state):
        record = compute_norms(state, self.grid, self.params)
        if self.last is not None:
            dt = record.t - self.last.t
            before = integrand_rates(self.last, self.params, self.grid.h)
            after = integrand_rates(record, self.params, self.grid.h)
            record = replace(record, **{name: getattr(self.last, name) + 0.5 * dt * (before[name] + after[name])
                                        for name in INTEGRAL_COLUMNS})
        self.last = record
        self.steps += 1
        return record


def compute_forcing_norms(forcing, grid):
    Q_p = pad(forcing.Q, SCALAR_RULES)
    l2 = l2sq(forcing.Q, grid)
    return ForcingNorms(l2sq=l2, h1=math.sqrt(l2 + face_gradient_sq(Q_p, (0, 1, 2), grid)))


def temperature_envelope_constant(params, h):
    # 2 (h^2 Rt2 + h / alpha), the e-folding time of the temperature decay envelope
    return 2.0 * (h * h * params.Rt2 + h / params.alpha)


def temperature_floor(params, h, Q_l2sq):
    return (2.0 * h * h * params.Rt2 + 2.0 * h / params.alpha) ** 2 * Q_l2sq


def _scaled_exp(exponent, prefactor, cap):
    """exp(exponent) * prefactor evaluated in log space; +inf once the log exceeds cap."""
    if prefactor == 0.0:
        return 0.0
    if not (math.isfinite(exponent) and math.isfinite(prefactor)):
        return math.inf
    log_value = exponent + math.log(prefactor)
    if log_value > cap:
        return math.inf
    return math.exp(log_value)


def _power(x, p):
    try:
        return x**p
    except OverflowError:
        return math.inf


def _times(a, b):
    # a * b with 0 * inf taken as 0 (a zero time or zero data contributes nothing)
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def _square(x, cap):
    if not math.isfinite(x) or (x > 0 and 2.0 * math.log(x) > cap):
        return math.inf
    return x * x


def bound_certificate(t, init, forcing_norms, params, C_M, h, exp_cap=None, kappa=None):
    """Evaluate K1(t) ... Kt(t) and the L^6 temperature bound from the t = 0 norms."""
    cap = my_settings.exp_cap if exp_cap is None else exp_cap
    inputs = {"t": t, "C_M": C_M, "h": h, "||Q||^2": forcing_norms.l2sq, "||Q||_H1": forcing_norms.h1}
    inputs.update({name: getattr(init, name) for name in ("vbar_l2sq", "vt_l2sq", "T_l2sq", "v_h1sq", "T_h1sq")})
    for name, value in inputs.items():
        if not math.isfinite(value) or value < 0:
            raise CertificateDomainError(f"Certify: input {name} must be finite and >= 0, got {value}")

    Q2 = forcing_norms.l2sq
    thermal = init.T_l2sq + temperature_floor(params, h, Q2)
    K1 = (temperature_envelope_constant(params, h) * Q2 * t
          + (h * init.vbar_l2sq + init.vt_l2sq)
          + (1.0 + C_M * h * h * params.Re1**2 + h * h * params.Re1 * t) * thermal)
    K1_sq = _square(K1, cap)
    v0 = init.v_h1sq
    K6 = _scaled_exp(K1_sq, _power(v0, 3) + K1_sq, cap)
    K2 = _scaled_exp(K1_sq, v0 + K1 + K6, cap)
    K6_23 = K6 ** (2.0 / 3.0) if math.isfinite(K6) else math.inf
    K2_sq = _square(K2, cap)
    Kz = _scaled_exp(_times(K2_sq + K6_23, t), v0 + K1, cap)
    KV = _scaled_exp(_times(K6_23, t) + _times(K1, Kz), v0 + K1, cap)
    K6_sq = _square(K6, cap)
    KV_sq = _square(KV, cap)
    Kt = _scaled_exp(_times(K6_sq, t) + KV_sq, init.T_h1sq + Q2, cap)
    KT6 = forcing_norms.h1 * t + math.sqrt(init.T_h1sq)
    return BoundCertificate(t=float(t), K1=K1, K6=K6, K2=K2, Kz=Kz, KV=KV, Kt=Kt, KT6=KT6,
                            C_M=C_M, kappa=dict(kappa or {}))


def certificate_series(ledger, forcing_norms, params, C_M, h, exp_cap=None, kappa=None):
    if not ledger:
        return []
    init = ledger[0]
    return [bound_certificate(row.t - init.t, init, forcing_norms, params, C_M, h, exp_cap, kappa) for row in ledger]


@dataclass
class InequalityResult:
    name: str
    kind: str  # quantitative | qualitative
    passed: Optional[bool]  # None: measured only, no calibration supplied
    margin: float  # min over rows of (rhs - lhs); for measured-only checks, the largest lhs / bound ratio
    worst_t: float
    lhs: float
    rhs: float

    @property
    def status(self):
        if self.passed is None:
            return "measured"
        return my_settings.CERT_PASS if self.passed else my_settings.CERT_FAIL


@dataclass
class MonitorReport:
    results: list

    @property
    def passed(self):
        return all(r.passed is not False for r in self.results)

    def get(self, name):
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def rows(self):
        return [{**asdict(r), "status": r.status} for r in self.results]

    def as_table(self):
        lines = [f"{'inequality':<12} {'kind':<13} {'status':<9} {'margin':>14} {'worst t':>12} {'lhs':>14} {'rhs':>14}"]
        for r in self.results:
            lines.append(f"{r.name:<12} {r.kind:<13} {r.status:<9} {r.margin:>14.6e} {r.worst_t:>12.6g} {r.lhs:>14.6e} {r.rhs:>14.6e}")
        return "\n".join(lines)


@dataclass(frozen=True)
class MonitorTolerances:
    slack: float = 1.05
    min_rows: int = 10
    poincare_dz_factor: float = 5.0  # P2 allowance (1 + factor dz^2 / h^2)

    @classmethod
    def from_settings(cls):
        return cls(slack=my_settings.quant_slack)


def _pointwise(name, kind, times, lhs, rhs, passes=None, skip_initial=False):
    """Every row is checked; skip_initial leaves row 0 out of the reported margin,
    for integrated forms whose two sides both start at exactly zero."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    with np.errstate(invalid="ignore"):
        margins = np.where(np.isinf(rhs) & (rhs > 0), np.inf, rhs - lhs)
    first = 1 if skip_initial and len(margins) > 1 else 0
    worst = first + int(np.argmin(margins[first:]))
    ok = bool(np.all(lhs <= rhs)) if passes is None else passes
    return InequalityResult(name, kind, ok, float(margins[worst]), float(times[worst]),
                            float(lhs[worst]), float(rhs[worst]))


def check_inequalities(ledger, certs, params, grid, forcing_norms, C_M, tolerances=None):
    """Check the explicit-constant inequalities row by row (or cumulatively in time)
    and, when kappa calibrations are present on the certificates, the generic-constant bounds.

    Time integrals come from the tracked INTEGRAL_COLUMNS, taken relative to row 0,
    so they are as fine as the stepping however sparse the ledger is.
    """
    tol = tolerances or MonitorTolerances.from_settings()
    if len(ledger) < tol.min_rows:
        raise InsufficientDataError(f"Certify: need at least {tol.min_rows} ledger rows, got {len(ledger)}")
    if len(certs) != len(ledger):
        raise InsufficientDataError(f"Certify: {len(certs)} certificates for {len(ledger)} ledger rows")
    h = grid.h
    s = tol.slack
    col = {name: np.array([getattr(r, name) for r in ledger]) for name in NormRecord.columns()}
    times = col["t"] - col["t"][0]
    Q2 = forcing_norms.l2sq
    c_T = temperature_envelope_constant(params, h)
    floor = temperature_floor(params, h, Q2)
    T0 = col["T_l2sq"][0]
    kinetic0 = h * col["vbar_l2sq"][0] + col["vt_l2sq"][0]
    results = []

    p2_rhs = (2 * h * h * col["Tz_sq"] + 2 * h * col["T_trace_sq"]) * (1 + tol.poincare_dz_factor * grid.dz**2 / h**2)
    results.append(_pointwise("P2", "quantitative", times, col["T_l2sq"], p2_rhs))

    t2_rhs = s * (np.exp(-times / c_T) * T0 + floor)
    results.append(_pointwise("T-2", "quantitative", times, col["T_l2sq"], t2_rhs))

    since = {name: col[name] - col[name][0] for name in INTEGRAL_COLUMNS}
    integral = 2.0 * since["thermal_h_int"] + since["thermal_v_int"]
    te_lhs = col["T_l2sq"] - T0 + integral
    te_rhs = s * c_T * Q2 * times + (s - 1.0) * integral
    results.append(_pointwise("T_E", "quantitative", times, te_lhs, te_rhs, skip_initial=True))

    t2i_lhs = since["thermal_h_int"] + since["thermal_v_int"]
    t2i_rhs = s * (c_T * Q2 * times + T0 + floor)
    results.append(_pointwise("T-2I", "quantitative", times, t2i_lhs, t2i_rhs))

    thermal_bound = T0 + floor
    vee_rhs = s * (np.exp(-times / (C_M * params.Re1)) * kinetic0 + C_M * h * h * params.Re1**2 * thermal_bound)
    results.append(_pointwise("VEE", "quantitative", times, col["v_l2sq"], vee_rhs))

    veei_lhs = since["viscous_int"]
    # initial kinetic energy enters undecayed
    veei_rhs = s * (h * h * params.Re1 * thermal_bound * times + kinetic0
                    + C_M * h * h * params.Re1**2 * thermal_bound)
    results.append(_pointwise("VEEI", "quantitative", times, veei_lhs, veei_rhs))

    # kinetic budget: growth only through the baroclinic work h ||T|| ||grad v||
    viscous_integral = 2.0 * since["viscous_int"]
    budget_lhs = col["v_l2sq"] - col["v_l2sq"][0] + viscous_integral
    budget_rhs = s * since["work_int"] + (s - 1.0) * viscous_integral
    results.append(_pointwise("VEE-budget", "quantitative", times, budget_lhs, budget_rhs, skip_initial=True))

    K1 = np.array([c.K1 for c in certs])
    k1_lhs = col["v_l2sq"] + veei_lhs + col["T_l2sq"] + t2i_lhs
    results.append(_pointwise("K-1", "quantitative", times, k1_lhs, s * K1))

    KT6 = np.array([c.KT6 for c in certs])
    results.append(_pointwise("K-T", "quantitative", times, col["T_l6"], s * KT6))

    qualitative = (("K-6", "kappa6", col["vt_l6_6"], "K6"),
                   ("K-2", "kappa2", col["grad_vbar_sq"], "K2"),
                   ("K-Z", "kappaz", col["vz_sq"], "Kz"),
                   ("K-V", "kappaV", col["grad_v_sq"], "KV"),
                   ("V-T", "kappat", col["T_h1sq"], "Kt"))
    for name, key, lhs, bound_name in qualitative:
        bound = np.array([getattr(c, bound_name) for c in certs])
        kappa = certs[0].kappa.get(key)
        if kappa is None:
            ratio = _max_ratio(lhs, bound)
            worst = int(np.argmax(_ratios(lhs, bound)))
            results.append(InequalityResult(name, "qualitative", None, ratio, float(times[worst]),
                                            float(lhs[worst]), float(bound[worst])))
        else:
            with np.errstate(invalid="ignore"):
                rhs = np.where(np.isinf(bound), np.inf, kappa * bound)
            results.append(_pointwise(name, "qualitative", times, lhs, rhs))

    report = MonitorReport(results)
    failed = [r.name for r in results if r.passed is False]
    if failed:
        logger.warning(f"Certify: failed inequalities {', '.join(failed)}")
    else:
        logger.info(f"Certify: {len(results)} inequalities checked over {len(ledger)} rows, none failed")
    return report


def _ratios(lhs, bound):
    # an infinite bound constrains nothing (ratio 0); a zero bound under a positive norm cannot be met (inf)
    lhs = np.asarray(lhs, dtype=float)
    bound = np.asarray(bound, dtype=float)
    out = np.zeros_like(lhs)
    usable = np.isfinite(bound) & (bound > 0)
    out[usable] = lhs[usable] / bound[usable]
    out[(bound == 0) & (lhs > 0)] = np.inf
    return out


def _max_ratio(lhs, bound):
    ratios = _ratios(lhs, bound)
    return float(ratios.max()) if ratios.size else 0.0


def _informative_rows(bound):
    bound = np.asarray(bound, dtype=float)
    return int(np.count_nonzero(np.isfinite(bound) & (bound > 0)))


CALIBRATION_PAIRS = (("kappa6", "vt_l6_6", "K6"), ("kappa2", "grad_vbar_sq", "K2"), ("kappaz", "vz_sq", "Kz"),
                     ("kappaV", "grad_v_sq", "KV"), ("kappat", "T_h1sq", "Kt"))


def calibrate_kappa(ledgers, cert_series):
    """Smallest multipliers kappa with norm <= kappa K over every row of a run family.

    A key comes back as None when no row has a finite positive bound to calibrate
    against, or when no finite multiplier fits; those checks then stay measured.
    """
    kappa = {}
    for key, norm, bound in CALIBRATION_PAIRS:
        best = 0.0
        informative = 0
        for ledger, certs in zip(ledgers, cert_series):
            lhs = [getattr(r, norm) for r in ledger]
            rhs = [getattr(c, bound) for c in certs]
            informative += _informative_rows(rhs)
            best = max(best, _max_ratio(lhs, rhs))
        if informative == 0:
            logger.warning(f"Certify: no finite {bound} in the family, {key} left uncalibrated")
            best = None
        elif not math.isfinite(best):
            logger.warning(f"Certify: {bound} vanishes under a positive norm, {key} left uncalibrated")
            best = None
        kappa[key] = best
    logger.debug(f"Certify: calibrated {kappa}")
    return kappa


@dataclass(frozen=True)
class TemperatureBudget:
    """Terms of d||T||^2/dt = 2<Q,T> - 2<L2 T,T> - 2<advection,T>; residual compares the total with the pieces."""
    rate: float
    source: float
    dissipation: float
    advection: float

    @property
    def residual(self):
        return self.rate - (self.source - self.dissipation)


def temperature_budget(state, params, forcing, grid):
    v1_p, v2_p = apply_bcs_velocity(state, grid)
    w_p = pad_w(diagnose_w(v1_p, v2_p, grid))
    T_p = apply_bcs_temperature(state, params, grid)
    return TemperatureBudget(rate=2.0 * inner(rhs_temperature(state, params, forcing, grid), state.T, grid),
                             source=2.0 * inner(forcing.Q, state.T, grid),
                             dissipation=2.0 * inner(temperature_dissipation(T_p, params, grid), state.T, grid),
                             advection=2.0 * inner(advect(v1_p, v2_p, w_p, T_p, grid), state.T, grid))


def _relative_pairing(a, b, grid):
    scale = math.sqrt(l2sq(a, grid) * l2sq(b, grid))
    return 0.0 if scale == 0.0 else abs(inner(a, b, grid)) / scale


def transport_pairings(state, params, p_s, grid):
    """Relative size of the pairings that vanish in the continuum.

    Quadratic pairings vanish to rounding; the |.|^4-weighted ones only
    decay under refinement.
    """
    v1_p, v2_p = apply_bcs_velocity(state, grid)
    w_p = pad_w(diagnose_w(v1_p, v2_p, grid))
    T_p = apply_bcs_temperature(state, params, grid)
    a1 = advect(v1_p, v2_p, w_p, v1_p, grid)
    a2 = advect(v1_p, v2_p, w_p, v2_p, grid)
    aT = advect(v1_p, v2_p, w_p, T_p, grid)

    def pair2(x, y):
        scale = math.sqrt((l2sq(x[0], grid) + l2sq(x[1], grid)) * (l2sq(y[0], grid) + l2sq(y[1], grid)))
        total = inner(x[0], y[0], grid) + inner(x[1], y[1], grid)
        return 0.0 if scale == 0.0 else abs(total) / scale

    vt = (fluctuation(state.v1, grid), fluctuation(state.v2, grid))
    vt_p = (pad(vt[0], V1_RULES), pad(vt[1], V2_RULES))
    wt_p = pad_w(diagnose_w(*vt_p, grid))
    vb_p = (pad(np.array(broadcast_z(depth_average(state.v1, grid), grid)), V1_RULES),
            pad(np.array(broadcast_z(depth_average(state.v2, grid), grid)), V2_RULES))
    weight = vt[0] ** 2 + vt[1] ** 2
    weighted = (weight**2 * vt[0], weight**2 * vt[1])
    self_transport = tuple(advect(*vt_p, wt_p, vt_p[c], grid) for c in range(2))
    bar_transport = tuple(transport_h(*vb_p, vt_p[c], grid) for c in range(2))
    if p_s is None:
        p_s = np.zeros(grid.shape2)
    return {
        "momentum": pair2((a1, a2), (state.v1, state.v2)),
        "temperature": _relative_pairing(aT, state.T, grid),
        "coriolis": pair2(coriolis(state.v1, state.v2, params.f0, params.beta, grid), (state.v1, state.v2)),
        "surface_pressure": pair2(_surface_pressure_term(p_s, grid), (state.v1, state.v2)),
        "l6_fluctuation": pair2(self_transport, weighted),
        "l6_barotropic": pair2(bar_transport, weighted),
        "l6_temperature": _relative_pairing(aT, np.abs(state.T) ** 4 * state.T, grid),
    }
