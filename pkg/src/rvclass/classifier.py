"""
Class-membership criteria and index estimators.

All criteria read the log-domain function l(y) = log U(e^y):

    orders            l(y)/y                     -> lower/upper orders mu, nu
    ratio_extrema     l(y + log t) - l(y)        -> log U_*(t), log U^*(t)
    ratio_scaled_limit  r*s + l(y + s) - l(y)    -> limit of t^r U(tx)/U(x), t = e^s

Membership in M is read off the limit of l(y)/y, M_inf / M_-inf off its
divergence, O-RV and RV off the ratio extrema.  Verdicts are numerical
evidence on finite grids, never proofs; every one keeps its trail.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .classes import CLASSES, M, M_INF, M_MINUS_INF, ORV, RV, SV, Membership
from .limits import (
    DEFAULT_TOLERANCES,
    Kind,
    LimitVerdict,
    Tolerances,
    decision_extrema,
    envelope_trend,
    limit_verdict,
)
from .logfn import EvaluationError, GridSpec, LogFunction

DEFAULT_T_GRID = (2.0, 4.0, 8.0, math.exp(3.0), math.exp(4.0))
DEFAULT_LINEAR_GRID = GridSpec.linear(2e5, 1e6, windows=8, points=2000)
DEFAULT_GEOMETRIC_GRID = GridSpec(math.exp(12.0), math.e, "geometric", 2000, 8)
DEFAULT_SCALE_GRID = GridSpec.geometric(5e7, 5e8, windows=8, points=4000)


class BracketError(ValueError):
    """Both ends of a threshold bracket give the same kind of limit."""


class NotApplicableError(ValueError):
    """The scaled-ratio limits do not dichotomise: the function is outside M."""


class Extreme(str, enum.Enum):
    M_INF = "M_inf"
    M_MINUS_INF = "M_minus_inf"
    NEITHER = "neither"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ClassifierConfig:
    """Grids and tolerances for a full classification run.

    ``grid`` probes l(y)/y and the ratio increments; ``s_grid`` is the grid
    in s = log t for the scaled-ratio limits; ``x_probes`` are the points x
    at which those limits are taken.
    """

    grid: GridSpec = DEFAULT_LINEAR_GRID
    s_grid: GridSpec = DEFAULT_SCALE_GRID
    t_grid: tuple = DEFAULT_T_GRID
    tols: Tolerances = DEFAULT_TOLERANCES
    x_probes: tuple = (math.exp(3.0), math.exp(10.0), math.exp(30.0))
    r_bracket: tuple = (-10.0, 10.0)
    bisect_width: float = 1e-3
    band_tol: float = 0.02

    def __post_init__(self):
        if not self.t_grid or any(not t >= 1 for t in self.t_grid):
            raise ValueError("t_grid must be a nonempty list of t >= 1")
        if not self.r_bracket[0] < self.r_bracket[1]:
            raise ValueError("r_bracket must be increasing")


class ORVFit(NamedTuple):
    """Bounds c^-1 t^beta <= U(tx)/U(x) <= c t^alpha fitted over the t grid."""

    alpha: float
    beta: float
    c: float
    residuals: tuple


@dataclass(frozen=True)
class ClassificationReport:
    verdicts: dict
    rho_hat: float | None
    mu_hat: float | None
    nu_hat: float | None
    orv_fit: ORVFit | None
    tau_hat: float | None
    rv_index: float | None = None
    trails: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    notes: tuple = ()
    empirical: bool = False

    def to_json_dict(self, target: str) -> dict:
        def num(v):
            return None if v is None or not math.isfinite(v) else float(v)

        fit = None
        if self.orv_fit is not None:
            fit = {"alpha": num(self.orv_fit.alpha), "beta": num(self.orv_fit.beta), "c": num(self.orv_fit.c)}
        evidence = [dict(criterion=name, **trail.to_dict()) for name, trail in self.trails.items()]
        out = {
            "target": target,
            "verdicts": {name: self.verdicts[name].value for name in CLASSES},
            "rho_hat": num(self.rho_hat),
            "mu_hat": num(self.mu_hat),
            "nu_hat": num(self.nu_hat),
            "orv_fit": fit,
            "tau_hat": num(self.tau_hat),
            "evidence": evidence,
            "x_empirical": self.empirical,
            "x_rv_index": num(self.rv_index),
            "x_errors": dict(self.errors),
            "x_notes": list(self.notes),
        }
        return out


# --------------------------------------------------------------------------
# orders and the class M

def orders(U: LogFunction, grid: GridSpec, tols: Tolerances = DEFAULT_TOLERANCES):
    """Lower and upper orders: liminf and limsup of log U(x)/log x.

    Returns (mu_hat, nu_hat, verdict); both orders are -inf/+inf together
    when l(y)/y diverges.
    """
    v = limit_verdict(lambda y: U(y) / y, grid, tols)
    return (*_orders_from(v), v)


def _orders_from(v: LimitVerdict):
    if v.kind is Kind.DIVERGES_MINUS:
        return -math.inf, -math.inf
    if v.kind is Kind.DIVERGES_PLUS:
        return math.inf, math.inf
    return v.liminf_est, v.limsup_est


def secant_index(U: LogFunction, v: LimitVerdict, grid: GridSpec,
                 tols: Tolerances = DEFAULT_TOLERANCES) -> float:
    """Slope (l(y1) - l(y0))/(y1 - y0) across the decision windows of ``v``.

    When l(y)/y converges to rho this slope converges to rho as well (y1/y0
    stays bounded away from 1), and unlike l(y)/y it is blind to a constant
    factor in U.
    """
    rows = v.evidence
    y0 = rows[max(0, len(rows) - tols.decision_windows)][0]
    y1 = grid.y_end
    return (U(y1) - U(y0)) / (y1 - y0)


def _m_from_orders(v: LimitVerdict, U: LogFunction, grid: GridSpec, tols: Tolerances):
    if v.kind is Kind.CONVERGES:
        return Membership.IN, secant_index(U, v, grid, tols)
    if v.kind is Kind.OSCILLATES and v.spread > 0:
        return Membership.OUT, None
    return Membership.INCONCLUSIVE, None


def _extreme_from_orders(v: LimitVerdict, tols: Tolerances = DEFAULT_TOLERANCES) -> Extreme:
    if v.kind is Kind.DIVERGES_MINUS:
        return Extreme.M_INF
    if v.kind is Kind.DIVERGES_PLUS:
        return Extreme.M_MINUS_INF
    if v.kind in (Kind.CONVERGES, Kind.OSCILLATES):
        return Extreme.NEITHER
    # orders that neither converge nor settle into an oscillation still rule
    # out both extremes when neither envelope keeps growing
    mins, maxs = decision_extrema(v.evidence, tols)
    if envelope_trend(maxs, +1, tols) in ("stable", "bounded") and envelope_trend(mins, -1, tols) in ("stable", "bounded"):
        return Extreme.NEITHER
    return Extreme.INCONCLUSIVE


def classify_M(U: LogFunction, grid: GridSpec, tols: Tolerances = DEFAULT_TOLERANCES):
    """Membership in M through the limit of log U(x)/log x.

    Returns (membership, rho_hat or None, orders verdict).  rho_hat is the
    secant slope of l over the decision windows (see ``secant_index``).
    Diverging orders give INCONCLUSIVE here; ``classify_M_extremes``
    handles them.
    """
    v = orders(U, grid, tols)[2]
    return (*_m_from_orders(v, U, grid, tols), v)


def classify_M_extremes(U: LogFunction, grid: GridSpec, tols: Tolerances = DEFAULT_TOLERANCES) -> Extreme:
    return _extreme_from_orders(orders(U, grid, tols)[2], tols)


# --------------------------------------------------------------------------
# ratio U(tx)/U(x): O-RV and RV

def ratio_extrema(U: LogFunction, t: float, grid: GridSpec, tols: Tolerances = DEFAULT_TOLERANCES):
    """Estimates of log U_*(t) and log U^*(t).

    Returns (log_lower, log_upper, verdict) where unbounded sides are +-inf.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    s = math.log(t)
    v = limit_verdict(lambda y: U(y + s) - U(y), grid, tols)
    if v.kind is Kind.CONVERGES:
        return v.value, v.value, v
    return v.liminf_est, v.limsup_est, v


def _ratio_trails(U, t_grid, grid, tols):
    return {float(t): ratio_extrema(U, t, grid, tols)[2] for t in t_grid}


def _diverging(v: LimitVerdict, tols: Tolerances) -> bool:
    if v.kind in (Kind.DIVERGES_PLUS, Kind.DIVERGES_MINUS):
        return True
    mins, maxs = decision_extrema(v.evidence, tols)
    return envelope_trend(maxs, +1, tols) == "runaway" or envelope_trend(mins, -1, tols) == "runaway"


def _orv_from_trails(trails: dict, tols: Tolerances):
    if any(_diverging(v, tols) for v in trails.values()):
        return Membership.OUT, None
    upper, lower = [], []
    for v in trails.values():
        mins, maxs = decision_extrema(v.evidence, tols)
        if v.kind is not Kind.CONVERGES and not (
            envelope_trend(maxs, +1, tols) in ("stable", "bounded")
            and envelope_trend(mins, -1, tols) in ("stable", "bounded")
        ):
            return Membership.INCONCLUSIVE, None
        upper.append(maxs.max())
        lower.append(mins.min())
    return Membership.IN, _fit_orv_bounds(np.log(list(trails)), np.array(upper), np.array(lower))


def _fit_orv_bounds(s, upper, lower) -> ORVFit:
    design = np.column_stack([s, np.ones_like(s)])
    alpha = np.linalg.lstsq(design, upper, rcond=None)[0][0]
    beta = np.linalg.lstsq(design, lower, rcond=None)[0][0]
    res_up = upper - alpha * s
    res_lo = beta * s - lower
    log_c = max(0.0, float(res_up.max()), float(res_lo.max()))
    return ORVFit(float(alpha), float(beta), math.exp(log_c), (tuple(res_up), tuple(res_lo)))


def classify_ORV(U: LogFunction, t_grid, x_grid: GridSpec, tols: Tolerances = DEFAULT_TOLERANCES):
    """O-regular variation from the ratio extrema over ``t_grid``.

    IN when every ratio stays bounded with non-growing window extrema, OUT
    as soon as one diverges, INCONCLUSIVE otherwise.  For IN the bounds
    c^-1 t^beta <= U(tx)/U(x) <= c t^alpha are fitted by least squares of
    the upper (lower) extrema against log t; c absorbs the worst residual.

    Returns (membership, fit or None, trails).
    """
    if not t_grid or any(not t >= 1 for t in t_grid):
        raise ValueError("t_grid must be a nonempty list of t >= 1")
    trails = _ratio_trails(U, t_grid, x_grid, tols)
    return (*_orv_from_trails(trails, tols), trails)


def _rv_from_trails(trails: dict, tols: Tolerances):
    if any(v.kind is Kind.OSCILLATES or _diverging(v, tols) for v in trails.values()):
        return Membership.OUT, None
    if any(v.kind is not Kind.CONVERGES for v in trails.values()):
        return Membership.INCONCLUSIVE, None
    s = np.log(list(trails))
    vals = np.array([v.value for v in trails.values()])
    rho = float(s @ vals / (s @ s))
    if np.max(np.abs(vals - rho * s)) >= tols.tol_converge:
        return Membership.INCONCLUSIVE, None
    return Membership.IN, rho


def classify_RV(U: LogFunction, t_grid, x_grid: GridSpec, tols: Tolerances = DEFAULT_TOLERANCES):
    """Regular variation: U(tx)/U(x) must converge for every t, to t^rho.

    Returns (membership, index or None, sv_flag, trails); ``sv_flag`` is set
    when the index is zero within tol_converge.
    """
    if not t_grid or any(not t > 1 for t in t_grid):
        raise ValueError("t_grid must be a nonempty list of t > 1")
    trails = _ratio_trails(U, t_grid, x_grid, tols)
    member, rho = _rv_from_trails(trails, tols)
    sv = member is Membership.IN and abs(rho) < tols.tol_converge
    return member, rho, sv, trails


# --------------------------------------------------------------------------
# limits in t for fixed x

def ratio_scaled_limit(U: LogFunction, r: float, x: float, s_grid: GridSpec,
                       tols: Tolerances = DEFAULT_TOLERANCES) -> LimitVerdict:
    """Verdict on t^r U(tx)/U(x) as t -> infinity, in log form r*s + l(y+s) - l(y).

    DIVERGES_MINUS means the limit is 0, DIVERGES_PLUS means it is infinite;
    see ``limit_label``.
    """
    if not x > 0:
        raise ValueError("x must be positive")
    y = math.log(x)
    base = U(y)
    return limit_verdict(lambda s: r * s + U(y + s) - base, s_grid, tols)


def limit_label(v: LimitVerdict) -> str:
    """Map a log-domain verdict to the limit it implies: zero/infinity/finite/undetermined."""
    return {
        Kind.DIVERGES_MINUS: "zero",
        Kind.DIVERGES_PLUS: "infinity",
        Kind.CONVERGES: "finite",
    }.get(v.kind, "undetermined")


def threshold_band(U: LogFunction, x_probe: float, r_bracket, s_grid: GridSpec,
                   tols: Tolerances = DEFAULT_TOLERANCES, width: float = 1e-3):
    """Bisect for the edges of the r-ranges with limit 0 and with limit infinity.

    Returns (r_zero, r_infinity): the largest r seen with limit 0 and the
    smallest with limit infinity.  Between them lie r values whose scaled
    ratio neither vanishes nor explodes on the grid.
    """
    lo, hi = map(float, r_bracket)
    seen = {}

    def label(r):
        if r not in seen:
            seen[r] = limit_label(ratio_scaled_limit(U, r, x_probe, s_grid, tols))
        return seen[r]

    if label(lo) != "zero" or label(hi) != "infinity":
        raise BracketError(
            f"bracket [{lo}, {hi}] gives limits ({label(lo)}, {label(hi)}), need (zero, infinity)"
        )
    z_lo, z_hi = lo, hi
    while z_hi - z_lo > width / 2:
        mid = 0.5 * (z_lo + z_hi)
        if label(mid) == "zero":
            z_lo = mid
        else:
            z_hi = mid
    i_lo, i_hi = z_lo, hi
    while i_hi - i_lo > width / 2:
        mid = 0.5 * (i_lo + i_hi)
        if label(mid) == "infinity":
            i_hi = mid
        else:
            i_lo = mid
    return z_lo, i_hi


def theorem1_threshold(U: LogFunction, x_probe: float, r_bracket, s_grid: GridSpec,
                       tols: Tolerances = DEFAULT_TOLERANCES, width: float = 1e-3,
                       band_tol: float = 0.02) -> float:
    """Threshold tau where t^r U(tx)/U(x) switches from 0 (r < tau) to infinity (r > tau).

    For U in M the threshold equals -rho_U.  The search brackets r to
    ``width``; a band of undetermined r wider than ``band_tol`` means the
    dichotomy fails (e.g. x^sin(x)) and raises NotApplicableError.
    """
    r_zero, r_inf = threshold_band(U, x_probe, r_bracket, s_grid, tols, width)
    if r_inf - r_zero > band_tol:
        raise NotApplicableError(
            f"no threshold: limits undetermined for r in ({r_zero:.4g}, {r_inf:.4g})"
        )
    return 0.5 * (r_zero + r_inf)


def uct_envelope(U: LogFunction, r: float, c: float, d: float, s_grid: GridSpec,
                 x_resolution: int = 64, mode: str = "sup",
                 tols: Tolerances = DEFAULT_TOLERANCES) -> LimitVerdict:
    """Verdict on t^r sup_{x in [c,d]} U(tx)/U(x) (or inf) as t -> infinity.

    Only compact intervals 1 < c < d < infinity are accepted.
    """
    if mode not in ("sup", "inf"):
        raise ValueError("mode must be 'sup' or 'inf'")
    if not (math.isfinite(c) and math.isfinite(d)):
        raise ValueError("uniform convergence is only asserted on compact intervals")
    if not 1 < c < d:
        raise ValueError("need 1 < c < d")
    if x_resolution < 2:
        raise ValueError("x_resolution must be at least 2")
    ys = np.linspace(math.log(c), math.log(d), x_resolution)
    base = U(ys)
    reduce = np.max if mode == "sup" else np.min

    def h(s):
        out = np.empty_like(s)
        for k in range(0, s.size, 4096):
            block = s[k:k + 4096]
            out[k:k + 4096] = reduce(U(ys[:, None] + block[None, :]) - base[:, None], axis=0)
        return r * s + out

    return limit_verdict(h, s_grid, tols)


def index_function_probe(U: LogFunction, grid: GridSpec, h_step: float):
    """Finite-difference slope (l(y + h) - l(y))/h along the grid.

    For U = exp{alpha + int beta ds/s} with slowly varying alpha this tracks
    the index function beta; it is a diagnostic, not a verdict.
    """
    if not h_step > 0:
        raise ValueError("h_step must be positive")
    ys = grid.points()
    return ys, (U(ys + h_step) - U(ys)) / h_step


# --------------------------------------------------------------------------
# orchestration

def full_report(U: LogFunction, config: ClassifierConfig | None = None,
                empirical: bool = False) -> ClassificationReport:
    """Run every criterion and reconcile the verdicts with the known inclusions.

    Per-criterion evaluation failures are recorded in ``errors`` and the
    affected verdicts are left inconclusive; a threshold search that finds
    no dichotomy is recorded in ``notes``.
    """
    cfg = config or ClassifierConfig()
    tols = cfg.tols
    errors, trails, notes = {}, {}, []

    mu = nu = rho = tau = rv_index = None
    m_member, extreme = Membership.INCONCLUSIVE, Extreme.INCONCLUSIVE
    orders_v = None
    try:
        mu, nu, orders_v = orders(U, cfg.grid, tols)
        trails["orders"] = orders_v
        m_member, rho = _m_from_orders(orders_v, U, cfg.grid, tols)
        extreme = _extreme_from_orders(orders_v, tols)
    except EvaluationError as exc:
        errors["orders"] = str(exc)

    ratio = {}
    for t in cfg.t_grid:
        try:
            ratio[float(t)] = ratio_extrema(U, t, cfg.grid, tols)[2]
            trails[f"ratio:{t:g}"] = ratio[float(t)]
        except EvaluationError as exc:
            errors[f"ratio:{t:g}"] = str(exc)
    orv, fit = Membership.INCONCLUSIVE, None
    rv = Membership.INCONCLUSIVE
    if ratio:
        orv, fit = _orv_from_trails(ratio, tols)
        rv_trails = {t: v for t, v in ratio.items() if t > 1}
        if rv_trails:
            rv, rv_index = _rv_from_trails(rv_trails, tols)
        if len(ratio) < len(cfg.t_grid):
            if orv is Membership.IN:
                orv, fit = Membership.INCONCLUSIVE, None
            if rv is Membership.IN:
                rv, rv_index = Membership.INCONCLUSIVE, None

    if m_member is Membership.IN:
        try:
            tau = theorem1_threshold(U, cfg.x_probes[0], cfg.r_bracket, cfg.s_grid, tols,
                                     cfg.bisect_width, cfg.band_tol)
        except EvaluationError as exc:
            errors["threshold"] = str(exc)
        except (BracketError, NotApplicableError) as exc:
            notes.append(f"threshold search: {exc}")

    v = {
        RV: rv,
        ORV: orv,
        M: m_member,
        M_INF: {Extreme.M_INF: Membership.IN, Extreme.INCONCLUSIVE: Membership.INCONCLUSIVE}.get(extreme, Membership.OUT),
        M_MINUS_INF: {Extreme.M_MINUS_INF: Membership.IN, Extreme.INCONCLUSIVE: Membership.INCONCLUSIVE}.get(extreme, Membership.OUT),
    }
    _reconcile(v, rho, rv_index, tols, notes)
    if v[ORV] is not Membership.IN:
        fit = None
    if v[RV] is not Membership.IN:
        rv_index = None
    if v[RV] is Membership.IN:
        v[SV] = Membership.IN if abs(rv_index) < tols.tol_converge else Membership.OUT
    elif v[RV] is Membership.OUT:
        v[SV] = Membership.OUT
    else:
        v[SV] = Membership.INCONCLUSIVE
    if v[ORV] is Membership.IN and orders_v is not None and orders_v.kind is Kind.CONVERGES:
        notes.append("O-RV with a limit of log U(x)/log x: M membership follows")

    return ClassificationReport(
        verdicts={name: v[name] for name in CLASSES},
        rho_hat=rho if v[M] is Membership.IN else None,
        mu_hat=mu, nu_hat=nu, orv_fit=fit, tau_hat=tau, rv_index=rv_index,
        trails=trails, errors=errors, notes=tuple(notes), empirical=empirical,
    )


def _reconcile(v: dict, rho, rv_index, tols: Tolerances, notes: list):
    IN, OUT, INC = Membership.IN, Membership.OUT, Membership.INCONCLUSIVE
    if IN in (v[M_INF], v[M_MINUS_INF]):
        if v[M] is INC:
            v[M] = OUT
        if v[ORV] is IN:
            notes.append("conflict: O-RV evidence alongside M_inf/M_-inf; both withheld")
            v[ORV] = INC
            v[M_INF] = v[M_MINUS_INF] = INC
    if v[ORV] is OUT or v[M] is OUT:
        if v[RV] is IN:
            notes.append("conflict: RV evidence while O-RV or M is out; RV withheld")
            v[RV] = INC
        elif v[RV] is INC:
            v[RV] = OUT
    if v[RV] is IN:
        consistent = v[ORV] is IN and v[M] is IN and abs(rho - rv_index) < tols.tol_converge
        if not consistent:
            notes.append("RV evidence not matched by O-RV and M at the same index; RV withheld")
            v[RV] = INC
