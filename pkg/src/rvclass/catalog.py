"""
Example and counterexample functions with their known class memberships.

Every entry comes as a LogFunction plus a GroundTruth, and carries a
classifier configuration whose grids are fitted to the structure of the
function (smooth entries use linear grids, band constructions with bands at
y = e^n or y = y_a (1+alpha)^n use geometric ones).

Two constructive builders are provided:

    build_orv   U(x) = exp{eta(x) + int_1^x phi(s) ds/s}          (O-RV form)
    build_M     U(x) = exp{alpha(x) + delta(x) int_b^x beta(s) ds/s}  (M form)

and ``random_orv`` draws piecewise-constant O-RV functions for property tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .classes import CLASSES, M, M_INF, M_MINUS_INF, ORV, RV, SV, Membership
from .classifier import DEFAULT_GEOMETRIC_GRID, ClassifierConfig
from .logfn import Y_CAP, GridSpec, LogFunction
from .quadrature import CumulativeIntegral

IN, OUT, UNKNOWN = Membership.IN, Membership.OUT, Membership.UNKNOWN


@dataclass(frozen=True)
class GroundTruth:
    """Known memberships and indices of a catalog function.

    Classes missing from ``memberships`` are UNKNOWN.
    """

    memberships: dict
    rho: float | None = None
    mu_nu: tuple | None = None
    orv_bounds: tuple | None = None
    notes: str = ""

    def __post_init__(self):
        full = {name: Membership(self.memberships.get(name, UNKNOWN)) for name in CLASSES}
        unknown = set(self.memberships) - set(CLASSES)
        if unknown:
            raise ValueError(f"unknown class names {sorted(unknown)}")
        object.__setattr__(self, "memberships", full)
        if full[M] is IN and IN in (full[M_INF], full[M_MINUS_INF]):
            raise ValueError("M is disjoint from M_inf and M_minus_inf")
        if full[M_INF] is IN and full[M_MINUS_INF] is IN:
            raise ValueError("M_inf and M_minus_inf are disjoint")
        if full[RV] is IN and full[M] is not IN:
            raise ValueError("RV members belong to M")
        if full[SV] is IN and full[RV] is not IN:
            raise ValueError("SV members belong to RV")
        if IN in (full[M_INF], full[M_MINUS_INF]) and full[ORV] is not OUT:
            raise ValueError("members of M_inf or M_minus_inf are never O-RV")

    def summary(self) -> str:
        parts = [f"{name}: {self.memberships[name].value}" for name in CLASSES
                 if self.memberships[name] is not UNKNOWN]
        if self.rho is not None:
            parts.append(f"rho={self.rho:g}")
        if self.mu_nu is not None:
            parts.append(f"(mu, nu)=({self.mu_nu[0]:g}, {self.mu_nu[1]:g})")
        return ", ".join(parts)


class StepFunction:
    """Right-continuous piecewise-constant function of y.

    ``values[k]`` holds on [breaks[k], breaks[k+1]); the last value extends
    to infinity.  Integrals from ``breaks[0]`` are exact band sums.
    """

    def __init__(self, breaks, values):
        self.breaks = np.asarray(breaks, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.breaks.ndim != 1 or self.breaks.shape != self.values.shape:
            raise ValueError("breaks and values must be 1-d arrays of equal length")
        if np.any(np.diff(self.breaks) <= 0):
            raise ValueError("breaks must be strictly increasing")
        widths = np.diff(self.breaks)
        self._cum = np.concatenate([[0.0], np.cumsum(self.values[:-1] * widths)])

    def _band(self, y):
        return np.clip(np.searchsorted(self.breaks, y, side="right") - 1, 0, self.breaks.size - 1)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return self.values[self._band(y)]

    def integral(self, y):
        """Integral of the step function from breaks[0] to y."""
        y = np.asarray(y, dtype=float)
        k = self._band(y)
        return self._cum[k] + self.values[k] * (y - self.breaks[k])

    def bound(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class ORVRepresentation:
    """Ingredients eta, phi (as functions of y = log x) and their bounds."""

    eta_fn: Callable
    phi_fn: Callable
    eta_bound: float
    phi_bound: float

    def __post_init__(self):
        spots = np.concatenate([np.linspace(0.0, 50.0, 201), np.geomspace(50.0, Y_CAP, 60)])
        for fn, bound, name in ((self.eta_fn, self.eta_bound, "eta"), (self.phi_fn, self.phi_bound, "phi")):
            vals = np.broadcast_to(np.asarray(fn(spots), dtype=float), spots.shape)
            if not np.all(np.abs(vals) <= bound + 1e-12):
                raise ValueError(f"|{name}| exceeds its declared bound {bound}")


@dataclass(frozen=True)
class MRepresentation:
    """Ingredients of exp{alpha + delta int_b beta ds/s}, all as functions of y.

    Construction checks alpha(y)/y -> 0, beta -> tau and delta -> 1 at the
    far end of a diagnostic grid.
    """

    b: float
    alpha_fn: Callable
    beta_fn: Callable
    delta_fn: Callable
    tau: float

    def __post_init__(self):
        if not self.b > 1:
            raise ValueError("b must exceed 1")
        y = np.geomspace(max(1e3, 2 * math.log(self.b)), 1e8, 11)
        a = np.broadcast_to(np.asarray(self.alpha_fn(y), dtype=float), y.shape)
        beta = np.broadcast_to(np.asarray(self.beta_fn(y), dtype=float), y.shape)
        d = np.broadcast_to(np.asarray(self.delta_fn(y), dtype=float), y.shape)
        if abs(a[-1] / y[-1]) > 0.05:
            raise ValueError("alpha(x)/log x does not tend to 0")
        if abs(beta[-1] - self.tau) > 0.05:
            raise ValueError("beta does not tend to tau")
        if abs(d[-1] - 1) > 0.05:
            raise ValueError("delta does not tend to 1")


def _integral_from(fn, lower: float, upper: float, atol: float = 1e-9):
    if isinstance(fn, StepFunction):
        start = fn.integral(lower)
        return lambda y: fn.integral(y) - start
    return CumulativeIntegral(fn, lower, upper, atol)


def _vector(fn):
    return lambda y: np.broadcast_to(np.asarray(fn(y), dtype=float), np.shape(y))


def build_orv(rep: ORVRepresentation, label: str = "build_orv", y_max: float = Y_CAP) -> LogFunction:
    """l(y) = eta(y) + int_0^y phi(u) du on [0, y_max].

    Step functions are integrated exactly; anything else by adaptive
    Gauss-Kronrod quadrature to 1e-9, tabulated over the whole domain at
    construction.  Integrands that oscillate without decaying need a
    smaller ``y_max``: the work grows with the number of oscillations.
    """
    eta = _vector(rep.eta_fn)
    integral = _integral_from(rep.phi_fn, 0.0, y_max)
    return LogFunction(lambda y: eta(y) + integral(y), 0.0, y_max, label)


def build_M(rep: MRepresentation, label: str = "build_M", y_max: float = Y_CAP) -> LogFunction:
    """l(y) = alpha(y) + delta(y) int_{log b}^y beta(u) du, for log b <= y <= y_max."""
    lower = math.log(rep.b)
    alpha, delta = _vector(rep.alpha_fn), _vector(rep.delta_fn)
    integral = _integral_from(rep.beta_fn, lower, y_max)
    return LogFunction(lambda y: alpha(y) + delta(y) * integral(y), lower, y_max, label)


def random_orv(seed: int, phi_bound: float, resolution: float):
    """Random O-RV function with piecewise-constant phi.

    phi is constant on [0, 1) and on the geometric bands
    [(1+resolution)^k, (1+resolution)^(k+1)) up to Y_CAP, with values drawn
    uniformly from [-phi_bound, phi_bound].  Same seed, same function.

    Returns
    -------
    (LogFunction, ORVRepresentation)
    """
    if phi_bound < 0:
        raise ValueError("phi_bound must be nonnegative")
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    count = int(math.ceil(math.log(Y_CAP) / math.log1p(resolution))) + 2
    breaks = np.concatenate([[0.0], (1.0 + resolution) ** np.arange(count)])
    rng = np.random.default_rng(seed)
    phi = StepFunction(breaks, rng.uniform(-phi_bound, phi_bound, breaks.size))
    rep = ORVRepresentation(lambda y: 0.0, phi, 0.0, phi_bound)
    return build_orv(rep, f"random_orv(seed={seed}, phi_bound={phi_bound:g})"), rep


def heavy_tail_expected(alpha: float, beta: float):
    """Extremal values (liminf, limsup) of log Fbar(x)/log x for the step-tail family."""
    if not alpha > 0 or not beta < -1:
        raise ValueError("need alpha > 0 and beta < -1")
    low = alpha * (1 + beta)
    return low, low / (1 + alpha)


# --------------------------------------------------------------------------
# catalog entries

@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    defaults: dict
    ranges: str
    build: Callable = field(repr=False)


def _no_params(fn):
    def build(**params):
        return fn()
    return build


def _x_over_log():
    def fn(y):
        return np.where(y >= 1.0, y - np.log(np.maximum(y, 1.0)), 1.0)

    truth = GroundTruth(
        {RV: IN, SV: OUT, ORV: IN, M: IN, M_INF: OUT, M_MINUS_INF: OUT},
        rho=1.0, mu_nu=(1.0, 1.0), notes="x/log x for x >= e, constant below",
    )
    return LogFunction(fn, 0.0, Y_CAP, "x/log x"), truth, ClassifierConfig()


def _x_sin():
    def fn(y):
        return np.sin(np.exp(y)) * y

    truth = GroundTruth(
        {RV: OUT, SV: OUT, ORV: OUT, M: OUT, M_INF: OUT, M_MINUS_INF: OUT},
        mu_nu=(-1.0, 1.0), notes="x^sin(x); orders -1 and 1",
    )
    cfg = ClassifierConfig(
        grid=GridSpec.linear(300.0, 690.0, windows=8, points=4000),
        s_grid=GridSpec.linear(10.0, 600.0, windows=8, points=4000),
        x_probes=(math.e, math.e ** 2, math.e ** 3),
    )
    return LogFunction(fn, 0.0, 700.0, "x^sin(x)"), truth, cfg


def _loglog_cosine(alpha=0.7, beta=0.5):
    if not (0 < alpha < 1 and 0 < beta < 1 and alpha + beta > 1):
        raise ValueError("loglog_cosine needs 0 < alpha, beta < 1 and alpha + beta > 1")

    def fn(y):
        return y ** alpha * np.cos(y ** beta)

    truth = GroundTruth(
        {RV: OUT, SV: OUT, ORV: OUT, M: IN, M_INF: OUT, M_MINUS_INF: OUT},
        rho=0.0, mu_nu=(0.0, 0.0), notes="in M with rho = 0 but not O-RV",
    )
    cfg = ClassifierConfig(
        grid=GridSpec.geometric(9e7, 9e8, windows=8, points=20000),
        s_grid=GridSpec.geometric(5e7, 5e8, windows=8, points=20000),
    )
    label = f"exp{{(log x)^{alpha:g} cos((log x)^{beta:g})}}"
    return LogFunction(fn, 0.0, Y_CAP, label), truth, cfg


def orv_not_m_phi() -> StepFunction:
    """Indicator of the bands [e^n, e^(n+1)) in y for even n, zero on [0, 1)."""
    n = np.arange(22)
    breaks = np.concatenate([[0.0], np.exp(n)])
    values = np.concatenate([[0.0], (n % 2 == 0).astype(float)])
    return StepFunction(breaks, values)


def _orv_not_m():
    rep = ORVRepresentation(lambda y: 0.0, orv_not_m_phi(), 0.0, 1.0)
    truth = GroundTruth(
        {RV: OUT, SV: OUT, ORV: IN, M: OUT, M_INF: OUT, M_MINUS_INF: OUT},
        orv_bounds=(1.0, 0.0, 1.0),
        mu_nu=(1 / (math.e + 1), math.e / (math.e + 1)),
        notes="O-RV but not in M: l(y)/y alternates near 1/(e+1) and e/(e+1) at y = e^n",
    )
    cfg = ClassifierConfig(grid=DEFAULT_GEOMETRIC_GRID)
    return build_orv(rep, "even-band indicator"), truth, cfg


def heavy_tail_bands(alpha: float, x_a: float):
    """Band edges y_n = log(x_a) (1+alpha)^n of the step-tail family."""
    return math.log(x_a), 1.0 + alpha


def _heavy_tail_step(alpha=1.0, beta=-2.0, x_a=2.0):
    if not (alpha > 0 and beta < -1 and x_a > 1):
        raise ValueError("heavy_tail_step needs alpha > 0, beta < -1, x_a > 1")
    y_a, growth = heavy_tail_bands(alpha, x_a)
    slope = alpha * (1 + beta)
    log_growth = math.log(growth)

    def fn(y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            n = np.floor(np.log(y / y_a) / log_growth)
        n = np.where(np.isfinite(n), n, 0.0)
        # guard the floor against rounding at band edges
        n = np.where(y_a * growth ** (n + 1) <= y, n + 1, n)
        n = np.where(y_a * growth ** n > y, n - 1, n)
        return np.where(n >= 1, slope * y_a * growth ** n, 0.0)

    low, high = heavy_tail_expected(alpha, beta)
    truth = GroundTruth(
        {RV: OUT, SV: OUT, ORV: OUT, M: OUT, M_INF: OUT, M_MINUS_INF: OUT},
        mu_nu=(low, high),
        notes="exact step survival function; orders attained at band edges",
    )
    # start far enough out that a constant factor in U (a c/y term in l(y)/y)
    # cannot move the window extrema; spacing below log 2 keeps every jump
    # of l visible to the ratio increments
    n0 = max(1, math.ceil(math.log(300.0 / y_a) / log_growth))
    start = 1.5 * y_a * growth ** n0
    windows = 8
    widest = start * growth ** (windows - 1) * (growth - 1)
    points = max(2000, int(math.ceil(widest / 0.5)))
    cfg = ClassifierConfig(grid=GridSpec(start, growth, "geometric", points, windows))
    label = f"step tail (alpha={alpha:g}, beta={beta:g}, x_a={x_a:g})"
    return LogFunction(fn, 0.0, Y_CAP, label), truth, cfg


def _power(rho=1.0):
    rho = float(rho)
    truth = GroundTruth(
        {RV: IN, SV: IN if rho == 0 else OUT, ORV: IN, M: IN, M_INF: OUT, M_MINUS_INF: OUT},
        rho=rho, mu_nu=(rho, rho), orv_bounds=(rho, rho, 1.0), notes="x^rho",
    )
    return LogFunction(lambda y: rho * y, 0.0, Y_CAP, f"x^{rho:g}"), truth, ClassifierConfig()


def _exp(sign):
    def fn(y):
        return sign * np.exp(y)

    extreme = M_MINUS_INF if sign > 0 else M_INF
    truth = GroundTruth(
        {name: IN if name == extreme else OUT for name in CLASSES},
        notes="dominates every power" if sign > 0 else "dominated by every power",
    )
    cfg = ClassifierConfig(grid=GridSpec.linear(20.0, 680.0, windows=8, points=2000))
    label = "exp(x)" if sign > 0 else "exp(-x)"
    return LogFunction(fn, 0.0, 700.0, label), truth, cfg


def _sv_log():
    truth = GroundTruth(
        {RV: IN, SV: IN, ORV: IN, M: IN, M_INF: OUT, M_MINUS_INF: OUT},
        rho=0.0, mu_nu=(0.0, 0.0), orv_bounds=(0.0, 0.0, 1.0), notes="log x, slowly varying",
    )
    return LogFunction(np.log, 1.0, Y_CAP, "log x"), truth, ClassifierConfig()


ENTRIES = {
    e.name: e for e in [
        CatalogEntry("exp_decay", "U(x) = exp(-x)", {}, "", _no_params(lambda: _exp(-1))),
        CatalogEntry("exp_growth", "U(x) = exp(x)", {}, "", _no_params(lambda: _exp(+1))),
        CatalogEntry("heavy_tail_step", "step survival function with bands x_a^((1+alpha)^n)",
                     {"alpha": 1.0, "beta": -2.0, "x_a": 2.0}, "alpha > 0, beta < -1, x_a > 1",
                     _heavy_tail_step),
        CatalogEntry("loglog_cosine", "U(x) = exp{(log x)^alpha cos((log x)^beta)}",
                     {"alpha": 0.7, "beta": 0.5}, "0 < alpha, beta < 1, alpha + beta > 1",
                     _loglog_cosine),
        CatalogEntry("orv_not_m", "exp{int_1^x phi(s) ds/s}, phi = 1 on [e^(e^n), e^(e^(n+1))) for even n",
                     {}, "", _no_params(_orv_not_m)),
        CatalogEntry("power", "U(x) = x^rho", {"rho": 1.0}, "rho real", _power),
        CatalogEntry("sv_log", "U(x) = log x", {}, "", _no_params(_sv_log)),
        CatalogEntry("x_over_log", "U(x) = x/log x", {}, "", _no_params(_x_over_log)),
        CatalogEntry("x_sin", "U(x) = x^sin(x)", {}, "", _no_params(_x_sin)),
    ]
}


def _resolve(name: str, params: dict | None):
    try:
        entry = ENTRIES[name]
    except KeyError:
        raise ValueError(f"unknown catalog entry {name!r}; known: {', '.join(sorted(ENTRIES))}") from None
    params = dict(params or {})
    extra = set(params) - set(entry.defaults)
    if extra:
        raise ValueError(f"{name}: unknown parameter(s) {sorted(extra)}")
    merged = {**entry.defaults, **{k: float(v) for k, v in params.items()}}
    return entry.build(**merged)


def example(name: str, params: dict | None = None):
    """Catalog function ``name`` with ``params`` as (LogFunction, GroundTruth).

    >>> U, truth = example("power", {"rho": 2})
    >>> U(3.0), truth.memberships["RV"].value
    (6.0, 'in')
    """
    U, truth, _ = _resolve(name, params)
    return U, truth


def recommended_config(name: str, params: dict | None = None) -> ClassifierConfig:
    """Classifier configuration whose grids suit the structure of entry ``name``."""
    return _resolve(name, params)[2]


def catalog_listing() -> str:
    """Alphabetised, human-readable listing of the catalog."""
    lines = []
    for name in sorted(ENTRIES):
        entry = ENTRIES[name]
        _, truth = example(name)
        params = ", ".join(f"{k}={v:g}" for k, v in entry.defaults.items())
        head = f"{name}({params})" if params else name
        lines.append(f"{head}: {entry.description}")
        if entry.ranges:
            lines.append(f"    parameters: {entry.ranges}")
        lines.append(f"    ground truth: {truth.summary()}")
    return "\n".join(lines) + "\n"


def with_tolerances(config: ClassifierConfig, **overrides) -> ClassifierConfig:
    """Copy of ``config`` with some Tolerances fields replaced."""
    return replace(config, tols=replace(config.tols, **overrides))
