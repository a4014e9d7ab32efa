"""
Log-domain function model.

A positive function U on (0, inf) is carried as its log-log transform

    l(y) = log U(e^y),    y = log x,

so that the ratio U(tx)/U(x) becomes the increment l(y + log t) - l(y) and
log U(x)/log x becomes l(y)/y.  Arguments as large as x = e^(1e9) stay
representable.

Contents
--------
LogFunction            immutable, vectorised evaluator with a declared domain
GridSpec               probe grids (linear or geometric in y) split in windows
finite_support_adapter bring a function with finite endpoint to (0, inf)
empirical_tail         empirical survival function of a sample
load_table             tabulated (x, U(x)) file -> LogFunction
load_samples           one-number-per-line sample file
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

Y_CAP = 1e9
"""Largest log-argument any probe may reach."""


class EvaluationError(ArithmeticError):
    """A function produced a non-finite value (or could not be evaluated) at ``point``."""

    def __init__(self, message: str, point: float | None = None):
        super().__init__(message)
        self.point = point


class DomainError(EvaluationError):
    """Evaluation requested outside the declared domain of a LogFunction."""


@dataclass(frozen=True)
class LogFunction:
    """A function U represented by l(y) = log U(e^y).

    Parameters
    ----------
    fn : callable
        Vectorised map from an array of y values to l(y).  Must be
        deterministic and free of shared mutable state.
    y_min, y_max : float
        Admissible domain for y.  ``y_max`` defaults to ``Y_CAP``; functions
        whose values overflow in float64 (e^x, x^sin x) declare a smaller one.
    label : str
        Human readable description.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    y_min: float = 0.0
    y_max: float = Y_CAP
    label: str = ""

    def __post_init__(self):
        if not self.y_min < self.y_max:
            raise ValueError(f"empty domain [{self.y_min}, {self.y_max}]")
        if self.y_max > Y_CAP:
            raise ValueError(f"y_max={self.y_max} exceeds Y_CAP={Y_CAP}")

    def __call__(self, y):
        y_arr = np.asarray(y, dtype=float)
        if y_arr.size:
            outside = (y_arr < self.y_min) | (y_arr > self.y_max) | np.isnan(y_arr)
            if outside.any():
                bad = float(y_arr[outside].flat[0])
                raise DomainError(
                    f"{self.label or 'function'}: y={bad!r} outside domain "
                    f"[{self.y_min!r}, {self.y_max!r}]",
                    point=bad,
                )
        with np.errstate(all="ignore"):
            out = np.asarray(self.fn(y_arr), dtype=float)
        if out.shape != y_arr.shape:
            out = np.broadcast_to(out, y_arr.shape).copy()
        finite = np.isfinite(out)
        if not finite.all():
            bad = float(y_arr[~finite].flat[0])
            raise EvaluationError(
                f"{self.label or 'function'}: non-finite value at y={bad!r}", point=bad
            )
        if np.ndim(y) == 0:
            return float(out)
        return out

    def scaled(self, factor: float) -> "LogFunction":
        """Return the function c*U for a constant c > 0."""
        if not factor > 0:
            raise ValueError("scale factor must be positive")
        shift = math.log(factor)
        fn = self.fn
        return LogFunction(
            lambda y: fn(y) + shift, self.y_min, self.y_max, f"{factor:g}*({self.label})"
        )


@dataclass(frozen=True)
class GridSpec:
    """Probe grid in log-argument units, organised in consecutive windows.

    ``mode="linear"``: window k is [y_start + k*y_growth, y_start + (k+1)*y_growth].
    ``mode="geometric"``: window k is [y_start*g^k, y_start*g^(k+1)] with g = y_growth > 1,
    which is what doubly exponential structure (bands at x = e^(e^n)) needs.

    Each window holds ``points_per_window`` equally spaced points including both
    edges, so neighbouring windows share their common edge.
    """

    y_start: float
    y_growth: float
    mode: str = "linear"
    points_per_window: int = 256
    window_count: int = 8

    def __post_init__(self):
        if self.mode not in ("linear", "geometric"):
            raise ValueError(f"unknown grid mode {self.mode!r}")
        if self.window_count < 2:
            raise ValueError("a grid needs at least 2 windows")
        if self.points_per_window < 4:
            raise ValueError("a grid needs at least 4 points per window")
        if self.mode == "geometric":
            if not self.y_growth > 1:
                raise ValueError("geometric grids need y_growth > 1")
            if not self.y_start > 0:
                raise ValueError("geometric grids need y_start > 0")
        elif not self.y_growth > 0:
            raise ValueError("linear grids need a positive window width")
        if self.y_end > Y_CAP * (1 + 1e-12):
            raise ValueError(f"grid reaches y={self.y_end:g} beyond Y_CAP={Y_CAP:g}")

    @classmethod
    def linear(cls, start: float, stop: float, windows: int = 8, points: int = 256) -> "GridSpec":
        return cls(start, (stop - start) / windows, "linear", points, windows)

    @classmethod
    def geometric(cls, start: float, stop: float, windows: int = 8, points: int = 256) -> "GridSpec":
        return cls(start, (stop / start) ** (1.0 / windows), "geometric", points, windows)

    def edges(self) -> np.ndarray:
        k = np.arange(self.window_count + 1, dtype=float)
        if self.mode == "linear":
            return self.y_start + k * self.y_growth
        return self.y_start * self.y_growth**k

    @property
    def y_end(self) -> float:
        return float(self.edges()[-1])

    def windows(self) -> list[np.ndarray]:
        e = self.edges()
        return [np.linspace(e[k], e[k + 1], self.points_per_window) for k in range(self.window_count)]

    def points(self) -> np.ndarray:
        """All grid points, strictly increasing, shared edges counted once."""
        return np.unique(np.concatenate(self.windows()))


def finite_support_adapter(
    log_u: Callable[[np.ndarray], np.ndarray],
    x_star: float,
    y_min: float | None = None,
    label: str = "",
) -> LogFunction:
    """Move a function with finite right endpoint to an infinite support.

    Given log U on (0, x_star), returns V(z) = U(x_star - 1/z) in log domain,
    i.e. l_V(w) = log U(x_star - e^(-w)).  Asymptotic classes of V describe
    the behaviour of U at its endpoint.

    Parameters
    ----------
    log_u : callable
        Vectorised map x -> log U(x) on (0, x_star).
    x_star : float
        Endpoint sup{x : U(x) > 0}.
    y_min : float, optional
        Smallest admissible w.  Defaults to log(2/x_star), i.e. x >= x_star/2.
    """
    if not x_star > 0:
        raise ValueError("x_star must be positive")
    if y_min is None:
        y_min = math.log(2.0 / x_star)
    if not y_min > -math.log(x_star):
        raise ValueError("y_min must satisfy x_star - exp(-y_min) > 0")

    def fn(w):
        return log_u(x_star - np.exp(-w))

    return LogFunction(fn, y_min, Y_CAP, label or f"endpoint-adapted (x*={x_star:g})")


def empirical_tail(samples, min_samples: int = 100, label: str = "empirical tail") -> LogFunction:
    """Empirical survival function in log domain.

    l(y) = log Fbar_n(e^y) with Fbar_n(x) = #{samples > x} / n.  The domain
    ends at the largest sample strictly below the maximum, the last point
    where Fbar_n is still positive.

    Raises
    ------
    ValueError
        fewer than ``min_samples`` finite samples, all samples equal, or no
        two distinct positive samples.
    """
    data = np.asarray(samples, dtype=float).ravel()
    data = np.sort(data[np.isfinite(data)])
    n = data.size
    if n < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {n}")
    if data[0] == data[-1]:
        raise ValueError("all samples are equal")
    below_max = data[data < data[-1]]
    positive = data[data > 0]
    if below_max.size == 0 or below_max[-1] <= 0:
        raise ValueError("need at least two distinct positive samples")
    y_max = math.log(below_max[-1])
    y_min = min(math.log(positive[0]), y_max - 1.0)

    def fn(y):
        count = n - np.searchsorted(data, np.exp(y), side="right")
        return np.log(count / n)

    return LogFunction(fn, y_min, y_max, label)


def load_samples(path) -> np.ndarray:
    """Read one number per line (blank lines and '#' comments ignored)."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not values:
        raise ValueError(f"{path}: no samples")
    return np.array(values)


def load_table(path, label: str | None = None) -> LogFunction:
    """Read a two-column "x U(x)" table and interpolate linearly in (y, l)."""
    xs, us = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
            try:
                x, u = float(parts[0]), float(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a number pair: {line!r}") from None
            if not (x > 0 and u > 0 and math.isfinite(x) and math.isfinite(u)):
                raise ValueError(f"{path}:{lineno}: need finite x > 0 and U(x) > 0")
            xs.append(x)
            us.append(u)
    if len(xs) < 2:
        raise ValueError(f"{path}: need at least two rows")
    ys = np.log(np.array(xs))
    ls = np.log(np.array(us))
    if np.any(np.diff(ys) <= 0):
        raise ValueError(f"{path}: x column must be strictly increasing")
    if ys[-1] > Y_CAP:
        raise ValueError(f"{path}: log x exceeds Y_CAP")

    return LogFunction(lambda y: np.interp(y, ys, ls), float(ys[0]), float(ys[-1]), label or str(path))
