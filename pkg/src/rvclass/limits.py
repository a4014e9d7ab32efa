"""
Numerical verdicts on the behaviour of h(y) as y -> infinity.

h is sampled window by window on a GridSpec.  Each window contributes its
minimum and maximum; the trail of those extrema over the last few windows
(the decision windows) is what every verdict is read from:

* Converges      the decision windows fit in a band narrower than tol_converge
* DivergesPlus   the window minima are nondecreasing and either exceed the
                 divergence threshold or run away (see ``envelope_trend``)
* DivergesMinus  mirror image on the window maxima
* Oscillates     no convergence, and each envelope is either stable or runs
                 away outward; a runaway side is reported as +-inf
* Inconclusive   none of the above
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .logfn import EvaluationError, GridSpec


class Kind(str, enum.Enum):
    CONVERGES = "converges"
    DIVERGES_PLUS = "diverges_plus"
    DIVERGES_MINUS = "diverges_minus"
    OSCILLATES = "oscillates"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Tolerances:
    """Decision thresholds shared by every verdict.

    collapse_ratio: a monotone envelope only counts as running away if its
    last step is at least this fraction of its first one (steps of a
    convergent sequence shrink geometrically on a geometric grid).
    """

    tol_converge: float = 1e-2
    tol_stable: float = 1e-2
    decision_windows: int = 8
    diverge_threshold: float = 1e6
    collapse_ratio: float = 0.25

    def __post_init__(self):
        for name in ("tol_converge", "tol_stable", "diverge_threshold", "collapse_ratio"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.decision_windows < 2:
            raise ValueError("decision_windows must be at least 2")


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class LimitVerdict:
    kind: Kind
    value: float | None
    liminf_est: float
    limsup_est: float
    spread: float
    evidence: tuple[tuple[float, float, float], ...]

    @property
    def bounded(self) -> bool:
        return self.kind in (Kind.CONVERGES, Kind.OSCILLATES) and math.isfinite(
            self.liminf_est
        ) and math.isfinite(self.limsup_est)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "value": _json_number(self.value),
            "liminf": _json_number(self.liminf_est),
            "limsup": _json_number(self.limsup_est),
            "spread": _json_number(self.spread),
            "windows": [[_json_number(v) for v in row] for row in self.evidence],
        }


def _json_number(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def _sample(h, ys: np.ndarray) -> np.ndarray:
    try:
        values = np.asarray(h(ys), dtype=float)
    except TypeError:
        # scalar-only callable
        values = None
    if values is None or values.shape != ys.shape:
        values = np.array([float(h(v)) for v in ys])
    bad = ~np.isfinite(values)
    if bad.any():
        y = float(ys[bad][0])
        raise EvaluationError(f"non-finite value at grid point y={y!r}", point=y)
    return values


def tail_extrema(h: Callable, grid: GridSpec):
    """Window-by-window extrema of h on ``grid``.

    Returns
    -------
    liminf_est, limsup_est : float
        minimum and maximum over the final window
    evidence : tuple of (window_start_y, window_min, window_max)
    """
    windows = grid.windows()
    values = _sample(h, np.concatenate(windows))
    evidence = []
    pos = 0
    for w in windows:
        chunk = values[pos:pos + w.size]
        pos += w.size
        evidence.append((float(w[0]), float(chunk.min()), float(chunk.max())))
    return evidence[-1][1], evidence[-1][2], tuple(evidence)


def _runaway(ext: np.ndarray, outward: int, tols: Tolerances) -> bool:
    steps = outward * np.diff(ext)
    if steps.size == 0 or np.any(steps <= 0):
        return False
    if steps[-1] < tols.collapse_ratio * steps[0]:
        return False
    return steps.mean() >= tols.tol_stable


def envelope_trend(ext, outward: int, tols: Tolerances = DEFAULT_TOLERANCES) -> str:
    """Classify a sequence of window extrema.

    ``outward`` is +1 for the maxima (upper envelope) and -1 for the minima.

    Returns one of
      "stable"   consecutive changes all below tol_stable
      "runaway"  strictly monotone outward with non-collapsing steps
      "bounded"  the later half never pushes past the earlier record by more
                 than tol_stable (extrema saturate without settling)
      "unclear"  anything else
    """
    ext = np.asarray(ext, dtype=float)
    if np.all(np.abs(np.diff(ext)) < tols.tol_stable):
        return "stable"
    if _runaway(ext, outward, tols):
        return "runaway"
    half = ext.size // 2
    early = np.max(outward * ext[:half])
    late = np.max(outward * ext[half:])
    if late <= early + tols.tol_stable:
        return "bounded"
    return "unclear"


def decision_extrema(evidence, tols: Tolerances = DEFAULT_TOLERANCES):
    """Window minima and maxima over the decision windows, as arrays."""
    rows = np.asarray(evidence[-tols.decision_windows:], dtype=float)
    return rows[:, 1], rows[:, 2]


def _diverges(ext: np.ndarray, outward: int, tols: Tolerances) -> bool:
    if np.any(outward * np.diff(ext) < 0):
        return False
    return outward * ext[-1] > tols.diverge_threshold or _runaway(ext, outward, tols)


def verdict_from_evidence(evidence, tols: Tolerances = DEFAULT_TOLERANCES) -> LimitVerdict:
    evidence = tuple(evidence)
    mins, maxs = decision_extrema(evidence, tols)
    last_min, last_max = evidence[-1][1], evidence[-1][2]
    spread = float(maxs.max() - mins.min())

    if spread < tols.tol_converge:
        value = 0.5 * (last_min + last_max)
        return LimitVerdict(Kind.CONVERGES, value, last_min, last_max, spread, evidence)
    if _diverges(mins, +1, tols):
        return LimitVerdict(Kind.DIVERGES_PLUS, None, math.inf, math.inf, spread, evidence)
    if _diverges(maxs, -1, tols):
        return LimitVerdict(Kind.DIVERGES_MINUS, None, -math.inf, -math.inf, spread, evidence)

    upper = envelope_trend(maxs, +1, tols)
    lower = envelope_trend(mins, -1, tols)
    if upper in ("stable", "runaway") and lower in ("stable", "runaway"):
        lo = -math.inf if lower == "runaway" else last_min
        hi = math.inf if upper == "runaway" else last_max
        return LimitVerdict(Kind.OSCILLATES, None, lo, hi, spread, evidence)
    return LimitVerdict(Kind.INCONCLUSIVE, None, last_min, last_max, spread, evidence)


def limit_verdict(h: Callable, grid: GridSpec, tols: Tolerances = DEFAULT_TOLERANCES) -> LimitVerdict:
    """Decide the fate of h(y) as y -> infinity from its samples on ``grid``.

    Never guesses: when no rule fires the verdict is ``Kind.INCONCLUSIVE``.

    Examples
    --------
    >>> import numpy as np
    >>> g = GridSpec.linear(10.0, 90.0, windows=8, points=64)
    >>> limit_verdict(lambda y: 3 + np.exp(-y), g).kind
    <Kind.CONVERGES: 'converges'>
    >>> limit_verdict(lambda y: y, g).kind
    <Kind.DIVERGES_PLUS: 'diverges_plus'>
    """
    _, _, evidence = tail_extrema(h, grid)
    return verdict_from_evidence(evidence, tols)
