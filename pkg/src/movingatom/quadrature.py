"""Frequency-axis integration: adaptive panels, cutoff scans, tail fits.

The emission integrands handled here are non-negative, smooth except for a
resonance peak whose width gamma_tilde can be many orders of magnitude below
the integration range, and -- the point of the whole exercise -- sometimes
not integrable at all. Three tools cover that ground:

* integrate_adaptive: a 15-point Kronrod rule with embedded 7-point Gauss
  estimate (the classic G7/K15 pair) on a worklist of panels, always
  bisecting the panel with the largest error estimate. Callers can seed
  panel edges at known feature locations (the resonance), because blind
  adaptation on a panel 10^6 times wider than the peak can step straight
  over it.
* cutoff_scan: cumulative integrals over [start, Lambda_k] for a geometric
  ladder of cutoffs, integrating each new segment once and reusing all
  previous segments.
* classify_tail: turns a scan into a measured growth law -- convergent,
  logarithmic, or power Lambda^p -- by fitting the scan increments in
  log-log space. "The integral diverges" becomes a number with a residual.

Everything is deterministic: fixed rules, worklist order fixed by error
magnitude with insertion-order tie-breaking, no timing dependence. Integrand
functions must be vectorized (accept a 1D numpy array, return same shape).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NumericalError",
    "QuadratureResult",
    "CutoffScan",
    "TailClassification",
    "integrate_adaptive",
    "cutoff_scan",
    "classify_tail",
]


class NumericalError(RuntimeError):
    """A numerical procedure failed to meet its convergence contract."""


# 15-point Kronrod nodes on [-1, 1] (ascending) with the embedded 7-point
# Gauss rule living on the odd-index nodes. Values are the standard QUADPACK
# constants. The pair is exact for polynomials of degree 22 (Kronrod) and 13
# (Gauss); the difference of the two estimates is the per-panel error proxy.
_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_GAUSS_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool


@dataclass(frozen=True)
class _Panel:
    a: float
    b: float
    value: float
    error: float


def _apply_rule(f, a: float, b: float) -> _Panel:
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    xs = c + h * _XK
    fv = np.asarray(f(xs), dtype=float)
    if fv.shape != xs.shape:
        raise ValueError("integrand must be vectorized: f(array) -> array of the same shape")
    if not np.all(np.isfinite(fv)):
        bad = xs[~np.isfinite(fv)][0]
        raise NumericalError(f"integrand returned a non-finite value near x = {bad:.6g}")
    k15 = h * float(np.dot(_WK, fv))
    g7 = h * float(np.dot(_WG, fv[_GAUSS_IDX]))
    return _Panel(a=a, b=b, value=k15, error=abs(k15 - g7))


def _initial_edges(a: float, b: float, features) -> list[float]:
    edges = [a, b]
    for x in sorted(set(float(v) for v in features)):
        if a < x < b:
            edges.append(x)
    return sorted(set(edges))


def integrate_adaptive(f, a: float, b: float, tol: float = 1e-10, *,
                       features=(), max_panels: int = 2048) -> QuadratureResult:
    """Integrate a vectorized f over [a, b] to relative tolerance `tol`.

    The convergence target is sum(panel errors) <= tol * max(1, |integral|);
    the panel with the worst error estimate is bisected until the target is
    met or `max_panels` is exhausted (converged = False then, with the best
    estimate still returned -- callers decide whether that is fatal).

    `features` lists x locations (resonances, kinks) that become initial
    panel edges so the refinement starts aligned with the difficult spots.
    """
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValueError(f"need finite a < b, got [{a!r}, {b!r}]")
    if tol <= 0:
        raise ValueError("tol must be positive")

    edges = _initial_edges(a, b, features)
    panels: list[_Panel] = [_apply_rule(f, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    evaluations = 15 * len(panels)

    # Worklist keyed by descending error; insertion counter breaks ties
    # deterministically.
    counter = 0
    heap: list[tuple[float, int, _Panel]] = []
    for p in panels:
        heapq.heappush(heap, (-p.error, counter, p))
        counter += 1
    frozen: list[_Panel] = []  # too narrow to split further

    def totals(live_heap, done):
        vals = [p.value for _, _, p in live_heap] + [p.value for p in done]
        errs = [p.error for _, _, p in live_heap] + [p.error for p in done]
        return math.fsum(vals), math.fsum(errs)

    value, error = totals(heap, frozen)
    while heap and (len(heap) + len(frozen)) < max_panels:
        if error <= tol * max(1.0, abs(value)):
            break
        _, _, worst = heapq.heappop(heap)
        mid = 0.5 * (worst.a + worst.b)
        if not (worst.a < mid < worst.b) or (worst.b - worst.a) < 1e-14 * (1.0 + abs(mid)):
            frozen.append(worst)  # at floating-point resolution; cannot improve
            continue
        left = _apply_rule(f, worst.a, mid)
        right = _apply_rule(f, mid, worst.b)
        evaluations += 30
        heapq.heappush(heap, (-left.error, counter, left))
        counter += 1
        heapq.heappush(heap, (-right.error, counter, right))
        counter += 1
        value, error = totals(heap, frozen)

    value, error = totals(heap, frozen)
    converged = error <= tol * max(1.0, abs(value))
    return QuadratureResult(value=value, error_estimate=error,
                            evaluations=evaluations, converged=converged)


@dataclass(frozen=True)
class CutoffScan:
    """Cumulative integrals I(Lambda) = int_start^Lambda f, on a cutoff ladder."""

    lambdas: np.ndarray
    values: np.ndarray
    errors: np.ndarray
    start: float = 0.0
    evaluations: int = 0
    converged: bool = True

    def __post_init__(self) -> None:
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.ndim != 1 or lam.size < 2:
            raise ValueError("a cutoff scan needs at least two cutoffs")
        if np.any(np.diff(lam) <= 0):
            raise ValueError("cutoffs must be strictly increasing")
        object.__setattr__(self, "lambdas", lam)
        values = np.asarray(self.values, dtype=float)
        errors = np.asarray(self.errors, dtype=float)
        if values.shape != lam.shape or errors.shape != lam.shape:
            raise ValueError("values and errors must match the cutoffs in length")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "errors", errors)


def geometric_cutoffs(lo: float = 1e2, hi: float = 1e4, n: int = 16) -> np.ndarray:
    """Default cutoff ladder: n geometrically spaced points on [lo, hi]."""
    if not (0 < lo < hi) or n < 2:
        raise ValueError("need 0 < lo < hi and n >= 2")
    return np.geomspace(lo, hi, n)


def cutoff_scan(f, lambdas, *, tol: float = 1e-9, features=(), start: float = 0.0,
                max_panels: int = 2048) -> CutoffScan:
    """Cumulative integrals over [start, Lambda_k], reusing earlier segments.

    Each segment [Lambda_{k-1}, Lambda_k] is integrated once at relative
    tolerance `tol` (relative to the running cumulative value), so the cost
    of the full scan is one pass over [start, Lambda_max].
    """
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or lam.size < 2:
        raise ValueError("need at least two cutoffs")
    if np.any(np.diff(lam) <= 0) or lam[0] <= start:
        raise ValueError("cutoffs must be strictly increasing and exceed the start point")

    values = []
    errors = []
    total_val = 0.0
    total_err = 0.0
    evaluations = 0
    all_ok = True
    lo = start
    for hi in lam:
        seg = integrate_adaptive(f, lo, float(hi), tol, features=features,
                                 max_panels=max_panels)
        evaluations += seg.evaluations
        all_ok = all_ok and seg.converged
        total_val += seg.value
        total_err += seg.error_estimate
        values.append(total_val)
        errors.append(total_err)
        lo = float(hi)
    return CutoffScan(lambdas=lam, values=np.asarray(values), errors=np.asarray(errors),
                      start=start, evaluations=evaluations, converged=all_ok)


@dataclass(frozen=True)
class TailClassification:
    """Measured growth law of a cutoff-regulated integral.

    kind: "convergent", "logarithmic", "power", or "ambiguous" when no
        hypothesis passes its threshold (never a silent guess).
    exponent: fitted growth exponent p of the *cumulative* integral,
        I(Lambda) ~ Lambda^p, from the log-log increment fit. For an
        integrand ~ x^q the cumulative exponent is p = q + 1. Present for
        power fits and for convergent fits with shrinking increments; None
        when increments are already at the noise floor.
    fit_residual: rms residual of the log-log increment fit (None if no fit).
    log_r_squared: R^2 of the cumulative-vs-ln(Lambda) fit (logarithmic
        hypothesis), populated when that fit was evaluated.
    """

    kind: str
    exponent: float | None
    fit_residual: float | None
    log_r_squared: float | None = None
    details: dict = field(default_factory=dict)


def classify_tail(scan: CutoffScan, *, fit_points: int = 5,
                  power_slope_min: float = 0.1,
                  power_residual_max: float = 0.1,
                  log_r2_min: float = 0.999,
                  convergent_slope_max: float = -0.1,
                  cauchy_tol: float = 1e-9) -> TailClassification:
    """Fit the asymptotic growth law of a cutoff scan.

    Only the last `fit_points` scan points enter the fits: the early part of
    a scan is routinely contaminated by the resonance region and by
    pre-asymptotic crossovers, and the hypothesis tests are about the tail.
    Decision order, applied to the increments dI_k between consecutive
    cutoffs (attributed to the upper cutoff):

    1. all window increments below cauchy_tol * I_end -> convergent (Cauchy);
    2. log-log slope of increments <= convergent_slope_max -> convergent
       with shrinking increments (cumulative exponent reported);
    3. slope >= power_slope_min and rms residual <= power_residual_max
       -> power with that cumulative exponent;
    4. |slope| < power_slope_min and cumulative-vs-ln(Lambda) R^2 >=
       log_r2_min -> logarithmic;
    5. otherwise ambiguous.
    """
    if fit_points < 5:
        raise ValueError("fit_points must be at least 5 (four increments)")
    n = scan.lambdas.size
    if n < fit_points:
        raise ValueError(f"scan has {n} points; classification needs at least {fit_points}")

    lam = scan.lambdas[-fit_points:]
    cum = scan.values[-fit_points:]
    inc = np.diff(cum)
    inc_lam = lam[1:]

    scale = abs(scan.values[-1])
    if scale == 0.0 or np.all(np.abs(inc) <= cauchy_tol * max(scale, 1e-300)):
        return TailClassification(kind="convergent", exponent=None, fit_residual=None,
                                  details={"reason": "increments at noise floor (Cauchy)"})
    if np.any(inc <= 0.0):
        return TailClassification(kind="ambiguous", exponent=None, fit_residual=None,
                                  details={"reason": "non-positive increments above noise floor"})

    log_l = np.log(inc_lam)
    log_i = np.log(inc)
    slope, intercept = np.polyfit(log_l, log_i, 1)
    resid = float(np.sqrt(np.mean((log_i - (slope * log_l + intercept)) ** 2)))
    slope = float(slope)

    if slope <= convergent_slope_max:
        return TailClassification(kind="convergent", exponent=slope, fit_residual=resid,
                                  details={"reason": "increments shrink as a power"})
    if slope >= power_slope_min:
        if resid <= power_residual_max:
            return TailClassification(kind="power", exponent=slope, fit_residual=resid)
        return TailClassification(kind="ambiguous", exponent=slope, fit_residual=resid,
                                  details={"reason": "power-law residual above threshold"})

    # Near-zero increment slope: constant increments per decade, the
    # signature of logarithmic growth. Confirm on the cumulative values.
    ll = np.log(lam)
    coef = np.polyfit(ll, cum, 1)
    fitted = np.polyval(coef, ll)
    ss_res = float(np.sum((cum - fitted) ** 2))
    ss_tot = float(np.sum((cum - np.mean(cum)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    if r2 >= log_r2_min:
        return TailClassification(kind="logarithmic", exponent=None, fit_residual=resid,
                                  log_r_squared=r2)
    return TailClassification(kind="ambiguous", exponent=slope, fit_residual=resid,
                              log_r_squared=r2,
                              details={"reason": "neither power nor logarithmic fit passed"})
