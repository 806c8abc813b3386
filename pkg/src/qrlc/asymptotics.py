"""Per-round failure fits, scaling laws, threshold crossings and analytical estimates.

Over ``q`` rounds the success probability is modelled as
``1 - P_total(p, q) = C(p) (1 - P_failure(p))^q``, so ``log(1 - P_total)`` is
linear in ``q`` with slope ``log(1 - P_failure)`` and intercept ``log C``.
At small ``p`` the per-round failure behaves like ``1 - exp(-mu p^eta)`` and
``C`` like ``exp(-gamma N p^eta_C)``; both are fitted on log-log axes.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.special import expit

from qrlc.errors import FitError, ParameterError

logger = logging.getLogger(__name__)

__all__ = [
    "AnalyticalEstimates",
    "AsymptoticFit",
    "REFERENCE",
    "ScalingFit",
    "ThresholdEstimate",
    "analytical_estimates",
    "beta_reference",
    "binary_entropy",
    "correctable_fraction",
    "estimate_threshold",
    "fit_asymptotic",
    "fit_scaling",
    "fraction_model",
]

# Reported parameter values, kept as documentation fixtures for plausibility bands.
REFERENCE: dict[str, object] = {
    "p_threshold": 2e-5,
    "beta": {"b1": 0.4494, "n_beta": 3.6453, "b2": 0.7505, "scale": 5.630, "power": 1.035},
    "alpha": {"eta0=1": {"a1": -0.0074, "a2": -0.8170}, "eta0=2": {"a1": 0.0838, "a2": 2.8530}},
    "fraction": {
        "eta0=1": {"s1": -0.7206, "s2": 0.8665, "n_f": 16.5506, "s3": 0.4673},
        "eta0=2": {"s1": 0.7206, "s2": 0.8665, "n_f": 16.5506, "s3": 0.5327},
    },
    "fit_r_squared": 0.999,
}


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Ordinary least squares; returns slope, intercept and R^2."""
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


@dataclass(frozen=True)
class AsymptoticFit:
    """Straight-line fit of ``log(1 - P_total)`` against ``q`` at one ``p``.

    Attributes:
        p: Physical error rate, if known.
        m: Slope.
        b: Intercept.
        p_failure: ``1 - e^m``.
        c_of_p: ``e^b``.
        r_squared: Coefficient of determination.
        q_values: Rounds used in the fit.
        warnings: Dropped points and invariant violations.
    """

    p: float | None
    m: float
    b: float
    p_failure: float
    c_of_p: float
    r_squared: float
    q_values: tuple[int, ...]
    warnings: tuple[str, ...] = ()

    @property
    def valid(self) -> bool:
        return self.m <= 0.0 and 0.0 <= self.p_failure <= 1.0 and 0.0 < self.c_of_p <= 1.0


def fit_asymptotic(
    points: Sequence[tuple[int, float]], p: float | None = None, q_min: int | None = None
) -> AsymptoticFit:
    """Fit ``log(1 - P_total) = m q + b``.

    Args:
        points: ``(q, P_total)`` pairs at a fixed ``p``.
        p: Rate the points belong to; recorded only.
        q_min: Drop rounds below this value (short sequences deviate from
            the asymptotic regime).

    Raises:
        FitError: With fewer than three usable points.
    """
    notes: list[str] = []
    qs, ys = [], []
    for q, pt in points:
        if q_min is not None and q < q_min:
            continue
        if not pt < 1.0:
            msg = f"dropped q={q}: P_total={pt} is not below 1"
            logger.warning(msg)
            notes.append(msg)
            continue
        qs.append(float(q))
        ys.append(math.log1p(-pt))
    if len(qs) < 3:
        raise FitError(f"need at least 3 usable points, have {len(qs)}")
    m, b, r2 = _linear_fit(np.array(qs), np.array(ys))
    pf = -math.expm1(m)
    c = math.exp(b)
    fit = AsymptoticFit(p, m, b, pf, c, r2, tuple(int(q) for q in qs), tuple(notes))
    if not fit.valid:
        msg = f"fit rejected: m={m:.3e}, P_failure={pf:.3e}, C={c:.6f}"
        logger.warning(msg)
        fit = AsymptoticFit(p, m, b, pf, c, r2, fit.q_values, tuple(notes) + (msg,))
    return fit


@dataclass(frozen=True)
class ScalingFit:
    """Log-log fit ``log10(g(value)) = exponent * log10(p) + intercept``.

    Attributes:
        kind: ``"p_failure"`` (``g = -log(1 - value)``) or ``"c_of_p"``
            (``g = -b``, the fitted intercept).
        exponent: ``eta`` or ``eta_C``.
        intercept: ``alpha`` or ``beta``.
        r_squared: Coefficient of determination.
        window_max_p: Largest ``p`` admitted.
        n_points: Points used.
    """

    kind: str
    exponent: float
    intercept: float
    r_squared: float
    window_max_p: float
    n_points: int
    warnings: tuple[str, ...] = field(default=())


def fit_scaling(
    points: Sequence[tuple[float, float]], kind: str = "p_failure", window_max_p: float = 1e-2
) -> ScalingFit:
    """Fit the small-``p`` power law of ``P_failure`` or of ``C``.

    Args:
        points: ``(p, value)``; for ``kind="c_of_p"`` the value is the
            intercept ``b = log C``.
        kind: ``"p_failure"`` or ``"c_of_p"``.
        window_max_p: Only points with ``p <= window_max_p`` are used.

    Raises:
        FitError: With fewer than three usable in-window points.
    """
    if kind not in ("p_failure", "c_of_p"):
        raise ParameterError(f"unknown scaling kind {kind!r}")
    xs, ys, notes = [], [], []
    for p, v in points:
        if not 0.0 < p <= window_max_p:
            continue
        g = -math.log1p(-v) if kind == "p_failure" else -v
        if not (g > 0.0 and math.isfinite(g)):
            notes.append(f"dropped p={p:.3e}: transformed value {g!r} not positive")
            continue
        xs.append(math.log10(p))
        ys.append(math.log10(g))
    if len(xs) < 3:
        raise FitError(f"need at least 3 usable in-window points, have {len(xs)}")
    slope, intercept, r2 = _linear_fit(np.array(xs), np.array(ys))
    return ScalingFit(kind, slope, intercept, r2, window_max_p, len(xs), tuple(notes))


@dataclass(frozen=True)
class ThresholdEstimate:
    """Crossing points of failure curves for different code sizes."""

    median: float | None
    low: float | None
    high: float | None
    crossings: tuple[tuple[object, object, float], ...]

    @property
    def empty(self) -> bool:
        return not self.crossings


def _crossings(a: Sequence[tuple[float, float]], b: Sequence[tuple[float, float]]) -> list[float]:
    pa = np.array(sorted(a))
    pb = np.array(sorted(b))
    lo = max(pa[0, 0], pb[0, 0])
    hi = min(pa[-1, 0], pb[-1, 0])
    if lo >= hi:
        raise ParameterError("curves do not share a p range")
    grid = np.union1d(pa[:, 0], pb[:, 0])
    grid = np.log10(grid[(grid >= lo) & (grid <= hi)])
    ya = np.interp(grid, np.log10(pa[:, 0]), np.log10(pa[:, 1]))
    yb = np.interp(grid, np.log10(pb[:, 0]), np.log10(pb[:, 1]))
    d = ya - yb
    out = []
    for i in range(len(grid) - 1):
        if d[i] == 0.0:
            out.append(float(10 ** grid[i]))
        elif d[i] * d[i + 1] < 0.0:
            t = d[i] / (d[i] - d[i + 1])
            out.append(float(10 ** (grid[i] + t * (grid[i + 1] - grid[i]))))
    if len(d) and d[-1] == 0.0:
        out.append(float(10 ** grid[-1]))
    return out


def estimate_threshold(curves: Mapping[object, Sequence[tuple[float, float]]]) -> ThresholdEstimate:
    """Median and range of pairwise crossings of log-log interpolated curves.

    Args:
        curves: ``label -> [(p, P_failure), ...]`` with positive values.

    Raises:
        ParameterError: With fewer than two curves or disjoint ``p`` ranges.
    """
    if len(curves) < 2:
        raise ParameterError("need curves for at least two code sizes")
    found: list[tuple[object, object, float]] = []
    for (la, ca), (lb, cb) in itertools.combinations(curves.items(), 2):
        for x in _crossings(ca, cb):
            found.append((la, lb, x))
    if not found:
        return ThresholdEstimate(None, None, None, ())
    values = np.array([x for *_, x in found])
    return ThresholdEstimate(float(np.median(values)), float(values.min()), float(values.max()), tuple(found))


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ParameterError("entropy argument must lie in [0, 1]")
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def correctable_fraction(s: float, n_errors: float) -> float:
    """Expected fraction of ``N`` distinct errors whose syndromes are unique among ``S`` syndromes."""
    if s < 1 or n_errors < 0:
        raise ParameterError("need S >= 1 and N >= 0")
    if s == 1:
        return 1.0 / (n_errors + 1.0)
    missed = -math.expm1((n_errors + 1.0) * math.log1p(-1.0 / s))
    return s / (n_errors + 1.0) * missed


@dataclass(frozen=True)
class AnalyticalEstimates:
    """Ideal-code estimates for a target miss probability ``epsilon``.

    Attributes:
        f: Correctable fraction with ``N`` set to ``n_tilde``.
        n_bound: Largest error count keeping ``f >= 1 - epsilon``.
        omega_max: Fault order covering ``1 - epsilon`` of the binomial mass.
        n_tilde: Estimated number of fault configurations up to ``omega_max``.
    """

    f: float
    n_bound: float
    omega_max: float
    n_tilde: float


def analytical_estimates(n: int, k: int, epsilon: float, p: float, n_cnot: int) -> AnalyticalEstimates:
    """Evaluate the closed-form threshold heuristics for an ideal random code.

    Raises:
        ParameterError: On ``epsilon`` or ``p`` outside ``(0, 1)`` or ``k >= n``.
    """
    if not 0.0 < epsilon < 1.0:
        raise ParameterError("epsilon must lie in (0, 1)")
    if not 0.0 < p < 1.0:
        raise ParameterError("p must lie in (0, 1)")
    if not 0 <= k < n or n_cnot < 1:
        raise ParameterError("need 0 <= k < n and a positive CNOT count")
    if n - k < 10:
        logger.warning("n - k = %d: the large-S approximations are loose", n - k)
    s = 2.0 ** (n - k)
    n_bound = 2.0 ** (n - k + 1) * epsilon
    mu = n_cnot * p
    sigma = math.sqrt(n_cnot * p * (1.0 - p))
    omega = mu + sigma * math.sqrt(max(0.0, 2.0 * math.log(1.0 / (2.0 * epsilon))))
    ratio = min(omega / n_cnot, 1.0)
    n_tilde = 2.0 ** (n_cnot * binary_entropy(ratio)) * math.sqrt(1.0 / (2.0 * math.pi * omega))
    return AnalyticalEstimates(correctable_fraction(s, n_tilde), n_bound, omega, n_tilde)


def fraction_model(n: float, s1: float, s2: float, s3: float, n_f: float) -> float:
    """Sigmoid model of the share of codes with a given leading exponent."""
    return s1 * (float(expit(s2 * (n - n_f))) - 0.5) + s3


def beta_reference(n: float) -> float:
    """Reported large-``n`` trend of the ``C(p)`` intercept, ``log10(5.630 (n - 3.6453)^1.035)``."""
    ref = REFERENCE["beta"]
    assert isinstance(ref, dict)
    return math.log10(ref["scale"] * (n - ref["n_beta"]) ** ref["power"])
