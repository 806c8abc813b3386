from __future__ import annotations

import math

import numpy as np
import pytest

from qrlc.asymptotics import (
    REFERENCE,
    analytical_estimates,
    beta_reference,
    binary_entropy,
    correctable_fraction,
    estimate_threshold,
    fit_asymptotic,
    fit_scaling,
    fraction_model,
)
from qrlc.errors import FitError, ParameterError


def model_points(pf: float, c: float, qs=range(1, 11)):
    return [(q, 1 - c * (1 - pf) ** q) for q in qs]


def test_noiseless_recovery_for_random_parameters():
    rng = np.random.default_rng(0)
    for _ in range(50):
        pf = 10 ** rng.uniform(-6, -0.5)
        c = rng.uniform(0.5, 1.0)
        fit = fit_asymptotic(model_points(pf, c))
        assert fit.p_failure == pytest.approx(pf, rel=1e-10)
        assert fit.c_of_p == pytest.approx(c, rel=1e-10)
        assert fit.valid and fit.r_squared == pytest.approx(1.0)


def test_noisy_recovery():
    rng = np.random.default_rng(1)
    pts = [(q, v * (1 + 0.01 * rng.standard_normal())) for q, v in model_points(0.01, 0.99)]
    fit = fit_asymptotic(pts)
    assert fit.p_failure == pytest.approx(0.01, rel=0.05)
    assert fit.c_of_p == pytest.approx(0.99, rel=0.05)
    assert fit.r_squared > 0.99


def test_fit_window_and_dropped_points():
    pts = model_points(0.02, 0.95) + [(11, 1.0)]
    fit = fit_asymptotic(pts, q_min=2)
    assert fit.q_values == tuple(range(2, 11))
    assert any("dropped" in w for w in fit.warnings)
    with pytest.raises(FitError):
        fit_asymptotic([(1, 0.1), (2, 1.0), (3, 1.0)])


def test_invalid_fit_is_flagged():
    fit = fit_asymptotic([(1, 0.5), (2, 0.4), (3, 0.3)])
    assert not fit.valid
    assert any("rejected" in w for w in fit.warnings)


def test_power_law_recovery():
    ps = np.logspace(-6, -2, 9)
    pts = [(p, -math.expm1(-0.1 * p**2)) for p in ps]
    fit = fit_scaling(pts)
    assert fit.exponent == pytest.approx(2.0, abs=1e-6)
    assert fit.intercept == pytest.approx(-1.0, abs=1e-6)
    c_pts = [(p, -3.0 * p) for p in ps]
    cfit = fit_scaling(c_pts, kind="c_of_p")
    assert cfit.exponent == pytest.approx(1.0) and cfit.intercept == pytest.approx(math.log10(3.0))
    assert fit_scaling(pts, window_max_p=1e-3).n_points == 7
    with pytest.raises(FitError):
        fit_scaling(pts, window_max_p=5e-6)
    with pytest.raises(ParameterError):
        fit_scaling(pts, kind="other")


def test_threshold_of_crossing_power_laws():
    ps = np.logspace(-4, 0, 41)
    a, b = 0.5, 20.0
    curves = {"n3": [(p, a * p) for p in ps], "n5": [(p, b * p**2) for p in ps]}
    est = estimate_threshold(curves)
    assert est.median == pytest.approx(a / b, rel=0.02)
    swapped = estimate_threshold(dict(reversed(list(curves.items()))))
    assert swapped.median == pytest.approx(est.median)
    coarse = {k: v[::2] for k, v in curves.items()}
    assert estimate_threshold(coarse).median == pytest.approx(a / b, rel=0.02)


def test_threshold_edge_cases():
    ps = np.logspace(-4, -1, 10)
    parallel = {"a": [(p, p) for p in ps], "b": [(p, 2 * p) for p in ps]}
    assert estimate_threshold(parallel).empty
    with pytest.raises(ParameterError):
        estimate_threshold({"a": [(p, p) for p in ps]})
    with pytest.raises(ParameterError):
        estimate_threshold({"a": [(1e-6, 1e-6), (1e-5, 1e-5)], "b": [(1e-2, 1e-2), (1e-1, 1e-1)]})


def test_analytical_estimators():
    assert correctable_fraction(1024, 0) == pytest.approx(1.0)
    est = analytical_estimates(11, 1, 0.5, 1e-3, 100)
    assert est.n_bound == 1024
    assert binary_entropy(0.5) == 1.0 and binary_entropy(0.0) == 0.0
    s = 2.0**20
    for r in (1e-4, 1e-3, 1e-2, 0.1):
        assert correctable_fraction(s, r * s) == pytest.approx(1 - r / 2, rel=0.01)
    with pytest.raises(ParameterError):
        analytical_estimates(5, 1, 1.5, 0.1, 10)


def test_fraction_model_fixtures():
    ref = REFERENCE["fraction"]
    two = ref["eta0=2"]
    one = ref["eta0=1"]
    assert fraction_model(two["n_f"], **{k: two[k] for k in ("s1", "s2", "s3")}, n_f=two["n_f"]) == pytest.approx(0.5327)
    assert fraction_model(-1e3, one["s1"], one["s2"], one["s3"], one["n_f"]) == pytest.approx(one["s3"] - one["s1"] / 2)
    for n in (4, 10, 16, 30):
        total = fraction_model(n, one["s1"], one["s2"], one["s3"], one["n_f"])
        total += fraction_model(n, two["s1"], two["s2"], two["s3"], two["n_f"])
        assert total == pytest.approx(1.0)
    assert REFERENCE["p_threshold"] == 2e-5
    assert beta_reference(10) == pytest.approx(math.log10(5.630 * (10 - 3.6453) ** 1.035))
