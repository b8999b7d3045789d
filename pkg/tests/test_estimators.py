import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wealthshare.data import RichList, WeightedSample, combine_survey_richlist, tail_view
from wealthshare.errors import ConfigurationError, DegenerateTailError, InsufficientDataError
from wealthshare.estimators import METHODS, alpha_ml, alpha_reg, alpha_wijk, estimate
from wealthshare.simulation import SimConfig, run_study
from wealthshare.synth import exact_ccdf_tail


def t248():
    return tail_view(WeightedSample([2.0, 4.0, 8.0]), 2.0)


def test_hand_values():
    assert alpha_wijk(t248()).alpha == pytest.approx(1.75, rel=1e-15)
    assert alpha_ml(t248()).alpha == pytest.approx(1 / math.log(2), rel=1e-15)
    # both values at e * w_min: mean log is exactly 1
    two = tail_view(WeightedSample([math.e, math.e]), 1.0)
    assert alpha_ml(two).alpha == pytest.approx(1.0, rel=1e-15)


def test_wijk_mean_three_times_wmin():
    # mean exactly 3 * w_min -> 1.5
    t = tail_view(WeightedSample([1.0, 5.0], [1.0, 1.0]), 1.0)
    assert alpha_wijk(t).alpha == pytest.approx(1.5, rel=1e-15)


@pytest.mark.parametrize("alpha", [1.1, 1.5, 2.7])
def test_regression_exact_on_exact_ccdf(alpha):
    w, n = exact_ccdf_tail(alpha, 1e6, 150, 1.07)
    t = tail_view(WeightedSample(w, n), 1e6)
    assert alpha_reg(t).alpha == pytest.approx(alpha, rel=1e-12)
    r = alpha_reg(t, intercept=True)
    assert r.alpha == pytest.approx(alpha, rel=1e-12)
    assert abs(r.intercept) < 1e-12


def test_degenerate_tails():
    single = tail_view(WeightedSample([3.0], [2.0]), 3.0)
    for m in ("ml", "wijk"):
        with pytest.raises(DegenerateTailError):
            estimate(single, m)
    with pytest.raises(InsufficientDataError):
        alpha_reg(tail_view(WeightedSample([3.0, 4.0]), 3.0))
    with pytest.raises(ConfigurationError):
        estimate(t248(), "hill")


def test_dispatch_accepts_hyphen():
    assert estimate(t248(), "reg-intercept").method == "reg_intercept"
    assert set(METHODS) == {"ml", "reg", "reg_intercept", "wijk"}


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1e6), st.integers(0, 10_000))
def test_scale_invariance(lam, seed):
    rng = np.random.default_rng(seed)
    v = 1e5 * (1 + rng.pareto(1.5, 60))
    n = rng.uniform(0.5, 3.0, 60)
    a = WeightedSample(v, n)
    b = WeightedSample(v * lam, n)
    wm = float(np.sort(v)[5])
    for m in METHODS:
        x = estimate(tail_view(a, wm), m).alpha
        y = estimate(tail_view(b, wm * lam), m).alpha
        assert y == pytest.approx(x, rel=1e-12)


def test_weight_encoding_invariance(rng):
    v = np.round(1e5 * (1 + rng.pareto(1.5, 80)), -2)
    k = rng.integers(1, 5, 80)
    agg = tail_view(WeightedSample(v, k.astype(float)), 1e5)
    rep = tail_view(WeightedSample(np.repeat(v, k)), 1e5)
    for m in ("ml", "wijk", "reg"):
        assert estimate(agg, m).alpha == pytest.approx(estimate(rep, m).alpha, rel=1e-13)


def test_gapped_data_flags_non_ml():
    survey = tail_view(WeightedSample([1e6, 2e6, 4e6, 8e6], [8.0, 4.0, 2.0, 1.0]), 1e6)
    comb = tail_view(combine_survey_richlist(survey, RichList([5e8, 1e9], [1, 1])), 1e6)
    assert estimate(comb, "ml").warning is None
    for m in ("reg", "reg_intercept", "wijk"):
        assert estimate(comb, m).warning


@pytest.mark.slow
def test_ml_consistency_and_mse_ordering():
    small = run_study(SimConfig(n_samples=500, n_reps=300, seed=5))
    large = run_study(SimConfig(n_samples=5000, n_reps=300, seed=5))
    assert large.row("ml").mse < small.row("ml").mse
    assert large.row("ml").mse < large.row("wijk").mse
    assert large.row("reg").mse < large.row("reg_intercept").mse
