"""Closed-form GBM model: eta, threshold, value, and the hitting transform."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import quad

from stopduel.model import (GbmRealOptionModel, eta, hitting_discount,
                            one_player_threshold, payoff_g, value_gbm)


def test_eta_is_two_for_standard_parameters(std_model):
    assert eta(std_model) == pytest.approx(2.0, rel=1e-12)


def test_eta_solves_characteristic_equation():
    m = GbmRealOptionModel(0.03, 0.35, 0.07, 1.0)
    e = eta(m)
    resid = 0.5 * m.sigma ** 2 * e * (e - 1.0) + m.mu * e - m.r
    assert abs(resid) < 1e-12
    assert e > 1.0


def test_threshold_standard(std_model):
    assert one_player_threshold(std_model) == pytest.approx(2.0, rel=1e-12)


def test_threshold_formula():
    m = GbmRealOptionModel(0.01, 0.25, 0.06, 1.5)
    e = eta(m)
    assert one_player_threshold(m) == pytest.approx(e * 1.5 / (e - 1.0))


def test_value_standard_point(std_model):
    # (x/B)^2 (B - K) = (1.5/2)^2 * 1
    assert value_gbm(std_model, 1.5) == pytest.approx(0.5625, rel=1e-12)
    assert payoff_g(std_model, 1.5) == pytest.approx(0.5)


def test_value_dominates_payoff(std_model):
    x = np.linspace(0.1, 6.0, 400)
    v = value_gbm(std_model, x)
    g = payoff_g(std_model, x)
    assert np.all(v >= g - 1e-14)
    # strict below the threshold, equal above
    assert np.all(v[x < 2.0] > g[x < 2.0] - 1e-14)
    assert_allclose(v[x >= 2.0], g[x >= 2.0])


def test_value_continuous_at_threshold(std_model):
    B = one_player_threshold(std_model)
    lo = value_gbm(std_model, B * (1 - 1e-9))
    hi = value_gbm(std_model, B * (1 + 1e-9))
    assert lo == pytest.approx(hi, rel=1e-7)


def test_value_exceeds_half_payoff(std_model):
    # the belief boundary c is only defined if V > g/2 everywhere
    x = np.linspace(0.05, 20.0, 1000)
    assert np.all(value_gbm(std_model, x) > 0.5 * payoff_g(std_model, x))


def test_model_validation():
    with pytest.raises(ValueError):
        GbmRealOptionModel(0.0, -0.2, 0.04, 1.0)
    with pytest.raises(ValueError):
        GbmRealOptionModel(0.0, 0.2, 0.04, 0.0)
    with pytest.raises(ValueError):
        GbmRealOptionModel(0.05, 0.2, 0.04, 1.0)  # mu >= r
    with pytest.raises(ValueError):
        GbmRealOptionModel(0.0, 0.2, -0.01, 1.0)


def test_hitting_discount_standard(std_model):
    assert hitting_discount(std_model, 1.5, 2.0) == pytest.approx(0.5625, rel=1e-12)
    assert hitting_discount(std_model, 1.5, 1.5) == pytest.approx(1.0)


def test_hitting_discount_multiplicative(std_model):
    d = hitting_discount(std_model, 1.2, 1.5) * hitting_discount(std_model, 1.5, 1.9)
    assert d == pytest.approx(hitting_discount(std_model, 1.2, 1.9), rel=1e-12)


def test_hitting_discount_rejects_level_below_state(std_model):
    with pytest.raises(ValueError):
        hitting_discount(std_model, 1.5, 1.2)


def test_hitting_discount_against_density_integral(std_model):
    """Independent check: integrate e^{-rt} against the first-passage density.

    log X has drift nu = mu - sigma^2/2 and volatility sigma; the first
    passage of a level d > 0 has the inverse-Gaussian density
    d/(sigma sqrt(2 pi t^3)) exp(-(d - nu t)^2 / (2 sigma^2 t)).
    """
    m = std_model
    nu = m.mu - 0.5 * m.sigma ** 2
    for x, L in ((1.5, 1.7), (1.2, 1.9), (0.8, 1.1)):
        d = math.log(L / x)

        def integrand(t):
            return (math.exp(-m.r * t) * d
                    / (m.sigma * math.sqrt(2.0 * math.pi * t ** 3))
                    * math.exp(-(d - nu * t) ** 2 / (2.0 * m.sigma ** 2 * t)))

        val, err = quad(integrand, 0.0, np.inf, limit=200)
        assert err < 1e-7
        assert hitting_discount(m, x, L) == pytest.approx(val, abs=1e-8)


def test_vectorized_evaluation(std_model):
    x = np.array([0.5, 1.0, 1.5, 2.0, 3.0])
    v = value_gbm(std_model, x)
    assert v.shape == x.shape
    assert_allclose(v, [value_gbm(std_model, xi) for xi in x])
    assert value_gbm(std_model, 1.5).ndim == 0 or isinstance(
        value_gbm(std_model, 1.5), float)


def test_value_rejects_nonpositive_state(std_model):
    with pytest.raises(ValueError):
        value_gbm(std_model, 0.0)
    with pytest.raises(ValueError):
        value_gbm(std_model, np.array([1.0, -2.0]))
