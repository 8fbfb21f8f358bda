"""Belief updates, the reflected level process, and u-level trigger sets."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from stopduel.belief import (BeliefPath, TriggerSet, build_belief_path,
                             gamma_from_pi, gamma_path, level_time_set,
                             pi_from_gamma, z_path)
from stopduel.regions import boundary_b


def test_pi_gamma_roundtrip():
    for p in (0.05, 0.15, 0.5, 0.93):
        gam = np.linspace(0.0, 0.999999, 200)
        back = gamma_from_pi(p, pi_from_gamma(p, gam))
        assert np.max(np.abs(back - gam)) < 1e-12


def test_odds_identity():
    # (1 - p) = (1 - p Gamma)(1 - Pi) is the no-stop likelihood split
    for p in (0.1, 0.3, 0.8):
        gam = np.linspace(0.0, 1.0, 101)
        pi = pi_from_gamma(p, gam)
        assert np.max(np.abs((1.0 - p * gam) * (1.0 - pi) - (1.0 - p))) < 1e-12


def test_pi_monotone_and_ends():
    p = 0.3
    gam = np.linspace(0.0, 1.0, 50)
    pi = pi_from_gamma(p, gam)
    assert pi[0] == pytest.approx(p)
    assert pi[-1] == pytest.approx(0.0)
    assert np.all(np.diff(pi) < 0)


def test_pi_validation():
    with pytest.raises(ValueError):
        pi_from_gamma(0.0, 0.5)
    with pytest.raises(ValueError):
        pi_from_gamma(1.0, 0.5)
    with pytest.raises(ValueError):
        pi_from_gamma(0.3, 1.5)
    with pytest.raises(ValueError):
        gamma_from_pi(0.3, 0.4)  # belief above prior


def test_z_path_caps_and_runs_minimum():
    b = np.array([0.5, 0.4, 0.45, 0.2, 0.3, 0.1])
    z = z_path(0.35, b)
    assert_allclose(z, [0.35, 0.35, 0.35, 0.2, 0.2, 0.1])
    with pytest.raises(ValueError):
        z_path(0.35, np.array([0.5, 1.2]))


def test_gamma_path_requires_monotone():
    with pytest.raises(ValueError):
        gamma_path(0.3, np.array([0.1, 0.2]))
    with pytest.raises(ValueError):
        gamma_path(0.3, np.array([0.4, 0.2]))
    got = gamma_path(0.3, np.array([0.3, 0.2, 0.05]))
    assert got[0] == pytest.approx(0.0)
    assert np.all(np.diff(got) > 0)


def test_trigger_set_standard(std_oracle):
    # p = 0.15, u = 0.5 gives z = 3/37; with eta = 2 the threshold solves
    # 17 L^2 - 74 L + 74 = 0 in (1, 2)
    ts = level_time_set(0.15, 0.5)
    assert ts.z_level == pytest.approx(3.0 / 37.0, abs=1e-15)
    expect = (37.0 - np.sqrt(111.0)) / 17.0
    got = ts.threshold(std_oracle)
    assert got == pytest.approx(expect, abs=1e-9)
    assert not ts.contains(std_oracle, got * 0.999)
    assert ts.contains(std_oracle, got * 1.001)


def test_trigger_set_u_zero_is_prior_level(std_oracle):
    ts = level_time_set(0.15, 0.0)
    assert ts.z_level == pytest.approx(0.15)
    # b(threshold) = 0.15, the level where reflection first binds
    thr = ts.threshold(std_oracle)
    assert float(boundary_b(std_oracle, thr)) == pytest.approx(0.15, abs=1e-10)


def test_trigger_monotone_in_u(std_oracle):
    thresholds = [level_time_set(0.15, u).threshold(std_oracle)
                  for u in (0.0, 0.25, 0.5, 0.75, 0.95)]
    assert np.all(np.diff(thresholds) > 0)


def test_level_time_set_validation():
    with pytest.raises(ValueError):
        level_time_set(0.15, 1.0)
    with pytest.raises(ValueError):
        level_time_set(0.15, -0.01)
    with pytest.raises(ValueError):
        level_time_set(0.0, 0.5)


def test_build_belief_path(std_oracle):
    t = np.linspace(0.0, 1.0, 6)
    x = np.array([1.5, 1.55, 1.52, 1.66, 1.6, 1.7])
    bp = build_belief_path(std_oracle, 0.15, t, x)
    assert np.all(np.diff(bp.z) <= 1e-15)
    assert np.all(np.diff(bp.gamma) >= -1e-15)
    assert np.all(np.diff(bp.pi) <= 1e-15)
    # the reflection keeps Pi glued to Z
    assert np.max(np.abs(bp.pi - bp.z)) < 1e-12
    assert np.max(np.abs((1.0 - 0.15 * bp.gamma) * (1.0 - bp.pi) - 0.85)) < 1e-12


def test_belief_path_validation():
    t = np.array([0.0, 1.0])
    with pytest.raises(ValueError):
        BeliefPath(t=t, x=np.ones(3), b=np.ones(2), z=np.ones(2),
                   gamma=np.zeros(2), pi=np.ones(2))
    with pytest.raises(ValueError):
        BeliefPath(t=t, x=np.ones(2), b=np.ones(2),
                   z=np.array([0.1, 0.2]),  # Z increases
                   gamma=np.zeros(2), pi=np.ones(2))


def test_belief_path_csv(tmp_path, std_oracle):
    t = np.linspace(0.0, 1.0, 4)
    x = np.array([1.5, 1.6, 1.55, 1.8])
    bp = build_belief_path(std_oracle, 0.2, t, x)
    out = tmp_path / "path.csv"
    bp.to_csv(out)
    data = np.genfromtxt(out, delimiter=",", names=True)
    assert_allclose(data["pi"], bp.pi)
    assert_allclose(data["gamma"], bp.gamma)
