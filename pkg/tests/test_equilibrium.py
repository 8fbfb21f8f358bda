"""Equilibrium construction: opening atom, reflection rules, values, beliefs."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from stopduel.equilibrium import (NoEquilibriumError, RandomizedStopRule,
                                  belief_evolution, build_profile,
                                  initial_jump, jump_structure)
from stopduel.regions import RegionLabel, b_inverse, boundary_b, boundary_c

# frozen values for the standard model at p1 = 0.15, x = 1.5
GAMMA0_STD = 7.0 / 12.0   # opening atom
Q1_STD = 5.0 / 73.0       # post-jump prior
VALUE_STD = 0.478125      # (1 - p1) * V(1.5)


def test_initial_jump_frozen(std_oracle):
    gamma0, q1 = initial_jump(std_oracle, 0.15, 1.5)
    assert gamma0 == pytest.approx(GAMMA0_STD, rel=1e-12)
    assert q1 == pytest.approx(Q1_STD, rel=1e-12)


def test_initial_jump_vanishes_below_b(std_oracle):
    # p = 0.10 < b(1.5) = 1/9 is in the no-action continuation region
    gamma0, q1 = initial_jump(std_oracle, 0.10, 1.5)
    assert gamma0 == 0.0
    assert q1 == 0.10


def test_initial_jump_rejects_stop_region(std_oracle):
    with pytest.raises(ValueError, match="stop region"):
        initial_jump(std_oracle, 0.25, 1.5)


def test_opening_atom_limits_at_region_edges(std_oracle):
    # the atom fills up toward 1 as the prior approaches the stop boundary c,
    # and shrinks to 0 at the lower boundary b
    for x in (1.3, 1.5, 1.7):
        c = float(boundary_c(std_oracle, x))
        gamma0, _ = initial_jump(std_oracle, c * (1.0 - 1e-9), x)
        assert 1.0 - 1e-6 < gamma0 < 1.0
        b = float(boundary_b(std_oracle, x))
        gamma0, _ = initial_jump(std_oracle, b * (1.0 + 1e-9), x)
        assert gamma0 < 1e-6


def test_post_jump_algebra_on_grid(std_oracle):
    """(1 - p1*G0)(1 - q1) = 1 - p1 and the time-zero indifference identity."""
    for x in np.linspace(1.05, 1.95, 7):
        b = float(boundary_b(std_oracle, x))
        c = float(boundary_c(std_oracle, x))
        v = float(std_oracle.value(x))
        g = float(std_oracle.payoff(x))
        for t in (0.25, 0.5, 0.75):
            p1 = b + t * (c - b)
            gamma0, q1 = initial_jump(std_oracle, p1, x)
            assert abs((1.0 - p1 * gamma0) * (1.0 - q1) - (1.0 - p1)) < 1e-12
            assert abs((1.0 - p1) * v - g * (1.0 - 0.5 * p1 * gamma0)) < 1e-12
            # post-jump prior lands strictly inside continuation
            assert (1.0 - q1) * v > g


def test_build_profile_standard_symmetric(std_oracle):
    prof = build_profile(std_oracle, 0.15, 0.15, 1.5)
    assert prof.region is RegionLabel.ACTION_PRIME
    assert prof.gamma0_star == pytest.approx(GAMMA0_STD, rel=1e-12)
    assert prof.q1 == pytest.approx(Q1_STD, rel=1e-12)
    assert prof.value1 == pytest.approx(VALUE_STD, rel=1e-12)
    assert prof.value2 == prof.value1
    assert prof.scale == 1.0
    assert not prof.relabeled
    assert prof.rule2.atom0 == prof.gamma0_star
    assert prof.rule2.scale == 1.0
    assert not prof.rule2.terminal_jump
    assert prof.rule1.terminal_jump
    assert prof.rule1.atom0 == prof.gamma0_star
    assert prof.rule1.q == prof.rule2.q == prof.q1


def test_build_profile_no_action_region(std_oracle):
    prof = build_profile(std_oracle, 0.10, 0.10, 1.5)
    assert prof.region is RegionLabel.CONTINUATION_BAR
    assert prof.gamma0_star == 0.0
    assert prof.q1 == 0.10
    assert prof.value1 == pytest.approx(0.9 * 0.5625, rel=1e-12)
    assert prof.rule1.atom0 == 0.0 and prof.rule2.atom0 == 0.0


def test_build_profile_stop_region_exact(std_oracle):
    prof = build_profile(std_oracle, 0.25, 0.5, 1.5)
    assert prof.region is RegionLabel.STOP
    assert prof.value1 == 0.4375
    assert prof.value2 == 0.375
    assert prof.rule1 is None and prof.rule2 is None
    assert prof.gamma0_star is None and prof.q1 is None


def test_build_profile_beyond_threshold(std_oracle):
    # any x at or above the one-player threshold is in the stop region
    prof = build_profile(std_oracle, 0.15, 0.15, 2.5)
    assert prof.region is RegionLabel.STOP
    assert prof.value1 == pytest.approx(0.925 * 1.5, rel=1e-12)


def test_build_profile_degenerate_priors(std_oracle):
    both = build_profile(std_oracle, 1.0, 1.0, 1.5)
    assert both.region is RegionLabel.STOP
    assert both.value1 == 0.25 and both.value2 == 0.25
    assert both.rule1 is None

    none = build_profile(std_oracle, 0.0, 0.0, 1.5)
    assert none.value1 == pytest.approx(0.5625, rel=1e-12)
    assert none.value2 == none.value1
    assert none.rule1.scale == 0.0 and none.rule1.atom0 == 0.0
    assert none.rule1.terminal_jump


def test_no_equilibrium_for_one_sided_certainty(std_oracle):
    with pytest.raises(NoEquilibriumError):
        build_profile(std_oracle, 0.0, 0.3, 1.5)


def test_relabeling(std_oracle):
    prof = build_profile(std_oracle, 0.3, 0.15, 1.5)
    assert prof.relabeled
    assert prof.p1 == 0.15 and prof.p2 == 0.3
    assert prof.scale == 0.5

    stopped = build_profile(std_oracle, 0.5, 0.25, 1.5)
    assert stopped.relabeled
    assert stopped.value1 == 0.4375  # belongs to the smaller prior


def test_jump_structure(std_oracle):
    prof = build_profile(std_oracle, 0.15, 0.3, 1.5)
    d1, d2 = jump_structure(prof, 0.0)
    assert d1 == pytest.approx(0.5 * GAMMA0_STD, rel=1e-12)
    assert d2 == pytest.approx(GAMMA0_STD, rel=1e-12)
    assert jump_structure(prof, 1.7) == (0.0, 0.0)
    assert jump_structure(prof, 0.0, at_tau_v=True) == (0.5, 0.0)

    stopped = build_profile(std_oracle, 0.25, 0.5, 1.5)
    with pytest.raises(ValueError):
        jump_structure(stopped, 0.0)


def test_belief_evolution(std_oracle):
    prof = build_profile(std_oracle, 0.15, 0.3, 1.5)
    pi1, pi2 = belief_evolution(prof, prof.q1)
    assert pi1 == prof.q1
    assert pi2 == pytest.approx(17.0 / 73.0, rel=1e-12)

    # fully revealed level: player 2's belief floors at (p2 - p1)/(1 - p1)
    _, floor = belief_evolution(prof, 0.0)
    assert floor == pytest.approx(3.0 / 17.0, rel=1e-12)

    sym = build_profile(std_oracle, 0.15, 0.15, 1.5)
    for z in (0.02, 0.05, Q1_STD):
        a, b = belief_evolution(sym, z)
        assert a == z
        assert b == pytest.approx(z, rel=1e-14)

    stopped = build_profile(std_oracle, 0.25, 0.5, 1.5)
    with pytest.raises(ValueError):
        belief_evolution(stopped, 0.1)


def test_value_jump_at_stop_boundary(std_oracle):
    # crossing p1 = c(x): player 1's value is continuous, player 2's drops
    c = float(boundary_c(std_oracle, 1.5))
    below = build_profile(std_oracle, c - 1e-9, 0.5, 1.5)
    at = build_profile(std_oracle, c, 0.5, 1.5)
    assert at.region is RegionLabel.STOP
    assert at.value1 == pytest.approx(below.value1, abs=1e-8)
    assert at.value1 == pytest.approx(0.45, rel=1e-12)
    assert below.value2 == pytest.approx(0.45, abs=1e-8)
    assert at.value2 == 0.375


def test_rule_intensity_ratio(std_oracle):
    # the weaker-belief player's accumulated mass is p1/p2 of the other's at
    # every level of the running maximum
    prof = build_profile(std_oracle, 0.15, 0.3, 1.5)
    m = np.linspace(1.5, 1.999, 50)
    assert_allclose(prof.rule1.gamma_at_max(m),
                    0.5 * prof.rule2.gamma_at_max(m), rtol=1e-13)


def test_gamma_plateau_and_cap(std_oracle):
    rule = build_profile(std_oracle, 0.15, 0.15, 1.5).rule2
    m = np.linspace(1.5, 2.2, 141)
    gam = rule.gamma_at_max(m)
    assert np.all(np.diff(gam) >= -1e-15)
    # flat at the atom until the running maximum reaches b_inverse(q1)
    release = b_inverse(std_oracle, Q1_STD)
    assert release == pytest.approx((73.0 - math.sqrt(365.0)) / 34.0, rel=1e-12)
    assert_allclose(gam[m <= release], rule.atom0, rtol=1e-14)
    assert gam[m > release + 1e-6].min() > rule.atom0
    # capped at scale from the one-player threshold on
    assert_allclose(gam[m >= 2.0], 1.0, rtol=1e-14)
    assert rule.gamma_at_max(1.7) == rule.gamma_at_max(np.array([1.7]))[0]
    assert rule.delta_gamma0() == rule.atom0


def test_rule_validation(std_oracle):
    with pytest.raises(ValueError):
        RandomizedStopRule(atom0=0.5, q=0.1, scale=0.4,
                           terminal_jump=False, oracle=std_oracle)
    with pytest.raises(ValueError, match="needs q > 0"):
        RandomizedStopRule(atom0=0.2, q=0.0, scale=0.6,
                           terminal_jump=False, oracle=std_oracle)
    with pytest.raises(ValueError):
        RandomizedStopRule(atom0=0.2, q=1.0, scale=0.8,
                           terminal_jump=False, oracle=std_oracle)
    with pytest.raises(ValueError):
        RandomizedStopRule(atom0=-0.1, q=0.1, scale=0.5,
                           terminal_jump=False, oracle=std_oracle)


def test_build_profile_prior_validation(std_oracle):
    with pytest.raises(ValueError):
        build_profile(std_oracle, -0.1, 0.5, 1.5)
    with pytest.raises(ValueError):
        build_profile(std_oracle, 0.5, 1.5, 1.5)
