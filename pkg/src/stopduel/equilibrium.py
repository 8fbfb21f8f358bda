"""Equilibrium strategy pairs for the stopping duel with uncertain competition.

With priors p1 <= p2 and a start (p1, x) outside the stop region, the
equilibrium opens with an atom Gamma0* = (2/p1)(1 - (1-p1)V/g)^+ of stopping
probability for the stronger-belief player, after which both players' rules
reflect off the running minimum of b(X) with the common post-jump prior
q1 = p1(1-Gamma0*)/(1-p1*Gamma0*).  Player 1's intensity runs at the fraction
p1/p2 of player 2's and jumps to one once the one-player threshold is hit.
Both values equal (1-p1)V(x) there.  In the stop region both stop at once and
collect (1-p_i/2)g(x); the degenerate priors 0 and 1 short-circuit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .regions import (
    BeliefPoint,
    RegionLabel,
    boundary_b,
    boundary_c,
    classify,
    safety_level,
)
from .stopping import ValueOracle


class NoEquilibriumError(RuntimeError):
    """Raised for p1 = 0 < p2, where no equilibrium exists.

    A player certain of being alone waits for the one-player threshold, but
    an opponent who assigns positive probability to competition then wants to
    preempt just before it, and there is no first time strictly before a
    stopping time: the best-response correspondence has no fixed point.
    """


@dataclass(frozen=True)
class RandomizedStopRule:
    """One player's randomized stopping rule, in canonical reflection form.

    Against an independent uniform draw U the rule stops at
    tau = inf{t : Gamma_t > U} where, m being the running maximum's boundary
    image Z_t = q ^ b(max X) through Gamma^q = (q - Z)/(q(1 - Z)),

        Gamma_t = atom0 + (scale - atom0) * Gamma^q_t     before tau_V*,

    with an optional jump to 1 at the one-player stopping time tau_V*
    (terminal_jump).  atom0 is the time-zero stopping mass, scale the cap the
    continuous part grows toward (the intensity ratio p1/p2 for the weaker
    player, 1 for the stronger).  This class (atom at zero + reflection +
    optional terminal atom) is the only strategy shape the package admits;
    interior jumps do not occur.
    """

    atom0: float
    q: float
    scale: float
    terminal_jump: bool
    oracle: ValueOracle

    def __post_init__(self):
        if not 0.0 <= self.atom0 <= self.scale <= 1.0:
            raise ValueError(
                f"need 0 <= atom0 <= scale <= 1, got atom0={self.atom0}, scale={self.scale}"
            )
        if not 0.0 <= self.q < 1.0:
            raise ValueError(f"post-jump prior q must lie in [0, 1), got {self.q}")
        if self.scale > self.atom0 and self.q == 0.0:
            raise ValueError("a continuous part (scale > atom0) needs q > 0")

    def gamma_at_max(self, m):
        """Gamma value once the running maximum of X has reached m (before tau_V*)."""
        ma = np.asarray(m, dtype=float)
        if self.scale == self.atom0:
            out = np.full(ma.shape, self.atom0)
            return out[()]
        z = np.minimum(self.q, np.asarray(boundary_b(self.oracle, ma), dtype=float))
        gq = (self.q - z) / (self.q * (1.0 - z))
        return (self.atom0 + (self.scale - self.atom0) * gq)[()]

    def delta_gamma0(self) -> float:
        """Stopping mass placed at time zero."""
        return self.atom0


@dataclass(frozen=True)
class EquilibriumProfile:
    """Region label, jump parameters, equilibrium values, and the rule pair.

    rule1/rule2 are None where both players stop immediately (stop region and
    p1 = p2 = 1).  When the caller passed p1 > p2 the players were relabeled
    internally (relabeled flag) and value1/rule1 belong to the player with the
    smaller prior.
    """

    region: RegionLabel
    gamma0_star: Optional[float]
    q1: Optional[float]
    value1: float
    value2: float
    rule1: Optional[RandomizedStopRule]
    rule2: Optional[RandomizedStopRule]
    p1: float
    p2: float
    x: float
    oracle: ValueOracle
    relabeled: bool = False

    @property
    def scale(self) -> float:
        """Intensity ratio of player 1's rule to player 2's."""
        return self.p1 / self.p2 if self.p2 > 0.0 else 1.0

    def to_dict(self) -> dict:
        return {
            "region": self.region.value,
            "gamma0_star": self.gamma0_star,
            "q1": self.q1,
            "values": [self.value1, self.value2],
            "scale": self.scale,
            "relabeled": self.relabeled,
        }


def initial_jump(oracle: ValueOracle, p1: float, x: float) -> tuple:
    """(Gamma0*, q1) of the prior-p1 player at start x, outside the stop region.

    Gamma0* = (2/p1)(1 - (1-p1)V/g)^+ and q1 = p1(1-Gamma0*)/(1-p1*Gamma0*).
    In the no-action region the jump vanishes and q1 = p1; in the action
    region 0 < Gamma0* < 1 and q1 lands strictly below b(x).
    """
    point = BeliefPoint(p=p1, x=x)
    region = classify(oracle, point)
    if region is RegionLabel.STOP:
        raise ValueError("wrong region: the initial jump is defined outside the stop region")
    v = float(oracle.value(x))
    g = float(oracle.payoff(x))
    gamma0 = 0.0 if g == 0.0 else max(0.0, (2.0 / p1) * (1.0 - (1.0 - p1) * v / g))
    q1 = p1 * (1.0 - gamma0) / (1.0 - p1 * gamma0)
    assert 0.0 <= gamma0 < 1.0
    b = float(boundary_b(oracle, x))
    assert 0.0 < q1 <= b + 1e-12
    if region is RegionLabel.ACTION_PRIME:
        assert q1 < b
    return gamma0, q1


def build_profile(oracle: ValueOracle, p1: float, p2: float, x: float) -> EquilibriumProfile:
    """Equilibrium profile for priors (p1, p2) at start x.

    Inputs with p1 > p2 are relabeled internally and the swap recorded.
    Raises NoEquilibriumError for p1 = 0 < p2.
    """
    if not 0.0 <= p1 <= 1.0 or not 0.0 <= p2 <= 1.0:
        raise ValueError("priors must lie in [0, 1]")
    relabeled = p1 > p2
    if relabeled:
        p1, p2 = p2, p1

    g = float(oracle.payoff(x))
    v = float(oracle.value(x))

    if p1 == 0.0 and p2 == 0.0:
        # no competition on either side: both wait for the one-player threshold
        rule = RandomizedStopRule(atom0=0.0, q=0.0, scale=0.0, terminal_jump=True, oracle=oracle)
        return EquilibriumProfile(
            region=RegionLabel.CONTINUATION_BAR,
            gamma0_star=None,
            q1=None,
            value1=v,
            value2=v,
            rule1=rule,
            rule2=rule,
            p1=p1,
            p2=p2,
            x=x,
            oracle=oracle,
            relabeled=relabeled,
        )
    if p1 == 0.0:
        raise NoEquilibriumError(
            "no equilibrium for p1 = 0 < p2: the certain-to-be-alone player waits "
            "for the one-player threshold, and the other player's best response "
            "(stop just before that) has no earliest time"
        )
    if p1 == 1.0:
        # then p2 = 1: both certain of competition, immediate stop, half-split
        return EquilibriumProfile(
            region=RegionLabel.STOP,
            gamma0_star=None,
            q1=None,
            value1=0.5 * g,
            value2=0.5 * g,
            rule1=None,
            rule2=None,
            p1=p1,
            p2=p2,
            x=x,
            oracle=oracle,
            relabeled=relabeled,
        )

    region = classify(oracle, BeliefPoint(p=p1, x=x))
    if region is RegionLabel.STOP:
        return EquilibriumProfile(
            region=region,
            gamma0_star=None,
            q1=None,
            value1=(1.0 - 0.5 * p1) * g,
            value2=(1.0 - 0.5 * p2) * g,
            rule1=None,
            rule2=None,
            p1=p1,
            p2=p2,
            x=x,
            oracle=oracle,
            relabeled=relabeled,
        )

    gamma0, q1 = initial_jump(oracle, p1, x)
    ratio = p1 / p2
    rule2 = RandomizedStopRule(atom0=gamma0, q=q1, scale=1.0, terminal_jump=False, oracle=oracle)
    rule1 = RandomizedStopRule(
        atom0=ratio * gamma0, q=q1, scale=ratio, terminal_jump=True, oracle=oracle
    )
    value = (1.0 - p1) * v
    return EquilibriumProfile(
        region=region,
        gamma0_star=gamma0,
        q1=q1,
        value1=value,
        value2=value,
        rule1=rule1,
        rule2=rule2,
        p1=p1,
        p2=p2,
        x=x,
        oracle=oracle,
        relabeled=relabeled,
    )


def jump_structure(profile: EquilibriumProfile, t: float, at_tau_v: bool = False) -> tuple:
    """(dGamma1, dGamma2) at time t, or at the one-player stopping time.

    Player 2's intensity jumps only at t = 0 (by Gamma0*); player 1's jumps
    at t = 0 (by (p1/p2)Gamma0*) and again at tau_V* (by 1 - p1/p2).
    """
    if profile.rule1 is None or profile.gamma0_star is None:
        raise ValueError("jump structure is defined for profiles outside the stop region")
    if at_tau_v:
        return 1.0 - profile.scale, 0.0
    if t == 0.0:
        return profile.scale * profile.gamma0_star, profile.gamma0_star
    return 0.0, 0.0


def belief_evolution(profile: EquilibriumProfile, z: float) -> tuple:
    """(Pi1, Pi2) when the reflected level of the post-jump prior sits at z.

    Pi1 tracks z exactly; Pi2 = ((1-p2) z + p2 - p1)/(1 - p1).  The spread
    Pi2 - Pi1 = (p2-p1)(1-z)/(1-p1) is nonnegative and grows as z falls.
    """
    if profile.gamma0_star is None:
        raise ValueError("belief evolution is defined for profiles outside the stop region")
    p1, p2 = profile.p1, profile.p2
    pi1 = float(z)
    pi2 = ((1.0 - p2) * pi1 + p2 - p1) / (1.0 - p1)
    return pi1, pi2
