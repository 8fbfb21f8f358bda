"""Adjusted beliefs, the reflected running level Z, and u-level trigger sets.

A player holding prior p who watches an opponent play with cumulated stopping
intensity Gamma updates the probability that the opponent exists at all to
Pi = p(1-Gamma)/(1-p*Gamma).  The inverse map and the composition with the
running minimum Z_t = p ^ inf_{s<=t} b(X_s) are the workhorses here: the
reflection construction increases Gamma exactly when b(X) reaches a new
minimum, which keeps Pi glued to Z.  Key algebra, asserted in tests to 1e-12:

    (1 - p) = (1 - p*Gamma_t)(1 - Pi_t)        at every time t
    Pi generated by the reflection rule  ==  Z  pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .regions import b_inverse, boundary_b
from .stopping import ValueOracle


def pi_from_gamma(p: float, gamma):
    """Pi = p(1-Gamma)/(1-p*Gamma): belief after intensity Gamma accumulated.

    Decreasing in Gamma, from p (no information) down to 0 (certain absence).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"prior must lie in (0, 1), got {p}")
    ga = np.asarray(gamma, dtype=float)
    if np.any((ga < -1e-15) | (ga > 1.0 + 1e-15)):
        raise ValueError("gamma must lie in [0, 1]")
    ga = np.clip(ga, 0.0, 1.0)
    return (p * (1.0 - ga) / (1.0 - p * ga))[()]


def gamma_from_pi(p: float, pi):
    """Inverse of pi_from_gamma: Gamma = (p - Pi)/(p(1 - Pi))."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"prior must lie in (0, 1), got {p}")
    pia = np.asarray(pi, dtype=float)
    if np.any(pia > p + 1e-15):
        raise ValueError("belief above prior: Pi must stay <= p")
    if np.any(pia < -1e-15):
        raise ValueError("belief must be nonnegative")
    pia = np.clip(pia, 0.0, p)
    return ((p - pia) / (p * (1.0 - pia)))[()]


def z_path(p: float, b_values) -> np.ndarray:
    """Running minimum of b(X) capped at p: Z_t = p ^ min_{s<=t} b(X_s)."""
    b = np.asarray(b_values, dtype=float)
    if np.any((b < 0.0) | (b > 1.0)):
        raise ValueError("b values must lie in [0, 1]")
    return np.minimum(p, np.minimum.accumulate(b))


def gamma_path(p: float, z_sequence) -> np.ndarray:
    """Gamma_t = (p - Z_t)/(p(1 - Z_t)) for a nonincreasing Z with Z_0 <= p."""
    z = np.asarray(z_sequence, dtype=float)
    if np.any(np.diff(z) > 1e-15):
        raise ValueError("Z must be nonincreasing")
    if len(z) and z[0] > p + 1e-15:
        raise ValueError("Z must start at or below the prior")
    return (p - z) / (p * (1.0 - z))


@dataclass(frozen=True)
class TriggerSet:
    """The state set {x : b(x) < z} entered exactly when Gamma exceeds level u.

    z = p(1-u)/(1-p*u) inverts Gamma^{p}(running max) > u.  For oracles with
    monotone b the set is an upper threshold {x > b^{-1}(z)}.
    """

    p: float
    u: float
    z_level: float

    def contains(self, oracle: ValueOracle, x) -> bool:
        return bool(np.asarray(boundary_b(oracle, x)) < self.z_level)

    def threshold(self, oracle: ValueOracle) -> float:
        """Entry threshold b^{-1}(z); the trigger time is its first hitting time."""
        return b_inverse(oracle, self.z_level)


def level_time_set(p: float, u: float) -> TriggerSet:
    """Trigger set of the u-level time of the reflection rule with prior p."""
    if not 0.0 <= u < 1.0:
        raise ValueError(f"level must lie in [0, 1), got {u}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"prior must lie in (0, 1), got {p}")
    z = p * (1.0 - u) / (1.0 - p * u)
    return TriggerSet(p=p, u=u, z_level=z)


@dataclass(frozen=True)
class BeliefPath:
    """A discrete path bundle (t, X, b(X), Z, Gamma, Pi) for one prior.

    Z is the capped running minimum of the sampled b(X); the continuous-time
    infimum between samples is not interpolated (the bias this induces is
    neutralized for the closed-form model by the semi-analytic engine, which
    needs no paths).
    """

    t: np.ndarray
    x: np.ndarray
    b: np.ndarray
    z: np.ndarray
    gamma: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        n = len(self.t)
        for name in ("x", "b", "z", "gamma", "pi"):
            if len(getattr(self, name)) != n:
                raise ValueError("path columns must share one length")
        if np.any(np.diff(self.z) > 1e-15):
            raise ValueError("Z must be nonincreasing")
        if np.any(np.diff(self.gamma) < -1e-15):
            raise ValueError("Gamma must be nondecreasing")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            f.write("t,x,b,z,gamma,pi\n")
            for row in zip(self.t, self.x, self.b, self.z, self.gamma, self.pi):
                f.write(",".join(f"{v:.17g}" for v in row) + "\n")


def build_belief_path(oracle: ValueOracle, p: float, t, x_path) -> BeliefPath:
    """BeliefPath of prior p along sampled states x_path."""
    x = np.asarray(x_path, dtype=float)
    b = np.asarray(boundary_b(oracle, x), dtype=float)
    z = z_path(p, b)
    gamma = gamma_path(p, z)
    pi = pi_from_gamma(p, gamma)
    return BeliefPath(t=np.asarray(t, dtype=float), x=x, b=b, z=z, gamma=gamma, pi=pi)
