"""Closed forms for the perpetual investment option on geometric Brownian motion.

State follows dX = mu*X dt + sigma*X dW, payoff g(x) = (x - K)^+, discounting
at rate r.  Everything downstream (boundaries, equilibrium rules, simulation)
is driven by the value function V and the hitting-time Laplace transform
(x/L)^eta, both available here in closed form.

The transversality condition lim sup e^{-rt} V(X_t) = 0 is assumed for this
parameter class (mu < r), not checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GbmRealOptionModel:
    """Parameters (mu, sigma, r, K) of the investment option example.

    Validation is eager: every closed form below degenerates if mu >= r,
    so invalid parameter sets are rejected at construction.
    """

    mu: float
    sigma: float
    r: float
    strike: float

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "strike", float(self.strike))
        if not self.sigma > 0.0:
            raise ValueError(f"invalid model: sigma must be > 0, got {self.sigma}")
        if not self.strike > 0.0:
            raise ValueError(f"invalid model: strike must be > 0, got {self.strike}")
        if not self.r >= 0.0:
            raise ValueError(f"invalid model: r must be >= 0, got {self.r}")
        if not self.mu < self.r:
            raise ValueError(
                f"invalid model: need mu < r for a finite value, got mu={self.mu}, r={self.r}"
            )


def eta(model: GbmRealOptionModel) -> float:
    """Positive root eta > 1 of (sigma^2/2) y (y-1) + mu y - r = 0.

    eta = m + sqrt(m^2 + 2r/sigma^2) with m = (sigma^2 - 2 mu) / (2 sigma^2).
    """
    s2 = model.sigma * model.sigma
    m = (s2 - 2.0 * model.mu) / (2.0 * s2)
    e = m + math.sqrt(m * m + 2.0 * model.r / s2)
    # mu < r guarantees the root lies strictly above 1
    assert e > 1.0
    return e


def one_player_threshold(model: GbmRealOptionModel) -> float:
    """Optimal exercise threshold B = eta*K/(eta - 1) of the one-player problem."""
    e = eta(model)
    return e * model.strike / (e - 1.0)


def payoff_g(model: GbmRealOptionModel, x):
    """Exercise payoff g(x) = (x - K)^+.  Accepts scalars or numpy arrays."""
    return np.maximum(np.asarray(x, dtype=float) - model.strike, 0.0)[()]


def value_gbm(model: GbmRealOptionModel, x):
    """One-player value V(x) = (B-K)(x/B)^eta for x < B and x - K beyond.

    Continuous at B (value matching) and >= g everywhere; V > g/2 everywhere,
    which the belief boundaries downstream rely on.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0.0):
        raise ValueError("nonpositive state: V is defined for x > 0")
    e = eta(model)
    B = one_player_threshold(model)
    cont = (B - model.strike) * (xa / B) ** e
    return np.where(xa < B, cont, xa - model.strike)[()]


def hitting_discount(model: GbmRealOptionModel, x, L):
    """E[e^{-r tau_L}] for the first hitting time of level L >= x, i.e. (x/L)^eta.

    The Laplace transform already carries the mass of paths that never reach L
    (convention e^{-r*inf} = 0), so no explicit infinity handling is needed.
    Multiplicative over stacked levels: (x/L1)^eta * (L1/L2)^eta = (x/L2)^eta.
    """
    xa = np.asarray(x, dtype=float)
    La = np.asarray(L, dtype=float)
    if np.any(xa <= 0.0):
        raise ValueError("nonpositive state")
    if np.any(La < xa):
        raise ValueError("level below state: hitting_discount needs L >= x")
    return ((xa / La) ** eta(model))[()]
