"""Belief boundaries b and c and the region classification of (p, x).

b(x) = 1 - g(x)/V(x) and c(x) = (V-g)/(V - g/2) split the prior p into three
zones: below b waiting is strictly optimal even against a certain opponent's
reflection rule (no-action), between b and c the equilibrium opens with an
atom of stopping probability (action), and at or above c both players stop
immediately with the half-split on ties (stop).  b <= c always; both hit 1
where g = 0 and 0 where V = g.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import eta, one_player_threshold
from .stopping import ValueOracle


class RegionLabel(enum.Enum):
    CONTINUATION_BAR = "ContinuationBar"
    ACTION_PRIME = "ActionPrime"
    STOP = "Stop"


@dataclass(frozen=True)
class BeliefPoint:
    """A prior p in [0, 1] paired with a state x."""

    p: float
    x: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"prior must lie in [0, 1], got {self.p}")


def _v_g(oracle: ValueOracle, x):
    v = np.asarray(oracle.value(x), dtype=float)
    g = np.asarray(oracle.payoff(x), dtype=float)
    if np.any(v <= 0.0):
        raise ValueError("corrupt oracle: V must be strictly positive")
    if np.any(v <= g / 2.0):
        raise ValueError("corrupt oracle: V must exceed g/2")
    return v, g


def boundary_b(oracle: ValueOracle, x):
    """b(x) = 1 - g(x)/V(x), clipped into [0, 1] against roundoff."""
    v, g = _v_g(oracle, x)
    return np.clip(1.0 - g / v, 0.0, 1.0)[()]


def boundary_c(oracle: ValueOracle, x):
    """c(x) = (V - g)/(V - g/2), in [b(x), 1]."""
    v, g = _v_g(oracle, x)
    return np.clip((v - g) / (v - 0.5 * g), 0.0, 1.0)[()]


def classify(oracle: ValueOracle, point: BeliefPoint) -> RegionLabel:
    """Region of (p, x); ties go p <= b -> no-action, p >= c -> stop."""
    b = boundary_b(oracle, point.x)
    if point.p <= b:
        return RegionLabel.CONTINUATION_BAR
    c = boundary_c(oracle, point.x)
    if point.p >= c:
        return RegionLabel.STOP
    return RegionLabel.ACTION_PRIME


def safety_level(oracle: ValueOracle, point: BeliefPoint):
    """max{(1-p) V(x), (1-p/2) g(x)} - a payoff guaranteed against any opponent."""
    v, g = _v_g(oracle, point.x)
    return float(np.maximum((1.0 - point.p) * v, (1.0 - 0.5 * point.p) * g))


def b_inverse(oracle: ValueOracle, y: float) -> float:
    """State x with b(x) = y, on the interval where b is strictly decreasing.

    For the closed-form model that interval is (K, B); the root is bracketed
    there and refined to |b(x) - y| <= 1e-10.  Tabulated oracles must present
    a strictly decreasing run of node values of b around y, otherwise the
    threshold representation does not exist and this raises.
    """
    if not 0.0 < y < 1.0:
        raise ValueError(f"b_inverse needs a level in (0, 1), got {y}")
    if oracle.is_closed_form:
        k = oracle.model.strike
        bb = one_player_threshold(oracle.model)
        lo, hi = k * (1.0 + 1e-13), bb * (1.0 - 1e-14)
        f = lambda x: float(boundary_b(oracle, x)) - y
        if not (f(lo) > 0.0 > f(hi)):
            raise ValueError("not invertible: level outside the range of b on (K, B)")
        root = brentq(f, lo, hi, xtol=1e-13, rtol=8.9e-16)
    else:
        bx = np.asarray(boundary_b(oracle, oracle.x), dtype=float)
        # maximal strictly decreasing run bracketing y
        dec = np.flatnonzero((bx[:-1] > y) & (bx[1:] <= y))
        if len(dec) != 1:
            raise ValueError("not invertible: tabulated b does not cross the level once")
        i = dec[0]
        seg = bx[max(0, i - 1) : i + 2]
        if np.any(np.diff(seg) >= 0):
            raise ValueError("not invertible: tabulated b is not strictly decreasing there")
        f = lambda x: float(np.interp(x, oracle.x, bx)) - y
        root = brentq(f, oracle.x[i], oracle.x[i + 1], xtol=1e-13, rtol=8.9e-16)
    assert abs(float(boundary_b(oracle, root)) - y) <= 1e-10
    return float(root)


def b_inverse_many(oracle: ValueOracle, y) -> np.ndarray:
    """Vectorized b_inverse for the closed-form model (bracketed Newton).

    Solves (1-y)(B-K)(L/B)^eta = L - K on (K, B) elementwise; used by the
    simulation engine where b_inverse is evaluated per path.  Agrees with the
    scalar routine to 1e-12.
    """
    if not oracle.is_closed_form:
        raise ValueError("vectorized inversion needs the closed-form model")
    ya = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any((ya <= 0.0) | (ya >= 1.0)):
        raise ValueError("levels must lie in (0, 1)")
    k = oracle.model.strike
    bb = one_player_threshold(oracle.model)
    e = eta(oracle.model)
    scale = (1.0 - ya) * (bb - k)

    def h(L):
        return scale * (L / bb) ** e - (L - k)

    lo = np.full_like(ya, k)
    hi = np.full_like(ya, bb)
    L = 0.5 * (lo + hi)
    frozen = np.zeros(ya.shape, dtype=bool)
    for _ in range(80):
        hL = h(L)
        pos = hL > 0.0
        lo = np.where(pos, L, lo)
        hi = np.where(pos, hi, L)
        dh = scale * e * L ** (e - 1.0) / bb**e - 1.0
        step = np.where(dh != 0.0, hL / dh, 0.0)
        Ln = L - step
        bad = (Ln <= lo) | (Ln >= hi) | ~np.isfinite(Ln)
        Ln = np.where(bad, 0.5 * (lo + hi), Ln)
        # each element keeps its first converged value: the result must not
        # depend on how many more sweeps the rest of the batch needs
        Ln = np.where(frozen, L, Ln)
        frozen |= np.abs(Ln - L) < 1e-14
        L = Ln
        if frozen.all():
            break
    return L if np.ndim(y) else float(L[0])
