"""Equilibrium verification harness.

Turns the equilibrium claims into pass/fail reports: threshold-deviation
sweeps against each player's value, indifference of the randomized support,
pathwise belief identities, and dominance over the guaranteed safety level.
Deterministic checks carry a 1e-9 relative (or 1e-12 absolute algebraic)
tolerance; sampling-based checks use 3 standard errors.  Reports serialize
to JSON without the runtime field so repeated runs are byte-identical.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _philox, engine
from .belief import gamma_from_pi, pi_from_gamma, z_path
from .engine import SimConfig, payoff_vs_rule
from .equilibrium import belief_evolution, build_profile
from .regions import (BeliefPoint, RegionLabel, b_inverse, boundary_b,
                      safety_level)

#: 101 points of [0, 1); the support endpoint u = 1 carries no mass
DEFAULT_U_GRID = np.arange(101) / 101.0

_REL_TOL = 1e-9
_ALG_TOL = 1e-12


@dataclass(frozen=True)
class EvalReport:
    name: str
    target: float
    target_basis: str
    estimate: float
    stderr: Optional[float]
    tolerance: float
    verdict: str
    runtime: float

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        # runtime intentionally left out: reports must be byte-reproducible
        return {
            "name": self.name,
            "target": self.target,
            "target_basis": self.target_basis,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
        }


def _report(name, target, basis, estimate, stderr, tolerance, ok, t0):
    return EvalReport(
        name=name,
        target=float(target),
        target_basis=basis,
        estimate=float(estimate),
        stderr=None if stderr is None else float(stderr),
        tolerance=float(tolerance),
        verdict="pass" if ok else "fail",
        runtime=time.perf_counter() - t0,
    )


def best_response_sweep(oracle, profile, player, level_grid=None):
    """Threshold deviations against the opponent's equilibrium rule.

    Passes iff no deviation beats the player's equilibrium value beyond the
    relative tolerance and the sweep maximum is attained (within tolerance)
    on the rule's support: the threshold plateau above b_inverse(q1), the
    one-player threshold, or the time-zero stop.
    """
    if player not in (1, 2):
        raise ValueError("player must be 1 or 2")
    p_self = profile.p1 if player == 1 else profile.p2
    target = profile.value1 if player == 1 else profile.value2
    opp = profile.rule2 if player == 1 else profile.rule1
    x = profile.x
    B = float(oracle.stop_threshold)
    t0 = time.perf_counter()
    if level_grid is None:
        level_grid = np.linspace(x, B, 201)
    else:
        level_grid = np.asarray(level_grid, dtype=float)
    vals = np.array([payoff_vs_rule(oracle, opp, p_self, L, x)
                     for L in level_grid])
    vmax = float(vals.max())
    tol = _REL_TOL * abs(target)
    if profile.region is RegionLabel.STOP:
        support = level_grid <= x
    else:
        lo = B if not profile.q1 else b_inverse(oracle, profile.q1)
        support = (level_grid <= x) | (level_grid >= lo * (1.0 - 1e-12))
    attained = bool(support.any()) and vals[support].max() >= vmax - tol
    ok = vmax <= target + tol and attained
    return _report(
        "best_response_sweep_player%d" % player, target,
        "equilibrium value from the closed-form profile",
        vmax, None, tol, ok, t0)


def indifference_check(oracle, profile, u_grid=None):
    """Flatness of the payoff across the randomized rule's support.

    Every u in the grid resolves each player's rule to a stop trigger; all
    resulting payoffs must equal the common equilibrium value to 1e-9
    relative.  Only meaningful off the stop region.
    """
    if profile.region is RegionLabel.STOP:
        raise ValueError("indifference applies off the stop region")
    if u_grid is None:
        u_grid = DEFAULT_U_GRID
    u_grid = np.asarray(u_grid, dtype=float)
    t0 = time.perf_counter()
    target = profile.value1
    worst = target
    for player in (1, 2):
        own = profile.rule1 if player == 1 else profile.rule2
        opp = profile.rule2 if player == 1 else profile.rule1
        p_self = profile.p1 if player == 1 else profile.p2
        levels = engine._resolve_levels(oracle, own, u_grid)
        for L in levels:
            if np.isinf(L):
                v = 0.0
            else:
                v = payoff_vs_rule(oracle, opp, p_self, max(L, profile.x)
                                   if L > 0.0 else profile.x, profile.x)
            if abs(v - target) > abs(worst - target):
                worst = v
    tol = _REL_TOL * abs(target)
    ok = abs(worst - target) <= tol
    return _report(
        "indifference_check", target,
        "common equilibrium value (1-p1)V(x)",
        worst, None, tol, ok, t0)


def _state_paths(profile, n_paths, n_steps=250, dt=0.02, seed=0):
    """Exact-increment GBM paths for identity checking, (n, n_steps+1)."""
    model = profile.oracle.model
    if model is None:
        raise ValueError("identity paths need GBM dynamics on the oracle")
    ids = np.arange(n_paths, dtype=np.uint64)
    z = _philox.normals_box_muller(seed, _philox.DOMAIN_CHECK, ids, n_steps)
    incr = (model.mu - 0.5 * model.sigma ** 2) * dt \
        + model.sigma * np.sqrt(dt) * z
    logx = np.concatenate(
        [np.zeros((n_paths, 1)), np.cumsum(incr, axis=1)], axis=1)
    return profile.x * np.exp(logx)


def identity_suite(profile, paths=None, n_paths=1000, seed=0):
    """Belief and equilibrium identities along simulated paths.

    Violations are scaled by each check's own tolerance (1e-12 for algebra,
    3 standard errors for the sampled existence-scaling relation), so the
    report passes iff the scaled maximum is at most 1.
    """
    t0 = time.perf_counter()
    oracle = profile.oracle
    p1, p2 = profile.p1, profile.p2
    if paths is None:
        paths = _state_paths(profile, n_paths, seed=seed)
    paths = np.asarray(paths, dtype=float)
    worst = 0.0

    def track(violation, tol):
        nonlocal worst
        worst = max(worst, float(violation) / tol)

    # time-zero jump algebra: post-jump belief condition
    if profile.gamma0_star is not None and profile.q1 is not None:
        lhs = (1.0 - p1 * profile.gamma0_star) * (1.0 - profile.q1)
        track(abs(lhs - (1.0 - p1)), _ALG_TOL)

    # prior/belief/intensity round trips on a value grid
    for p in {p1, p2}:
        if not 0.0 < p < 1.0:
            continue
        gam = np.linspace(0.0, 1.0 - 1e-6, 23)
        pi = np.array([pi_from_gamma(p, g) for g in gam])
        back = np.array([gamma_from_pi(p, v) for v in pi])
        track(np.abs(back - gam).max(), _ALG_TOL)
        track(np.abs((1.0 - p * gam) * (1.0 - pi) - (1.0 - p)).max(), _ALG_TOL)

    # pathwise: reflected belief equals the capped running minimum of b
    b_vals = np.asarray(boundary_b(oracle, paths), dtype=float)
    for p in {p1, p2}:
        if not 0.0 < p < 1.0:
            continue
        z = np.minimum(p, np.minimum.accumulate(b_vals, axis=1))
        gam = (p - z) / (p * (1.0 - z))
        pi = p * (1.0 - gam) / (1.0 - p * gam)
        track(np.abs(pi - z).max(), _ALG_TOL)
        track(np.abs((1.0 - p * gam) * (1.0 - pi) - (1.0 - p)).max(), _ALG_TOL)
        spot = z_path(p, b_vals[0])
        track(np.abs(spot - z[0]).max(), _ALG_TOL)

    # equilibrium coupling: both adjusted beliefs from the profile's rules
    if profile.rule1 is not None and 0.0 < p1 <= p2 < 1.0 and p1 > 0.0:
        m = np.maximum.accumulate(paths, axis=1)
        g2 = np.asarray(profile.rule2.gamma_at_max(m), dtype=float)
        g1 = np.asarray(profile.rule1.gamma_at_max(m), dtype=float)
        pi1 = p1 * (1.0 - g2) / (1.0 - p1 * g2)
        pi2 = p2 * (1.0 - g1) / (1.0 - p2 * g1)
        zq = np.minimum(profile.q1, np.minimum.accumulate(b_vals, axis=1))
        track(np.abs(pi1 - zq).max(), _ALG_TOL)
        pred = ((1.0 - p2) * pi1 + p2 - p1) / (1.0 - p1)
        track(np.abs(pi2 - pred).max(), _ALG_TOL)
        gaps = np.diff(pi2 - pi1, axis=1)
        track(max(0.0, float(-gaps.min())), _ALG_TOL)
        for j in (0, paths.shape[1] // 2, paths.shape[1] - 1):
            got = belief_evolution(profile, float(pi1[0, j]))[1]
            track(abs(got - pred[0, j]), _ALG_TOL)

    # existence draws are independent of realized payoffs: gating by the
    # other player's draw rescales the mean by that player's prior
    cfg = SimConfig(n_paths=max(n_paths, 1000), seed=seed)
    batch = engine.sample_outcomes(profile, cfg)
    for r, th, p_opp in ((batch.r1, batch.theta2, p2),
                        (batch.r2, batch.theta1, p1)):
        d = r * th - p_opp * r
        spread = float(np.std(d, ddof=1)) if len(d) > 1 else 0.0
        if spread == 0.0:
            track(abs(float(np.mean(d))), _ALG_TOL)
        else:
            stderr = spread / np.sqrt(len(d))
            track(abs(float(np.mean(d))), 3.0 * stderr)

    return _report(
        "identity_suite", 0.0,
        "max identity violation, scaled by per-check tolerance",
        worst, None, 1.0, worst <= 1.0, t0)


def safety_dominance(oracle, grid):
    """Equilibrium values against the guaranteed safety level on a grid.

    grid holds (p1, p2, x) triples; passes iff both players' values weakly
    dominate max((1-p)V, (1-p/2)g) at every point.
    """
    t0 = time.perf_counter()
    min_margin = np.inf
    n_points = 0
    for p1, p2, x in grid:
        profile = build_profile(oracle, p1, p2, x)
        for value, p in ((profile.value1, profile.p1),
                         (profile.value2, profile.p2)):
            margin = value - safety_level(oracle, BeliefPoint(p, x))
            min_margin = min(min_margin, margin)
        n_points += 1
    if n_points == 0:
        raise ValueError("empty grid")
    ok = min_margin >= -_ALG_TOL
    return _report(
        "safety_dominance", 0.0,
        "minimum of value minus safety floor over %d points" % n_points,
        min_margin, None, _ALG_TOL, ok, t0)


def _default_safety_grid(p1, p2, x):
    pts = [(p1, p2, x)]
    for a in (0.05, 0.15, 0.35, 0.65, 0.9, 1.0):
        for b in (0.05, 0.15, 0.35, 0.65, 0.9, 1.0):
            if a <= b:
                for xx in (1.1, 1.5, 1.9):
                    pts.append((a, b, xx))
    return pts


def run_suite(oracle, p1, p2, x, suite="all", seed=42, n_paths=1000):
    """The standard verification battery for one (p1, p2, x) start.

    suite selects a subset: br, indiff, ids, safety, or all.  Raises
    NoEquilibriumError for p1=0<p2 like the profile construction does.
    """
    known = ("all", "br", "indiff", "ids", "safety")
    if suite not in known:
        raise ValueError("suite must be one of %s" % (known,))
    profile = build_profile(oracle, p1, p2, x)
    reports = []
    if suite in ("all", "br"):
        reports.append(best_response_sweep(oracle, profile, 1))
        reports.append(best_response_sweep(oracle, profile, 2))
    if suite in ("all", "indiff"):
        if profile.region is RegionLabel.STOP:
            if suite == "indiff":
                raise ValueError("indifference applies off the stop region")
        else:
            reports.append(indifference_check(oracle, profile))
    if suite in ("all", "ids"):
        reports.append(identity_suite(profile, n_paths=n_paths, seed=seed))
    if suite in ("all", "safety"):
        reports.append(safety_dominance(oracle, _default_safety_grid(p1, p2, x)))
    return reports


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2) + "\n"


def render_table(reports) -> str:
    lines = ["%-28s %12s %12s %10s %8s %9s" % (
        "check", "target", "estimate", "tol", "verdict", "time")]
    for r in reports:
        lines.append("%-28s %12.6g %12.6g %10.3g %8s %8.2fs" % (
            r.name, r.target, r.estimate, r.tolerance, r.verdict, r.runtime))
    return "\n".join(lines)
