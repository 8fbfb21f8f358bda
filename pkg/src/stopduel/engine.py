"""Expected-payoff evaluation and outcome simulation for stopping duels.

Two evaluation modes share one sampling layer:

* ``semi-analytic`` resolves each player's randomized rule to a stopping
  level and prices the result with the closed-form GBM hitting discount.
  ``estimate_value`` additionally integrates out the existence draws, so the
  only sampling noise left comes from the uniforms (zero for profiles that
  stop immediately).
* ``path`` simulates the state process with exact log-normal increments
  and detects level crossings on a monitoring grid (compiled kernel when the
  extension built, numpy fallback otherwise).  Realized payoffs are gated by
  the literal existence draws.

Determinism contract: every draw is addressed by (master seed, path id,
draw index) through counter-based streams, so results are bit-identical for
a given SimConfig no matter how paths are batched.  Aggregation uses numpy's
pairwise summation, which is likewise layout-independent here.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _philox, _pathsim_np
from .model import eta as _eta
from .regions import b_inverse, b_inverse_many

try:
    from . import _pathsim
    KERNEL_BACKEND = "compiled"
except ImportError:  # pragma: no cover - build-dependent
    _pathsim = None
    KERNEL_BACKEND = "fallback"

#: Broadie-Glasserman-Kou continuity-correction constant: monitoring the
#: barrier shifted down by BETA*sigma*sqrt(dt) in log space cancels the
#: leading-order discrete-detection bias.
BETA_SHIFT = 0.5826

#: a path is dropped once its best possible discounted payoff is below this
ABSORB_TOL = 1e-6

_SEMI = "semi-analytic"
_PATH = "path"

_STOPPER_LABELS = ("player1", "player2", "both", "neither")
_P1, _P2, _BOTH, _NEITHER = range(4)


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings; (n_paths, seed) fix every draw in the run."""

    n_paths: int = 10_000
    seed: int = 0
    dt: float = 5e-4
    t_max: float = 250.0
    mode: str = _SEMI
    truncation_budget: float = 1e-4
    backend: str = "auto"

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if not self.t_max > 0.0:
            raise ValueError("t_max must be positive")
        if self.mode not in (_SEMI, _PATH):
            raise ValueError("mode must be %r or %r" % (_SEMI, _PATH))
        if self.backend not in ("auto", "compiled", "fallback"):
            raise ValueError("unknown backend %r" % (self.backend,))


@dataclass(frozen=True)
class OutcomeRecord:
    """One simulated game outcome.

    trigger1/trigger2 are the resolved stop triggers: 0.0 for a stop at
    time zero, a level in (x, B] for a threshold stop, +inf for never.
    t_or_level is the first stopper's trigger (0.0 for a time-zero stop),
    NaN when neither player ever stops.  r1/r2 are realized discounted
    payoffs in the respective player's world: the opponent acts only when
    that player's existence draw (theta) is 1.
    """

    path_id: int
    u1: float
    u2: float
    theta1: int
    theta2: int
    trigger1: float
    trigger2: float
    stopper: str
    t_or_level: float
    r1: float
    r2: float


@dataclass(frozen=True)
class EstimateResult:
    player: int
    mean: float
    stderr: float
    n: int
    seed: int
    mode: str

    def to_dict(self):
        return {
            "player": self.player,
            "mean": self.mean,
            "stderr": self.stderr,
            "n": self.n,
            "seed": self.seed,
            "mode": self.mode,
        }


class OutcomeBatch:
    """Struct-of-arrays view of n sampled outcomes (see OutcomeRecord)."""

    def __init__(self, path_id, u1, u2, theta1, theta2, trigger1, trigger2,
                 stopper_code, t_or_level, r1, r2, n_unresolved):
        self.path_id = path_id
        self.u1 = u1
        self.u2 = u2
        self.theta1 = theta1
        self.theta2 = theta2
        self.trigger1 = trigger1
        self.trigger2 = trigger2
        self.stopper_code = stopper_code
        self.t_or_level = t_or_level
        self.r1 = r1
        self.r2 = r2
        #: paths whose needed level was never reached within the horizon;
        #: they contribute 0 payoff
        self.n_unresolved = n_unresolved

    def __len__(self):
        return len(self.path_id)

    def record(self, i):
        return OutcomeRecord(
            path_id=int(self.path_id[i]),
            u1=float(self.u1[i]),
            u2=float(self.u2[i]),
            theta1=int(self.theta1[i]),
            theta2=int(self.theta2[i]),
            trigger1=float(self.trigger1[i]),
            trigger2=float(self.trigger2[i]),
            stopper=_STOPPER_LABELS[self.stopper_code[i]],
            t_or_level=float(self.t_or_level[i]),
            r1=float(self.r1[i]),
            r2=float(self.r2[i]),
        )

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("path_id,u1,u2,theta1,theta2,stopper,t_or_level,r1,r2\n")
            for i in range(len(self)):
                fh.write("%d,%.17g,%.17g,%d,%d,%s,%.17g,%.17g,%.17g\n" % (
                    self.path_id[i], self.u1[i], self.u2[i],
                    self.theta1[i], self.theta2[i],
                    _STOPPER_LABELS[self.stopper_code[i]],
                    self.t_or_level[i], self.r1[i], self.r2[i]))


def payoff_vs_rule(oracle, rule, p_self, L, x):
    """Expected payoff of stopping at the threshold L against a randomized
    opponent who exists with probability p_self.

    L <= x means stopping at time zero.  L = B (the one-player threshold)
    means stopping exactly at the one-player optimal time, which ties with
    the opponent's terminal jump mass if the rule has one.  rule=None is an
    opponent who stops at time zero surely.
    """
    if oracle.kind != "closed-form-gbm":
        raise ValueError("payoff_vs_rule needs the closed-form GBM oracle")
    if not 0.0 <= p_self <= 1.0:
        raise ValueError("prior must lie in [0, 1]")
    B = oracle.stop_threshold
    L = float(L)
    x = float(x)
    if L > B:
        warnings.warn("deviation level %g above the one-player threshold %g; "
                      "clipped" % (L, B), RuntimeWarning, stacklevel=2)
        L = B
    if L <= x:
        atom0 = 1.0 if rule is None else rule.atom0
        return float(oracle.payoff(x)) * (1.0 - p_self * atom0 + 0.5 * p_self * atom0)
    disc = (x / L) ** _eta(oracle.model)
    gL = float(oracle.payoff(L))
    if L == B:
        if rule is None:
            post, tie = 1.0, 0.0
        elif rule.terminal_jump:
            post, tie = 1.0, 1.0 - rule.scale
        else:
            post, tie = rule.gamma_at_max(B), 0.0
        return disc * gL * (1.0 - p_self * post + 0.5 * p_self * tie)
    gamma = 1.0 if rule is None else rule.gamma_at_max(L)
    return disc * gL * (1.0 - p_self * gamma)


def _resolve_levels(oracle, rule, u):
    """Map uniform draws through a rule to stop triggers (0 / level / inf)."""
    u = np.asarray(u, dtype=float)
    lev = np.zeros(u.shape)
    if rule is None:
        return lev
    B = float(oracle.stop_threshold)
    atom0, scale = rule.atom0, rule.scale
    imm = u < atom0
    term = u >= scale
    cont = ~imm & ~term
    # u >= scale: terminal jump stops at the one-player time; a rule whose
    # continuous part reaches full mass (scale == 1) stops there in the
    # limit, so the u = 1 endpoint resolves the same way
    lev[term] = B if (rule.terminal_jump or scale == 1.0) else np.inf
    if cont.any():
        w = (u[cont] - atom0) / (scale - atom0)
        q = rule.q
        z = q * (1.0 - w) / (1.0 - q * w)
        if oracle.kind == "closed-form-gbm":
            lev[cont] = b_inverse_many(oracle, z)
        else:
            lev[cont] = [b_inverse(oracle, zi) for zi in z]
    return lev


def _own_stop_values(oracle, x, L):
    """Exact discounted own-stop payoff for each resolved trigger."""
    ety = _eta(oracle.model)
    L = np.asarray(L, dtype=float)
    out = np.zeros(L.shape)
    imm = L == 0.0
    fin = np.isfinite(L) & ~imm
    if imm.any():
        out[imm] = float(oracle.payoff(x))
    if fin.any():
        Lf = L[fin]
        out[fin] = (x / Lf) ** ety * np.asarray(oracle.payoff(Lf), dtype=float)
    return out


def _gate(theta, own_lev, opp_lev):
    """Literal payoff multiplier: 1 alone or first, 1/2 tied, 0 beaten."""
    factor = np.ones(own_lev.shape)
    active = theta.astype(bool)
    factor[active & (opp_lev < own_lev)] = 0.0
    factor[active & (opp_lev == own_lev)] = 0.5
    return factor


def _stopper_codes(L1, L2):
    codes = np.full(L1.shape, _BOTH, dtype=np.int8)
    codes[L1 < L2] = _P1
    codes[L2 < L1] = _P2
    codes[np.isinf(L1) & np.isinf(L2)] = _NEITHER
    return codes


def _kernel_for(config):
    if config.backend == "fallback":
        return _pathsim_np
    if config.backend == "compiled":
        if _pathsim is None:
            raise RuntimeError("compiled kernel not available")
        return _pathsim
    return _pathsim if _pathsim is not None else _pathsim_np


def _path_stop_values(profile, config, ids, L1, L2, theta1, theta2):
    """Realized discounted own-stop payoffs from simulated detections.

    Simulates only the levels some payoff actually needs: the earlier
    trigger always, the later one when its owner acts alone in their own
    world (opponent absent) or the triggers tie.
    """
    oracle = profile.oracle
    model = oracle.model
    if model is None:
        raise ValueError("path mode needs GBM dynamics attached to the oracle")
    r = model.r
    if np.exp(-r * config.t_max) > config.truncation_budget:
        raise ValueError(
            "horizon too short: e^(-r*t_max) = %g exceeds the truncation "
            "budget %g" % (np.exp(-r * config.t_max), config.truncation_budget))
    x0 = profile.x
    ety = _eta(model)
    B = float(oracle.stop_threshold)

    pos1 = np.isfinite(L1) & (L1 > 0.0)
    pos2 = np.isfinite(L2) & (L2 > 0.0)
    need1 = pos1 & (~theta1.astype(bool) | (L1 <= L2))
    need2 = pos2 & (~theta2.astype(bool) | (L2 <= L1))
    a = np.where(need1, L1, np.inf)
    b = np.where(need2, L2, np.inf)
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    hi[hi == lo] = np.inf

    n = len(ids)
    t_lo = np.full(n, -1.0)
    t_hi = np.full(n, -1.0)
    x_lo = np.full(n, np.nan)
    x_hi = np.full(n, np.nan)
    run = np.isfinite(lo)
    if run.any():
        shift = BETA_SHIFT * model.sigma * np.sqrt(config.dt)
        lev1_log = np.where(np.isfinite(lo), np.log(np.where(run, lo, 1.0)) - shift, np.inf)
        lev2_log = np.where(np.isfinite(hi), np.log(np.where(np.isfinite(hi), hi, 1.0)) - shift, np.inf)
        absorb_const = (np.log(ABSORB_TOL)
                        - np.log(B - model.strike) + ety * np.log(B))
        k0, k1 = _philox.key_from_seed(config.seed)
        kern = _kernel_for(config)
        sub = np.flatnonzero(run)
        st1 = np.empty(sub.size)
        sx1 = np.empty(sub.size)
        st2 = np.empty(sub.size)
        sx2 = np.empty(sub.size)
        kern.simulate_hits(
            k0, k1, _philox.DOMAIN_PATH,
            np.ascontiguousarray(ids[sub], dtype=np.uint64),
            float(np.log(x0)), model.mu - 0.5 * model.sigma ** 2, model.sigma,
            r, ety, float(absorb_const), config.t_max, config.dt,
            np.ascontiguousarray(lev1_log[sub]),
            np.ascontiguousarray(lev2_log[sub]),
            st1, sx1, st2, sx2)
        t_lo[sub] = st1
        x_lo[sub] = sx1
        t_hi[sub] = st2
        x_hi[sub] = sx2

    def realized(L_own, needed):
        t_own = np.where(L_own == lo, t_lo, np.where(L_own == hi, t_hi, -1.0))
        s = np.zeros(n)
        imm = L_own == 0.0
        s[imm] = float(oracle.payoff(x0))
        hit = needed & (t_own >= 0.0)
        if hit.any():
            s[hit] = np.exp(-r * t_own[hit]) * np.asarray(
                oracle.payoff(L_own[hit]), dtype=float)
        return s, needed & ~imm & (t_own < 0.0)

    s1, miss1 = realized(L1, need1)
    s2, miss2 = realized(L2, need2)
    return s1, s2, int(np.count_nonzero(miss1 | miss2))


def _simulate_batch(profile, config, ids=None):
    """Draw (U, theta) for each path id and build the outcome arrays."""
    oracle = profile.oracle
    if config.mode == _SEMI and oracle.kind != "closed-form-gbm":
        raise ValueError("semi-analytic mode needs the closed-form GBM oracle")
    if ids is None:
        ids = np.arange(config.n_paths, dtype=np.uint64)
    else:
        ids = np.asarray(ids, dtype=np.uint64)
    draws = _philox.uniforms(config.seed, _philox.DOMAIN_OUTCOME, ids, 4)
    u1, u2 = draws[:, 0], draws[:, 1]
    theta1 = (draws[:, 2] < profile.p1).astype(np.int8)
    theta2 = (draws[:, 3] < profile.p2).astype(np.int8)
    L1 = _resolve_levels(oracle, profile.rule1, u1)
    L2 = _resolve_levels(oracle, profile.rule2, u2)

    if config.mode == _SEMI:
        s1 = _own_stop_values(oracle, profile.x, L1)
        s2 = _own_stop_values(oracle, profile.x, L2)
        n_unresolved = int(np.count_nonzero(np.isinf(L1) & np.isinf(L2)))
    else:
        s1, s2, n_unresolved = _path_stop_values(
            profile, config, ids, L1, L2, theta1, theta2)
    r1 = s1 * _gate(theta1, L1, L2)
    r2 = s2 * _gate(theta2, L2, L1)

    codes = _stopper_codes(L1, L2)
    first = np.minimum(L1, L2)
    t_or_level = np.where(codes == _NEITHER, np.nan, first)
    return OutcomeBatch(ids, u1, u2, theta1, theta2, L1, L2, codes,
                        t_or_level, r1, r2, n_unresolved)


def sample_outcomes(profile, config):
    """All outcomes for the configured batch, as an OutcomeBatch."""
    return _simulate_batch(profile, config)


def sample_outcome(profile, config, path_id=0):
    """The single outcome addressed by (config.seed, path_id).

    The same record is produced whether the path is sampled alone or as
    part of any batch, by the counter-based stream contract.
    """
    batch = _simulate_batch(profile, config, ids=[path_id])
    return batch.record(0)


def estimate_value(profile, player, config):
    """Monte Carlo value estimate for one player under the profile.

    In semi-analytic mode the existence draws are integrated out path by
    path (conditional expectation given the uniforms), which is exact for
    the hitting discounts and leaves only the uniform-draw variance.  Path
    mode averages the literal realized payoffs.
    """
    if player not in (1, 2):
        raise ValueError("player must be 1 or 2")
    batch = _simulate_batch(profile, config)
    if config.mode == _SEMI:
        own = batch.trigger1 if player == 1 else batch.trigger2
        opp = batch.trigger2 if player == 1 else batch.trigger1
        p_self = profile.p1 if player == 1 else profile.p2
        s = _own_stop_values(profile.oracle, profile.x, own)
        weight = np.where(own < opp, 1.0,
                          np.where(own == opp, 1.0 - 0.5 * p_self, 1.0 - p_self))
        vals = s * weight
    else:
        vals = batch.r1 if player == 1 else batch.r2
    n = len(vals)
    mean = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return EstimateResult(player=player, mean=mean, stderr=stderr, n=n,
                          seed=config.seed, mode=config.mode)


def integrate_over_levels(oracle, profile, player, u_grid):
    """Quadrature of the player's payoff over their own randomization.

    Each u resolves the player's rule to a stop trigger whose payoff against
    the opponent's rule comes from payoff_vs_rule; the result is the
    trapezoid average over the supplied grid (the integral per unit of
    u-mass; a single-point grid returns the integrand there).
    """
    if player not in (1, 2):
        raise ValueError("player must be 1 or 2")
    own = profile.rule1 if player == 1 else profile.rule2
    opp = profile.rule2 if player == 1 else profile.rule1
    p_self = profile.p1 if player == 1 else profile.p2
    if own is None:
        raise ValueError("profile stops immediately; nothing to integrate")
    u_grid = np.asarray(u_grid, dtype=float)
    if u_grid.ndim != 1 or u_grid.size == 0:
        raise ValueError("u_grid must be a nonempty 1-d array")
    if u_grid.size > 1 and not (np.diff(u_grid) > 0).all():
        raise ValueError("u_grid must be strictly increasing")
    if u_grid[0] < 0.0 or u_grid[-1] > 1.0:
        raise ValueError("u_grid must lie within [0, 1]")
    levels = _resolve_levels(oracle, own, u_grid)
    x = profile.x
    vals = np.empty(u_grid.shape)
    for i, L in enumerate(levels):
        if L == 0.0:
            vals[i] = payoff_vs_rule(oracle, opp, p_self, x, x)
        elif np.isinf(L):
            vals[i] = 0.0
        else:
            vals[i] = payoff_vs_rule(oracle, opp, p_self, L, x)
    if u_grid.size == 1:
        return float(vals[0])
    return float(np.trapezoid(vals, u_grid) / (u_grid[-1] - u_grid[0]))


def discretization_probe(profile, config):
    """Matched-draw comparison of path-mode and semi-analytic payoffs.

    Both use the same (U, theta) draws, so the per-path differences isolate
    the detection-grid bias of path mode.  Returns per-player mean semi and
    path payoffs plus the difference mean and its standard error.
    """
    if config.mode != _PATH:
        raise ValueError("probe runs in path mode")
    batch = _simulate_batch(profile, config)
    semi = _simulate_batch(
        profile,
        SimConfig(n_paths=config.n_paths, seed=config.seed, dt=config.dt,
                  t_max=config.t_max, mode=_SEMI,
                  truncation_budget=config.truncation_budget,
                  backend=config.backend))
    out = {}
    n = len(batch)
    for player, rp, rs in ((1, batch.r1, semi.r1), (2, batch.r2, semi.r2)):
        diff = rp - rs
        out["player%d" % player] = {
            "path_mean": float(np.mean(rp)),
            "semi_mean": float(np.mean(rs)),
            "diff_mean": float(np.mean(diff)),
            "diff_stderr": float(np.std(diff, ddof=1) / np.sqrt(n)) if n > 1 else 0.0,
        }
    return out
