"""Pure-numpy fallback for the compiled first-passage kernel.

Implements the same interface and stepping rule as ``_pathsim.simulate_hits``
but draws normals with Box-Muller instead of the ziggurat, so the two
backends agree in distribution and in addressing (same Philox streams), not
bit-for-bit.  All live paths advance together one step per sweep; a path's
j-th increment is a pure function of (key, path id, j), so results do not
depend on how the batch is laid out or when other paths die.
"""

from __future__ import annotations

import numpy as np

from . import _philox

_ABS_CAP = 5.0
_DRIFT_FRAC = 0.15
_STEP_C = 77.0


def simulate_hits(key0, key1, domain, path_ids, log_x0, drift, sigma, r, eta,
                  absorb_const, t_max, dt_fine, lev1_log, lev2_log,
                  t1, x1, t2, x2):
    """See ``_pathsim.simulate_hits``; same contract, vectorized sweeps."""
    if sigma <= 0.0:
        raise ValueError("sigma must be positive")
    ids = np.asarray(path_ids, dtype=np.uint64)
    n = ids.shape[0]
    t1[:] = -1.0
    x1[:] = np.nan
    t2[:] = -1.0
    x2[:] = np.nan
    if n == 0:
        return 0

    inv_c = 1.0 / (_STEP_C * sigma * sigma)
    m_up = max(drift, 0.0)

    # compact working copies; idx maps rows back to the caller's arrays
    idx = np.arange(n)
    l = np.full(n, float(log_x0))
    t = np.zeros(n)
    b1 = np.array(lev1_log, dtype=float, copy=True)
    b2 = np.array(lev2_log, dtype=float, copy=True)
    spare = np.empty(n)
    steps = 0
    sweep = 0
    while idx.size:
        # record crossings; twice, since equal levels resolve in one sweep
        for _ in range(2):
            hit = l >= b1
            if not hit.any():
                break
            rows = idx[hit]
            first = t1[rows] < 0.0
            fr = rows[first]
            t1[fr] = t[hit][first]
            x1[fr] = np.exp(l[hit][first])
            sr = rows[~first]
            t2[sr] = t[hit][~first]
            x2[sr] = np.exp(l[hit][~first])
            b1[hit] = b2[hit]
            b2[hit] = np.inf
        dead = (b1 == np.inf) | (eta * l - r * t < absorb_const) | (t >= t_max)
        if dead.any():
            keep = ~dead
            idx = idx[keep]
            l = l[keep]
            t = t[keep]
            b1 = b1[keep]
            b2 = b2[keep]
            spare = spare[keep]
            if idx.size == 0:
                break
        d = b1 - l
        dt = d * d * inv_c
        if m_up > 0.0:
            np.minimum(dt, _DRIFT_FRAC * d / m_up, out=dt)
        np.clip(dt, dt_fine, _ABS_CAP, out=dt)
        if sweep % 2 == 0:
            z, spare = _philox.normal_pair_keyed(key0, key1, domain,
                                                ids[idx], sweep // 2)
        else:
            z = spare
        l += drift * dt + sigma * np.sqrt(dt) * z
        t += dt
        steps += idx.size
        sweep += 1
    return steps
