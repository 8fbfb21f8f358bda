"""Counter-addressed uniform random numbers (Philox4x32-10), numpy-vectorized.

The simulation contract needs per-path streams that are pure functions of
(master seed, path index, draw index): any batching or worker layout then
yields bit-identical results.  numpy ships Philox only as a stateful
BitGenerator, which cannot be addressed this way from vectorized code or from
the compiled kernel, so the 10-round 4x32 network is implemented here (and
mirrored scalar-for-scalar in the Cython kernel; the two are asserted equal
in tests).  Draws are addressed as

    counter = (block, path_lo32, path_hi32, domain)    key = splitmix64(seed)

where domain separates independent uses (outcome draws vs path increments).
"""

from __future__ import annotations

import numpy as np

PHILOX_M0 = np.uint32(0xD2511F53)
PHILOX_M1 = np.uint32(0xCD9E8D57)
PHILOX_W0 = np.uint32(0x9E3779B9)
PHILOX_W1 = np.uint32(0xBB67AE85)

#: domain tags (counter word 3)
DOMAIN_OUTCOME = 1
DOMAIN_PATH = 2
DOMAIN_CHECK = 7

_U64 = np.uint64
_U32 = np.uint32


def splitmix64_mix(seed: int) -> int:
    """One splitmix64 output for the given 64-bit input; used as the key."""
    z = (int(seed) + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return (z ^ (z >> 31)) & 0xFFFFFFFFFFFFFFFF


def key_from_seed(seed: int) -> tuple:
    """(k0, k1) 32-bit key words derived from the master seed."""
    mixed = splitmix64_mix(seed)
    return mixed & 0xFFFFFFFF, (mixed >> 32) & 0xFFFFFFFF


def philox4x32(c0, c1, c2, c3, k0: int, k1: int):
    """The 10-round Philox4x32 block function on vectorized uint32 counters.

    Returns four uint32 arrays broadcast to the common counter shape.
    """
    c0 = np.asarray(c0, dtype=_U32)
    c1 = np.asarray(c1, dtype=_U32)
    c2 = np.asarray(c2, dtype=_U32)
    c3 = np.asarray(c3, dtype=_U32)
    c0, c1, c2, c3 = np.broadcast_arrays(c0, c1, c2, c3)
    c0, c1, c2, c3 = (a.copy() for a in (c0, c1, c2, c3))
    k0 = _U32(k0)
    k1 = _U32(k1)
    with np.errstate(over="ignore"):
        for _ in range(10):
            prod0 = c0.astype(_U64) * _U64(PHILOX_M0)
            prod1 = c2.astype(_U64) * _U64(PHILOX_M1)
            hi0 = (prod0 >> _U64(32)).astype(_U32)
            lo0 = prod0.astype(_U32)
            hi1 = (prod1 >> _U64(32)).astype(_U32)
            lo1 = prod1.astype(_U32)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
            k0 = _U32(k0 + PHILOX_W0)
            k1 = _U32(k1 + PHILOX_W1)
    return c0, c1, c2, c3


def raw_u64_keyed(k0: int, k1: int, domain: int, path_ids, blocks):
    """Two uint64 words per (path, block) pair, shape (..., 2).

    Word j of block b is u64 index 2b + j of that path's stream; the Cython
    kernel consumes the identical sequence.
    """
    ids = np.asarray(path_ids, dtype=_U64)
    blk = np.asarray(blocks, dtype=_U64)
    w0, w1, w2, w3 = philox4x32(
        blk.astype(_U32),
        ids.astype(_U32),
        (ids >> _U64(32)).astype(_U32),
        _U32(domain),
        k0,
        k1,
    )
    a = (w0.astype(_U64) << _U64(32)) | w1.astype(_U64)
    b = (w2.astype(_U64) << _U64(32)) | w3.astype(_U64)
    return np.stack([a, b], axis=-1)


def raw_u64(seed: int, domain: int, path_ids, blocks):
    """raw_u64_keyed with the key derived from the master seed."""
    k0, k1 = key_from_seed(seed)
    return raw_u64_keyed(k0, k1, domain, path_ids, blocks)


def u64_to_unit(u) -> np.ndarray:
    """Map uint64 words to doubles in [0, 1) using the top 53 bits."""
    return (np.asarray(u, dtype=_U64) >> _U64(11)).astype(np.float64) * (2.0**-53)


def uniforms(seed: int, domain: int, path_ids, k: int) -> np.ndarray:
    """k uniforms per path id, shape (len(path_ids), k), counter-addressed."""
    ids = np.asarray(path_ids, dtype=_U64)
    n_blocks = (k + 1) // 2
    blk = np.arange(n_blocks, dtype=_U64)
    words = raw_u64(seed, domain, ids[:, None], blk[None, :])
    flat = words.reshape(len(ids), 2 * n_blocks)
    return u64_to_unit(flat[:, :k])


def normal_pair_keyed(k0: int, k1: int, domain: int, path_ids, block: int):
    """The Box-Muller normal pair from one block of each path's stream."""
    words = raw_u64_keyed(k0, k1, domain, path_ids, _U64(block))
    u1 = u64_to_unit(words[..., 0])
    u2 = u64_to_unit(words[..., 1])
    rad = np.sqrt(-2.0 * np.log1p(-u1))
    ang = 2.0 * np.pi * u2
    return rad * np.cos(ang), rad * np.sin(ang)


def normals_box_muller(seed: int, domain: int, path_ids, count: int):
    """count standard normals per path, two per block; shape (n_paths, count).

    Normal 2b and 2b+1 of a path are the cos/sin halves of block b, the
    consumption order of the fallback path kernel.
    """
    k0, k1 = key_from_seed(seed)
    ids = np.asarray(path_ids, dtype=_U64)
    n_blocks = (count + 1) // 2
    z = np.empty((len(ids), 2 * n_blocks))
    for b in range(n_blocks):
        z[:, 2 * b], z[:, 2 * b + 1] = normal_pair_keyed(k0, k1, domain, ids, b)
    return z[:, :count]
