"""Counter-seeded xoshiro256++ streams, one per Monte Carlo realization.

The compiled kernel and the numpy fallback implement the identical
generator, so front traces are byte-for-byte reproducible across backends
and independent of how realizations are chunked or threaded.  Realization
``i`` of master seed ``s`` seeds a splitmix64 at ``s + (i+1)*GOLDEN`` and
takes four outputs as the xoshiro state.
"""

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_INV53 = 1.0 / 9007199254740992.0  # 2^-53


def _splitmix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_states(seed, start, count):
    """Initial xoshiro256++ states for realizations start..start+count-1,
    shape (4, count) uint64.  Each realization owns a private splitmix64
    sequence keyed by its global index, so streams never share state words."""
    with np.errstate(over="ignore"):
        idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
        z0 = _splitmix64(np.uint64(seed) + idx * GOLDEN)
        s = np.empty((4, count), dtype=np.uint64)
        for j in range(4):
            s[j] = _splitmix64(z0 + np.uint64(j + 1) * GOLDEN)
    dead = (s == 0).all(axis=0)
    if dead.any():
        s[0, dead] = np.uint64(1)
    return s


def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


def next_uniform(s):
    """Advance every stream by one step in place; return doubles in [0, 1)."""
    with np.errstate(over="ignore"):
        out = _rotl(s[0] + s[3], 23) + s[0]
        t = s[1] << np.uint64(17)
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
    return (out >> np.uint64(11)).astype(np.float64) * _INV53


class ScalarXoshiro:
    """Single-stream reference implementation (mirrors the kernel exactly)."""

    def __init__(self, seed, index):
        s = stream_states(seed, index, 1)
        self.s = [int(s[j, 0]) for j in range(4)]

    def next_uniform(self):
        mask = 0xFFFFFFFFFFFFFFFF

        def rotl(x, k):
            return ((x << k) | (x >> (64 - k))) & mask

        s = self.s
        out = (rotl((s[0] + s[3]) & mask, 23) + s[0]) & mask
        t = (s[1] << 17) & mask
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        return (out >> 11) * _INV53
