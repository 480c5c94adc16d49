# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: brickwork layer updates on binary chains and the
front-tracking Monte Carlo.  The RNG is xoshiro256++ with the seeding
scheme of _rng.py; the numpy backend reproduces the streams bit for bit.
"""

import numpy as np

from libc.stdint cimport uint8_t, uint64_t, int64_t

cdef extern from *:
    """
    static inline uint64_t osp_rotl(uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    """
    uint64_t osp_rotl(uint64_t x, int k) nogil

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL

cdef inline Py_ssize_t pmod(Py_ssize_t x, Py_ssize_t L) nogil:
    x = x % L
    if x < 0:
        x += L
    return x

cdef inline uint64_t splitmix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)

cdef inline void seed_stream(uint64_t seed, uint64_t index, uint64_t* s) nogil:
    cdef uint64_t z0 = splitmix64(seed + (index + 1) * GOLDEN)
    cdef int j
    for j in range(4):
        s[j] = splitmix64(z0 + (<uint64_t> (j + 1)) * GOLDEN)
    if s[0] == 0 and s[1] == 0 and s[2] == 0 and s[3] == 0:
        s[0] = 1

cdef inline double next_uniform(uint64_t* s) nogil:
    cdef uint64_t out = osp_rotl(s[0] + s[3], 23) + s[0]
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = osp_rotl(s[3], 45)
    return (out >> 11) * (1.0 / 9007199254740992.0)


cdef inline void pair_update(uint8_t* a, uint8_t* b, double u,
                             double t1, double tx, double tminus) nogil:
    # outcome thresholds fixed by contract: keep < t1, swap < t1+tx, else grow
    # for mixed pairs; for XX: left-kill < t-, right-kill < 2 t-, else stay
    cdef uint8_t ab = (a[0] << 1) | b[0]
    if ab == 1:            # I X
        if u < t1:
            pass
        elif u < t1 + tx:
            a[0] = 1; b[0] = 0
        else:
            a[0] = 1
    elif ab == 2:          # X I
        if u < t1:
            pass
        elif u < t1 + tx:
            a[0] = 0; b[0] = 1
        else:
            b[0] = 1
    elif ab == 3:          # X X
        if u < tminus:
            a[0] = 0
        elif u < 2 * tminus:
            b[0] = 0
        # else stay XX


def step_layer_uniforms(uint8_t[::1] bits, int parity, double t1, double tx,
                        double tminus, double[::1] u):
    """Apply one brickwork layer in place; parity is the source-time parity.
    u holds one uniform per gate, gates ordered by even site x ascending."""
    cdef Py_ssize_t L = bits.shape[0]
    cdef Py_ssize_t k, i, j
    cdef uint8_t* pb = &bits[0]
    for k in range(L // 2):
        if parity == 0:
            i = 2 * k
            j = i + 1
        else:
            j = 2 * k
            i = L - 1 if j == 0 else j - 1
        pair_update(pb + i, pb + j, u[k], t1, tx, tminus)


def simulate_front_range(double t1, double tx, double tminus,
                         Py_ssize_t L, Py_ssize_t t_max,
                         uint64_t seed, uint64_t start, Py_ssize_t count):
    """Front Monte Carlo over realizations [start, start+count).

    Starts each realization from a single X at ring site 0, tracks the
    unwrapped rightmost-X coordinate after every layer, and accumulates
    per-time sums, squared sums and valid counts.  A realization is
    truncated (and no longer counted) once its two fronts collide on the
    ring.  Returns (sums, sumsqs, counts, n_truncated).
    """
    sums_arr = np.zeros(t_max + 1, dtype=np.float64)
    sq_arr = np.zeros(t_max + 1, dtype=np.float64)
    cnt_arr = np.zeros(t_max + 1, dtype=np.int64)
    bits_arr = np.zeros(L, dtype=np.uint8)
    cdef double[::1] sums = sums_arr
    cdef double[::1] sq = sq_arr
    cdef int64_t[::1] cnt = cnt_arr
    cdef uint8_t[::1] bits = bits_arr
    cdef uint8_t* pb = &bits[0]
    cdef double* psums = &sums[0]
    cdef double* psq = &sq[0]
    cdef int64_t* pcnt = &cnt[0]

    cdef uint64_t rng[4]
    cdef Py_ssize_t r, t, k, i, j, x, half = L // 2
    cdef int64_t right, left, n_trunc = 0
    cdef double u, pos
    cdef int parity
    cdef bint alive

    with nogil:
        for r in range(count):
            seed_stream(seed, start + r, rng)
            for x in range(L):
                pb[x] = 0
            pb[0] = 1
            right = 0
            left = 0
            alive = True
            pcnt[0] += 1
            for t in range(t_max):
                if not alive:
                    break
                parity = <int> (t & 1)
                if parity == 0:
                    for k in range(half):
                        u = next_uniform(rng)
                        i = 2 * k
                        pair_update(pb + i, pb + i + 1, u, t1, tx, tminus)
                else:
                    u = next_uniform(rng)
                    pair_update(pb + L - 1, pb, u, t1, tx, tminus)
                    for k in range(1, half):
                        u = next_uniform(rng)
                        j = 2 * k
                        pair_update(pb + j - 1, pb + j, u, t1, tx, tminus)
                # rightmost moves by at most one site per layer
                if pb[pmod(right + 1, L)]:
                    right += 1
                elif not pb[pmod(right, L)]:
                    right -= 1
                if pb[pmod(left - 1, L)]:
                    left -= 1
                elif not pb[pmod(left, L)]:
                    left += 1
                if right - left >= L - 2:
                    n_trunc += 1
                    alive = False
                    break
                pos = <double> right
                psums[t + 1] += pos
                psq[t + 1] += pos * pos
                pcnt[t + 1] += 1

    return sums_arr, sq_arr, cnt_arr, n_trunc
