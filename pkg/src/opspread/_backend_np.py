"""Pure-numpy fallback for the compiled kernels.

Vectorizes over realizations while drawing uniforms gate by gate from the
same per-realization xoshiro streams as the compiled kernel, so both
backends produce identical front traces.
"""

import numpy as np

from . import _rng


def _pair_update(a, b, u, t1, tx, tminus):
    """Vectorized outcome of one gate on pair columns (a, b) given uniforms."""
    ab = (a.astype(np.int8) << 1) | b
    mixed_keep = u < t1
    mixed_swap = (u >= t1) & (u < t1 + tx)
    m = ab == 1  # I X
    sel = m & mixed_swap
    a[sel] = 1
    b[sel] = 0
    a[m & ~mixed_keep & ~mixed_swap] = 1
    m = ab == 2  # X I
    sel = m & mixed_swap
    a[sel] = 0
    b[sel] = 1
    b[m & ~mixed_keep & ~mixed_swap] = 1
    m = ab == 3  # X X
    a[m & (u < tminus)] = 0
    b[m & (u >= tminus) & (u < 2 * tminus)] = 0


def step_layer_uniforms(bits, parity, t1, tx, tminus, u):
    """Single-chain layer update, in place; mirrors the kernel contract."""
    L = bits.shape[0]
    for k in range(L // 2):
        if parity == 0:
            i, j = 2 * k, 2 * k + 1
        else:
            j = 2 * k
            i = L - 1 if j == 0 else j - 1
        _pair_update(bits[i:i + 1], bits[j:j + 1], np.asarray([u[k]]), t1, tx, tminus)


def simulate_front_range(t1, tx, tminus, L, t_max, seed, start, count):
    """Vectorized equivalent of the kernel's front Monte Carlo."""
    states = _rng.stream_states(seed, start, count)
    bits = np.zeros((count, L), dtype=np.uint8)
    bits[:, 0] = 1
    right = np.zeros(count, dtype=np.int64)
    left = np.zeros(count, dtype=np.int64)
    alive = np.ones(count, dtype=bool)

    sums = np.zeros(t_max + 1)
    sq = np.zeros(t_max + 1)
    cnt = np.zeros(t_max + 1, dtype=np.int64)
    cnt[0] = count
    rows = np.arange(count)

    for t in range(t_max):
        parity = t & 1
        for k in range(L // 2):
            u = _rng.next_uniform(states)
            if parity == 0:
                i, j = 2 * k, 2 * k + 1
            else:
                j = 2 * k
                i = L - 1 if j == 0 else j - 1
            # dead realizations keep evolving harmlessly; only live rows are
            # ever read for the accumulators
            _pair_update(bits[:, i], bits[:, j], u, t1, tx, tminus)
        live = np.flatnonzero(alive)
        if live.size == 0:
            continue
        r = right[live]
        up = bits[live, (r + 1) % L].astype(bool)
        stay = bits[live, r % L].astype(bool)
        right[live] = np.where(up, r + 1, np.where(stay, r, r - 1))
        l = left[live]
        down = bits[live, (l - 1) % L].astype(bool)
        stayl = bits[live, l % L].astype(bool)
        left[live] = np.where(down, l - 1, np.where(stayl, l, l + 1))
        collided = live[(right[live] - left[live]) >= L - 2]
        alive[collided] = False
        live = np.flatnonzero(alive)
        pos = right[live].astype(np.float64)
        sums[t + 1] = pos.sum()
        sq[t + 1] = (pos * pos).sum()
        cnt[t + 1] = live.size

    n_trunc = int(count - alive.sum())
    return sums, sq, cnt, n_trunc
