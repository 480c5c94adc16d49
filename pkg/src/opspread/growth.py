"""Binary-string stochastic growth model: transition rates, brickwork Monte
Carlo and drift/diffusion estimation from front statistics.

States live on {I, X}^L with periodic boundaries; a layer stepping time
t -> t+1 acts on pairs (x, x+1), x even, when t is even and on (x-1, x)
when t is odd.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend_np
from .errors import EnsembleValidityError

try:
    from . import _kernels
    HAVE_KERNEL = True
except ImportError:  # pure-python install
    _kernels = None
    HAVE_KERNEL = False

RATE_TOL = 1e-12


def default_backend():
    if os.environ.get("OPSPREAD_FORCE_NUMPY"):
        return "numpy"
    return "cython" if HAVE_KERNEL else "numpy"


@dataclass
class TransitionRates:
    """Pair rates of the binary growth process: t1 keeps a mixed pair, tx
    swaps it, tplus grows I->X, tminus shrinks one X of an XX pair, t11
    keeps XX."""

    t1: float
    tx: float
    tplus: float
    tminus: float
    t11: float
    q: int

    def as_tuple(self):
        return (self.t1, self.tx, self.tplus, self.tminus, self.t11)


def _clamp01(v, name):
    if v < -RATE_TOL or v > 1 + RATE_TOL:
        raise EnsembleValidityError(f"rate {name} = {v} outside [0, 1]")
    return min(max(v, 0.0), 1.0)


def transition_rates(c):
    """Binary pair rates from the ensemble coefficients."""
    q = c.q
    q2, q4 = q**2, q**4
    t1 = (1 + q2 * (c.a1.real + c.a2 + c.a3) / (q4 - 1)) / (q2 + 1)
    tplus = (q2 - 1) / (q2 + 1) * (1 + (q2 * c.a1.real - c.a2 - c.a3) / (q4 - 1))
    tminus = tplus / (q2 - 1)
    tx = 1.0 - t1 - tplus
    t11 = 1.0 - 2 * tminus
    t1 = _clamp01(t1, "t1")
    tx = _clamp01(tx, "tx")
    tplus = _clamp01(tplus, "tplus")
    tminus = _clamp01(tminus, "tminus")
    t11 = _clamp01(t11, "t11")
    return TransitionRates(t1, tx, tplus, tminus, t11, q)


def rate_tensor(rates):
    """T[a_left, a_right, p_left, p_right] over {0: I, 1: X}."""
    t = np.zeros((2, 2, 2, 2))
    t[0, 0, 0, 0] = 1.0
    t[0, 1, 0, 1] = t[1, 0, 1, 0] = rates.t1
    t[0, 1, 1, 0] = t[1, 0, 0, 1] = rates.tx
    t[0, 1, 1, 1] = t[1, 0, 1, 1] = rates.tplus
    t[1, 1, 0, 1] = t[1, 1, 1, 0] = rates.tminus
    t[1, 1, 1, 1] = rates.t11
    return t


# ---------------------------------------------------------------------------
# chain state and stepping
# ---------------------------------------------------------------------------

@dataclass
class BinaryChainState:
    bits: np.ndarray  # uint8 over {0, 1}, length L even
    t: int = 0

    def __post_init__(self):
        self.bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if self.bits.shape[0] % 2:
            raise ValueError("L must be even")


def single_x_state(L, x=0):
    bits = np.zeros(L, dtype=np.uint8)
    bits[x] = 1
    return BinaryChainState(bits=bits, t=0)


def step_layer(state, rates, rng, backend=None):
    """One brickwork layer; returns a new state with t incremented.

    Draws one uniform per gate (gates ordered by even site index) so the
    result is a pure function of (state, rates, rng stream).
    """
    u = rng.random(state.bits.shape[0] // 2)
    bits = state.bits.copy()
    parity = state.t & 1
    be = backend or default_backend()
    if be == "cython" and HAVE_KERNEL:
        _kernels.step_layer_uniforms(bits, parity, rates.t1, rates.tx, rates.tminus, u)
    else:
        _backend_np.step_layer_uniforms(bits, parity, rates.t1, rates.tx, rates.tminus, u)
    return BinaryChainState(bits=bits, t=state.t + 1)


# ---------------------------------------------------------------------------
# front Monte Carlo
# ---------------------------------------------------------------------------

@dataclass
class FrontTrace:
    """Rightmost-X position statistics over independent realizations."""

    t: np.ndarray
    mean: np.ndarray
    var: np.ndarray
    mean_se: np.ndarray
    var_se: np.ndarray
    n_valid: np.ndarray
    n_real: int
    n_truncated: int
    seed: int
    L: int
    rates: TransitionRates = field(repr=False, default=None)


_CHUNK = 4096


def simulate_front(rates, L, t_max, n_real, seed, threads=None, backend=None):
    """Track the rightmost X of a single-X initial state over n_real
    realizations.  Deterministic in (seed, n_real); realizations that wrap
    the ring are truncated and flagged."""
    if L % 2 or L < 4:
        raise ValueError("L must be even and >= 4")
    if n_real < 1:
        raise ValueError("n_real must be >= 1")
    be = backend or default_backend()
    if be == "cython" and not HAVE_KERNEL:
        raise RuntimeError("compiled kernel not available")
    fn = (_kernels.simulate_front_range if be == "cython"
          else _backend_np.simulate_front_range)

    starts = list(range(0, n_real, _CHUNK))
    jobs = [(s, min(_CHUNK, n_real - s)) for s in starts]

    def run(job):
        s, c = job
        return fn(rates.t1, rates.tx, rates.tminus, L, t_max, seed, s, c)

    threads = threads or 1
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]

    sums = np.sum([p[0] for p in parts], axis=0)
    sq = np.sum([p[1] for p in parts], axis=0)
    cnt = np.sum([p[2] for p in parts], axis=0)
    n_trunc = int(sum(p[3] for p in parts))

    n = np.maximum(cnt, 1)
    mean = sums / n
    var = np.maximum(sq / n - mean**2, 0.0)
    var = var * n / np.maximum(n - 1, 1)  # unbiased
    mean_se = np.sqrt(var / n)
    var_se = var * np.sqrt(2.0 / np.maximum(n - 1, 1))
    return FrontTrace(
        t=np.arange(t_max + 1), mean=mean, var=var, mean_se=mean_se,
        var_se=var_se, n_valid=cnt, n_real=n_real, n_truncated=n_trunc,
        seed=seed, L=L, rates=rates,
    )


@dataclass
class DriftDiffusionFit:
    v_b: float
    d: float
    v_b_se: float
    d_se: float
    t_min_fit: int


def fit_drift_diffusion(trace, t_min_fit=None):
    """Least-squares slopes of mean(t) and var(t) past the transient."""
    t_max = int(trace.t[-1])
    if t_min_fit is None:
        t_min_fit = t_max // 3
    sel = trace.t >= t_min_fit
    if sel.sum() < 5:
        raise ValueError("need at least 5 points past t_min_fit")
    tt = trace.t[sel].astype(float)

    def slope(y):
        coef, cov = np.polyfit(tt, y[sel], 1, cov=True)
        return coef[0], np.sqrt(cov[0, 0])

    v, v_se = slope(trace.mean)
    d, d_se = slope(trace.var)
    return DriftDiffusionFit(v_b=v, d=d, v_b_se=v_se, d_se=d_se, t_min_fit=t_min_fit)


# ---------------------------------------------------------------------------
# exact binary evolution (small L) and batched state sampling, for tests
# and cross-module consistency
# ---------------------------------------------------------------------------

def evolve_binary(rates, L, rho0, t_max):
    """Exact evolution of a distribution over {I, X}^L (site 0 is the most
    significant bit).  Returns shape (t_max+1, 2^L)."""
    if L % 2:
        raise ValueError("L must be even")
    rho0 = np.asarray(rho0, dtype=float)
    if rho0.shape != (2**L,):
        raise ValueError("rho0 has wrong length")
    t4 = rate_tensor(rates)
    m = t4.reshape(4, 4).T  # m[target_pair, source_pair] with pair = 2*left + right
    out = np.empty((t_max + 1, 2**L))
    out[0] = rho0
    rho = rho0.reshape((2,) * L)
    for t in range(t_max):
        if t % 2 == 0:
            pairs = [(x, x + 1) for x in range(0, L, 2)]
        else:
            pairs = [((x - 1) % L, x) for x in range(0, L, 2)]
        for x, y in pairs:
            w = np.moveaxis(rho, (x, y), (0, 1))
            shp = w.shape
            w = m @ w.reshape(4, -1)
            rho = np.moveaxis(w.reshape(shp), (0, 1), (x, y))
        out[t + 1] = rho.reshape(-1)
    return out


def sample_binary_states(rates, L, t_max, n_real, seed):
    """Empirical state counts of the Monte Carlo chain started from a single
    X at site 0; returns shape (t_max+1, 2^L) of counts."""
    rng = np.random.default_rng(seed)
    bits = np.zeros((n_real, L), dtype=np.uint8)
    bits[:, 0] = 1
    counts = np.zeros((t_max + 1, 2**L), dtype=np.int64)
    weights = 1 << np.arange(L - 1, -1, -1).astype(np.int64)

    def record(t):
        idx = bits.astype(np.int64) @ weights
        counts[t] = np.bincount(idx, minlength=2**L)

    record(0)
    for t in range(t_max):
        parity = t & 1
        for k in range(L // 2):
            u = rng.random(n_real)
            if parity == 0:
                i, j = 2 * k, 2 * k + 1
            else:
                j = 2 * k
                i = L - 1 if j == 0 else j - 1
            _backend_np._pair_update(bits[:, i], bits[:, j], u,
                                     rates.t1, rates.tx, rates.tminus)
        record(t + 1)
    return counts
