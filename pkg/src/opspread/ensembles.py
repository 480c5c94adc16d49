"""Gate-ensemble moment functions and the coefficients that drive the
stochastic growth model.

Each unitary-invariant distribution of the two-qudit gate enters the
dynamics only through four trace moments; those map to one complex and two
real coefficients (a1, a2, a3), the ensemble's entire fingerprint.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import pauli
from .errors import EnsembleValidityError

KINDS = ("haar", "trivial", "poisson", "brownian", "fixed", "raw")

_UNITARITY_TOL = 1e-10


@dataclass
class MomentSet:
    """The four trace moments of a two-qudit gate distribution:
    <|tr U|^2>, <|tr U^2|^2>, <|tr U|^4> (real) and <(tr U)^2 tr U^dag^2>
    (complex)."""

    r11: float
    r22: float
    r1111: float
    r112: complex
    q: int

    def as_tuple(self):
        return (self.r11, self.r22, self.r1111, self.r112)


@dataclass
class Coefficients:
    a1: complex
    a2: float
    a3: float
    q: int


@dataclass
class GateEnsembleSpec:
    """Which two-qudit gate distribution to use.

    kind is one of 'haar', 'trivial', 'poisson' (parameter alpha, |alpha|<=1),
    'brownian' (parameter lam >= 0), 'fixed' (conjugacy orbit of a fixed
    unitary u0) or 'raw' (moments given directly).
    """

    kind: str
    q: int = 2
    alpha: complex = 0.0
    lam: float = 0.0
    u0: np.ndarray = None
    moments: MomentSet = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.q < 2:
            raise ValueError("q must be >= 2")
        if self.kind == "poisson" and abs(self.alpha) > 1 + 1e-15:
            raise ValueError("|alpha| must be <= 1")
        if self.kind == "brownian" and self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.kind == "fixed":
            u0 = np.asarray(self.u0)
            n = self.q**2
            if u0.shape != (n, n):
                raise ValueError(f"u0 must be {n} x {n}")
            dev = np.abs(u0 @ u0.conj().T - np.eye(n)).max()
            if dev > _UNITARITY_TOL:
                raise ValueError(f"u0 is not unitary (deviation {dev:.2e})")
        if self.kind == "raw" and self.moments is None:
            raise ValueError("raw ensemble needs a MomentSet")


def haar_moments(q):
    return MomentSet(1.0, 2.0, 2.0, 0.0 + 0.0j, q)


def trivial_moments(q):
    return MomentSet(float(q**4), float(q**4), float(q**8), complex(q**6), q)


def poisson_moments(q, alpha):
    """Closed-form Poisson-kernel moments; depend on |alpha|^2 only."""
    if abs(alpha) > 1 + 1e-15:
        raise ValueError("|alpha| must be <= 1")
    x = abs(alpha) ** 2
    q2, q4, q6, q8 = q**2, q**4, q**6, q**8
    r11 = 1 + x * q4 - x**q2
    r22 = 2 + x**2 * q4 - x ** (q2 - 1) * (1 - x) ** 2 * q4 - 2 * x**q2
    r1111 = 2 + 4 * x * q4 + x**2 * q8 - x ** (q2 - 1) * q4 * (1 + x) ** 2 - 2 * x**q2
    r112 = x**2 * q6 + x ** (q2 - 1) * q4 * (1 - x**2)
    return MomentSet(r11, r22, r1111, complex(r112), q)


def brownian_moments(q, lam):
    """Closed-form moments of the white-noise (Brownian) gate ensemble.

    These are heat-kernel character sums on U(q^2): each irreducible block
    decays with its Casimir rate.  Cross-validated against the Ito moment
    equations and the sampled ensemble (moments_mc).
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    q2, q4, q6, q8 = q**2, q**4, q**6, q**8
    e1, e2 = math.exp(-lam), math.exp(-2 * lam)
    ch, sh = math.cosh(2 * lam / q2), math.sinh(2 * lam / q2)
    r11 = q4 * e1 + 1 - e1
    r22 = 2 + 0.5 * e2 * (q4 * (q4 - 3) * ch - 2 * q6 * sh - q8 + 5 * q4 - 4)
    r112 = e2 * (q6 * ch - 0.5 * q4 * (q4 - 3) * sh)
    r1111 = r22 + 4 * (q4 - 1) * e1 + (q8 - 5 * q4 + 4) * e2
    return MomentSet(r11, r22, r1111, complex(r112), q)


def fixed_moments(q, u0):
    """Moments of the conjugacy orbit {V u0 V^dag}: traces of u0 itself."""
    t1 = complex(np.trace(u0))
    t2 = complex(np.trace(u0 @ u0))
    return MomentSet(abs(t1) ** 2, abs(t2) ** 2, abs(t1) ** 4, t1**2 * np.conj(t2), q)


def moments(spec):
    """Closed-form MomentSet for any supported ensemble spec."""
    if spec.kind == "haar":
        return haar_moments(spec.q)
    if spec.kind == "trivial":
        return trivial_moments(spec.q)
    if spec.kind == "poisson":
        return poisson_moments(spec.q, spec.alpha)
    if spec.kind == "brownian":
        return brownian_moments(spec.q, spec.lam)
    if spec.kind == "fixed":
        return fixed_moments(spec.q, spec.u0)
    return spec.moments


# ---------------------------------------------------------------------------
# Monte Carlo moments
# ---------------------------------------------------------------------------

_MC_CHUNK = 8192
_COND_BOUND = 1e12


@dataclass
class McMoments:
    """Empirical moments with per-moment standard errors.  The r112 error is
    stored as se_re + 1j*se_im."""

    moments: MomentSet
    stderr: MomentSet
    n_samples: int
    n_resampled: int = 0


def _gate_batch(spec, size, rng, brownian_steps):
    """Sample a batch of gates from the ensemble, shape (size, q^2, q^2)."""
    n = spec.q**2
    n_resampled = 0
    if spec.kind == "haar":
        return pauli.haar_batch(n, size, rng), 0
    if spec.kind == "trivial":
        return np.broadcast_to(np.eye(n, dtype=complex), (size, n, n)).copy(), 0
    if spec.kind == "fixed":
        v = pauli.haar_batch(n, size, rng)
        return v @ spec.u0 @ v.conj().transpose(0, 2, 1), 0
    if spec.kind == "poisson":
        alpha = spec.alpha
        eye = np.eye(n, dtype=complex)
        u0 = pauli.haar_batch(n, size, rng)
        for _ in range(100):
            a = eye - np.conj(alpha) * u0
            bad = np.linalg.cond(a) > _COND_BOUND
            if not bad.any():
                break
            n_resampled += int(bad.sum())
            u0[bad] = pauli.haar_batch(n, int(bad.sum()), rng)
        b = alpha * eye - u0
        u = np.linalg.solve(a.transpose(0, 2, 1), b.transpose(0, 2, 1)).transpose(0, 2, 1)
        return u, n_resampled
    if spec.kind == "brownian":
        return _brownian_batch(spec.q, spec.lam, size, brownian_steps, rng), 0
    raise ValueError("raw ensembles cannot be sampled")


def _brownian_batch(q, lam, size, steps, rng):
    """Time-ordered product of `steps` Gaussian-generator factors.

    Each factor is exp(-iH) with H hermitian, entry-pair variance
    lam/(q^2 steps); the matrix exponential is an order-8 Taylor series,
    accurate to ~1e-11 per step at the default step counts.
    """
    n = q**2
    u = np.broadcast_to(np.eye(n, dtype=complex), (size, n, n)).copy()
    if lam == 0 or steps == 0:
        return u
    s2 = lam / (n * steps)
    scale = math.sqrt(s2 / 2)
    eye = np.eye(n, dtype=complex)
    for _ in range(steps):
        z = rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))
        h = (z + z.conj().transpose(0, 2, 1)) * (scale / math.sqrt(2))
        a = -1j * h
        # Horner evaluation of the degree-8 Taylor polynomial of exp(a)
        step = eye + a / 8.0
        for k in range(7, 0, -1):
            step = eye + (a @ step) / k
        u = step @ u
    return u


def _trace_stats(u):
    t1 = np.trace(u, axis1=1, axis2=2)
    t2 = np.einsum("nij,nji->n", u, u)
    return (np.abs(t1) ** 2, np.abs(t2) ** 2, np.abs(t1) ** 4, t1**2 * np.conj(t2))


def moments_mc(spec, n_samples, seed, brownian_steps=200):
    """Monte Carlo estimate of the four moments with standard errors.

    Samples are drawn in fixed-size chunks with per-chunk child seeds, so the
    result is reproducible and independent of any parallel scheduling.
    """
    if n_samples < 1000:
        raise ValueError("n_samples must be >= 1000")
    ss = np.random.SeedSequence(seed)
    n_chunks = (n_samples + _MC_CHUNK - 1) // _MC_CHUNK
    children = ss.spawn(n_chunks)

    sums = np.zeros(4, dtype=complex)
    sqsums = np.zeros(6)  # r11, r22, r1111, Re r112, Im r112 -> 5 used
    total = 0
    n_resampled = 0
    for k in range(n_chunks):
        size = min(_MC_CHUNK, n_samples - total)
        rng = np.random.default_rng(children[k])
        u, nr = _gate_batch(spec, size, rng, brownian_steps)
        n_resampled += nr
        s11, s22, s1111, s112 = _trace_stats(u)
        sums += [s11.sum(), s22.sum(), s1111.sum(), s112.sum()]
        sqsums[:3] += [(s11**2).sum(), (s22**2).sum(), (s1111**2).sum()]
        sqsums[3] += (s112.real**2).sum()
        sqsums[4] += (s112.imag**2).sum()
        total += size

    mean = sums / total

    def se(sq, mu):
        var = max(sq / total - abs(mu) ** 2, 0.0)
        return math.sqrt(var / total)

    est = MomentSet(mean[0].real, mean[1].real, mean[2].real, mean[3], spec.q)
    err = MomentSet(
        se(sqsums[0], mean[0].real),
        se(sqsums[1], mean[1].real),
        se(sqsums[2], mean[2].real),
        se(sqsums[3], mean[3].real) + 1j * se(sqsums[4], mean[3].imag),
        spec.q,
    )
    return McMoments(moments=est, stderr=err, n_samples=total, n_resampled=n_resampled)


# ---------------------------------------------------------------------------
# series route (independent of the closed forms)
# ---------------------------------------------------------------------------

def _q_four_point(K, q2):
    """Sum of <tr U^(K-l) tr U^l tr U^dag^m tr U^dag^(K-m)> over interior
    splittings, in closed form."""
    if q2 <= K:
        return q2 * (4 * q2**2 - 6 * K * q2 + 3 * K**2 - 1) / 3.0
    return K * (K**2 - 1) / 3.0


def _q_three_point(K, q2):
    """Sum of <tr U^(K-m) tr U^m tr U^dag^K> over interior splittings."""
    if q2 <= K:
        return q2 * (K - q2)
    return 0.0


def moments_via_series(q, alpha, tol=1e-12):
    """Moments summed from the power series in |alpha|^2, truncated once a
    geometric tail bound (with measured polynomial growth) falls below tol."""
    x = abs(alpha) ** 2
    if x >= 1:
        raise ValueError("series requires |alpha| < 1")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    q2, q4, q6, q8 = q**2, q**4, q**6, q**8

    r11 = x * q4
    r22 = x**2 * q4
    r1111 = x**2 * q8 + 4 * x * q4 * (1 - x**q2)
    r112 = x**2 * q6 + 2 * q4 * x**q2 * (1 - x)
    c2, c3, c4 = (1 - x) ** 2, (1 - x) ** 3, (1 - x) ** 4

    # single-trace series sum_l x^l min(l+1, q^2): enters r11 and r22
    s_min = 0.0
    l = 0
    while True:
        term = x**l * min(l + 1, q2)
        s_min += term
        l += 1
        if l > q2 and x > 0:
            s_min += term * x / (1 - x)  # exact geometric tail (term flat in l)
            break
        if x == 0:
            break
    r11 += c2 * s_min
    r22 += 4 * x * c2 * s_min

    K = 2
    while True:
        xk = x ** (K - 2)
        qq, qp = _q_four_point(K, q2), _q_three_point(K, q2)
        t22 = c4 * xk * (K - 1) ** 2 * min(K, q2)          # two-trace-squared channel
        t22m = 4 * c3 * x ** (K - 1) * (K - 1) * min(K, q2)  # mixed channel
        t1111 = c3 * xk * ((1 - x) * qq - 4 * x * q2 * qp)
        t112 = c3 * xk * (K - 1 - x * (K + 1)) * qp
        r22 += t22 - t22m
        r1111 += t1111
        r112 += t112
        biggest = max(abs(t22), abs(t22m), abs(t1111), abs(t112))
        # terms grow at most like K^3 x^K; bound the tail geometrically
        ratio = x * ((K + 1) / max(K - 1, 1)) ** 3
        if K > q2 + 4 and ratio < 1 and biggest * ratio / (1 - ratio) < tol:
            break
        if K > 2_000_000:
            raise RuntimeError("series did not converge")
        K += 1
    return MomentSet(r11, r22, r1111, complex(r112), q)


# ---------------------------------------------------------------------------
# coefficients and spectral summary
# ---------------------------------------------------------------------------

def coefficients(m):
    """Map the four moments to the coefficients (a1, a2, a3)."""
    q = m.q
    q2, q4, q6, q8 = q**2, q**4, q**6, q**8
    s = m.r22 + m.r1111 - 4 * m.r11
    re112, im112 = m.r112.real, m.r112.imag
    a1 = (2 * s / (q4 * (q4 - 9))
          - 2 * (q4 - 3) * re112 / (q6 * (q4 - 9))
          - 2j * im112 / (q2 * (q4 - 4)))
    a2 = ((q4 + 6) * s / (q4 * (q4 - 9) * (q4 - 4))
          + (m.r22 - 2) / (q4 - 4)
          - 2 * re112 / (q2 * (q4 - 9)))
    a3 = ((q8 - 8 * q4 + 6) * s / (q4 * (q4 - 9) * (q4 - 4))
          - (m.r22 - 2) / (q4 - 4)
          - 2 * re112 / (q2 * (q4 - 9)))
    return Coefficients(a1=a1, a2=a2, a3=a3, q=q)


def poisson_coefficients(q, alpha):
    """Direct closed-form coefficients for the Poisson kernel."""
    if abs(alpha) > 1 + 1e-15:
        raise ValueError("|alpha| must be <= 1")
    x = abs(alpha) ** 2
    q2, q4 = q**2, q**4
    a1 = (8 * x**2 / (q4 - 9)
          - 2 * (q2 - 1) * x ** (q2 - 1) / (q2 * (q2 - 3))
          + 2 * (q2 + 1) * x ** (q2 + 1) / (q2 * (q2 + 3)))
    a2 = (6 * x**2 * (q4 + 1) / ((q4 - 4) * (q4 - 9))
          - (q2 - 1) * x ** (q2 - 1) / (q2 - 3)
          + 2 * (q4 - 1) * x**q2 / (q4 - 4)
          - (q2 + 1) * x ** (q2 + 1) / (q2 + 3))
    a3 = ((6 + 15 * q4 - 10 * q**8 + q**12) * x**2 / ((q4 - 4) * (q4 - 9))
          - (q2 - 1) * x ** (q2 - 1) / (q2 - 3)
          - 2 * (q4 - 1) * x**q2 / (q4 - 4)
          - (q2 + 1) * x ** (q2 + 1) / (q2 + 3))
    return Coefficients(a1=complex(a1), a2=a2, a3=a3, q=q)


def coefficients_for(spec):
    return coefficients(moments(spec))


@dataclass
class SpectralSummary:
    """Singular values of the pair transition matrix and the binary-relaxation
    time derived from them.  Degeneracies are measured numerically."""

    lambda_plus: float
    lambda_minus: float
    lambda_i: float
    lambda_w: float
    tau_b: float
    degeneracies: tuple = field(default=None)  # (n_unit, n_plus, n_minus, n_i)


_SV_BIN_TOL = 1e-8


def spectral_summary(c, compute_degeneracies=True):
    """Analytic singular values lambda_+/-, lambda_i of the pair transition
    matrix, the relaxation rate lambda_w = max(lambda_+, lambda_i) and
    tau_b = -1/ln(lambda_w) (0 at lambda_w = 0, +inf at lambda_w >= 1).

    The +/- singular values are |a2 + a3 +/- q^2 Re a1| / (q^4 - 1); the
    modulus makes them genuine singular values over the whole parameter
    region.  With compute_degeneracies the q^4 x q^4 matrix is built and its
    numerical singular spectrum binned against {1, l+, l-, li}.
    """
    q = c.q
    d1 = q**4 - 1
    lp = abs(c.a2 + c.a3 + q**2 * c.a1.real) / d1
    lm = abs(c.a2 + c.a3 - q**2 * c.a1.real) / d1
    li = abs(c.a3 - c.a2 + 1j * q**2 * c.a1.imag) / d1
    for name, val in (("lambda_plus", lp), ("lambda_minus", lm), ("lambda_i", li)):
        if val > 1 + 1e-12:
            raise EnsembleValidityError(f"{name} = {val} exceeds 1")
    # snap round-off at the trivial point so tau_b reports +inf there
    lp, lm, li = (1.0 if abs(v - 1) < 1e-12 else v for v in (lp, lm, li))
    lw = max(lp, li)
    if lw <= 0:
        tau = 0.0
    elif lw >= 1:
        tau = math.inf
    else:
        tau = -1.0 / math.log(lw)

    deg = None
    if compute_degeneracies:
        sv = np.linalg.svd(pauli.pair_transition_matrix(c, q).m, compute_uv=False)
        targets = np.array([1.0, lp, lm, li])
        counts = [0, 0, 0, 0]
        for v in sv:
            j = int(np.argmin(np.abs(targets - v)))
            if abs(targets[j] - v) <= _SV_BIN_TOL:
                counts[j] += 1
        deg = tuple(counts)
    return SpectralSummary(lp, lm, li, lw, tau, deg)


# ---------------------------------------------------------------------------
# parameter-space sampler (fixed-conjugacy orbits of Haar-drawn unitaries)
# ---------------------------------------------------------------------------

def fixed_conjugacy_coefficients(q, n_points, seed):
    """Coefficients of n_points fixed-conjugacy ensembles with Haar u0."""
    rng = np.random.default_rng(seed)
    u0s = pauli.haar_batch(q**2, n_points, rng)
    out = []
    for u0 in u0s:
        out.append(coefficients(fixed_moments(q, u0)))
    return out

def sample_parameter_space(q, n_points, seed):
    """Scatter samples of (a2 + a3, Re a1) over fixed-conjugacy ensembles;
    their convex hull is the allowed parameter region."""
    if q not in (2, 3):
        raise ValueError("parameter-space sampling supports q = 2 or 3")
    cs = fixed_conjugacy_coefficients(q, n_points, seed)
    return np.array([[c.a2 + c.a3, c.a1.real] for c in cs])
