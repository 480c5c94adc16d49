"""Generalized Pauli operators for qudits and the exact two-site transition
matrix of the induced classical Markov process.

Single-site operators are labelled by ``a = a1*q + a2`` with ``a1, a2`` in
``Z_q`` (clock-and-shift construction); ``a = 0`` is the identity.  Two-site
labels are flattened as ``a = ax*q**2 + ay``.  This basis is fixed once and
for all: the phase function depends on it.
"""

from dataclasses import dataclass

import numpy as np

from .errors import EnsembleValidityError

# deviation of column/row sums of the pair transition matrix tolerated
# before an ensemble is declared invalid
NEGATIVE_ENTRY_TOL = 1e-12

# exact oracle cap: dense evolution of q**(2L) states stays in milliseconds
MAX_ORACLE_STATES = 2**16


def pauli_split(a, q):
    """Split a single-site label into its (shift, clock) pair."""
    return a // q, a % q


def pauli_join(a1, a2, q):
    return (a1 % q) * q + (a2 % q)


def pair_split(a, q):
    """Split a two-site label into its single-site labels (ax, ay)."""
    return a // q**2, a % q**2


def pair_join(ax, ay, q):
    return ax * q**2 + ay


def pair_negate(a, q):
    """Label of -a, componentwise additive inverse in Z_q x Z_q per site."""
    ax, ay = pair_split(a, q)
    ax1, ax2 = pauli_split(ax, q)
    ay1, ay2 = pauli_split(ay, q)
    return pair_join(pauli_join(-ax1, -ax2, q), pauli_join(-ay1, -ay2, q), q)


def _check_pair_index(a, q, name):
    if not 0 <= a < q**4:
        raise ValueError(f"{name}={a} out of range for q={q}")


def phi_exponent(a, b, q):
    """Integer exponent e (mod q) such that phi(a, b) = -omega**e."""
    _check_pair_index(a, q, "a")
    _check_pair_index(b, q, "b")
    ax, ay = pair_split(a, q)
    bx, by = pair_split(b, q)
    ax1, ax2 = pauli_split(ax, q)
    ay1, ay2 = pauli_split(ay, q)
    bx1, bx2 = pauli_split(bx, q)
    by1, by2 = pauli_split(by, q)
    return (bx1 * ax2 - ax1 * bx2 + by1 * ay2 - ay1 * by2) % q


def phi(a, b, q):
    """Commutation phase of two-site Pauli operators, a unit complex number.

    Sigma_a Sigma_b = -phi(a, b) Sigma_b Sigma_a, and phi(0, b) = -1.
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    return -np.exp(2j * np.pi * phi_exponent(a, b, q) / q)


def sigma_matrix(a, q):
    """Single-site generalized Pauli matrix, q x q, unitary.

    sigma_a = sum_m omega**(m*a2) |m+a1><m| with omega = exp(2 pi i / q).
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    if not 0 <= a < q**2:
        raise ValueError(f"a={a} out of range for q={q}")
    a1, a2 = pauli_split(a, q)
    m = np.arange(q)
    s = np.zeros((q, q), dtype=complex)
    s[(m + a1) % q, m] = np.exp(2j * np.pi * m * a2 / q)
    return s


def pair_sigma_matrix(a, q):
    """Two-site operator Sigma_a = sigma_ax (x) sigma_ay, q^2 x q^2."""
    ax, ay = pair_split(a, q)
    return np.kron(sigma_matrix(ax, q), sigma_matrix(ay, q))


def _phi_real_table(a1, q):
    """Re[a1 * phi(a, b)] for all pairs (a, b), as a q^4 x q^4 real array."""
    idx = np.arange(q**4)
    ax, ay = idx // q**2, idx % q**2
    ax1, ax2 = ax // q, ax % q
    ay1, ay2 = ay // q, ay % q
    expo = (
        ax2[:, None] * ax1[None, :] - ax1[:, None] * ax2[None, :]
        + ay2[:, None] * ay1[None, :] - ay1[:, None] * ay2[None, :]
    ) % q
    ph = -np.exp(2j * np.pi * expo / q)
    return (a1 * ph).real


@dataclass
class PairTransitionMatrix:
    """Doubly stochastic q^4 x q^4 matrix m[a, p] of pair transition
    probabilities; entry [0, 0] is 1 and row/column 0 vanish elsewhere."""

    q: int
    m: np.ndarray
    clamped: int = 0  # number of tiny negative entries clamped to zero


def pair_transition_matrix(coeffs, q=None):
    """Build the exact two-site transition matrix from ensemble coefficients.

    Entries outside the allowed region (below -1e-12) raise
    EnsembleValidityError; tiny negatives are clamped and counted.
    """
    if q is None:
        q = coeffs.q
    d = q**4
    a1, a2, a3 = coeffs.a1, coeffs.a2, coeffs.a3
    base = 1.0 - (a1.real + a2 + a3) / (d - 1)
    m = np.full((d, d), base, dtype=float)
    m += _phi_real_table(a1, q)
    m[np.arange(d), np.arange(d)] += a3
    idx = np.arange(d)
    neg = np.array([pair_negate(p, q) for p in idx])
    m[neg, idx] += a2
    m /= d - 1
    m[0, :] = 0.0
    m[:, 0] = 0.0
    m[0, 0] = 1.0

    lowest = m.min()
    if lowest < -NEGATIVE_ENTRY_TOL:
        raise EnsembleValidityError(
            f"pair transition matrix has entry {lowest:.3e} < -{NEGATIVE_ENTRY_TOL}; "
            "coefficients lie outside the allowed ensemble region"
        )
    clamped = int((m < 0).sum())
    if clamped:
        m[m < 0] = 0.0
    return PairTransitionMatrix(q=q, m=m, clamped=clamped)


# ---------------------------------------------------------------------------
# exact full-chain oracle
# ---------------------------------------------------------------------------

def _apply_pair_matrix(rho, m, x, y, nsite, L):
    """Apply a two-site transition matrix to sites (x, y) of a site-major
    distribution tensor.  rho has L axes of length nsite; updates rho_p =
    sum_a M[a, p] rho_a on the chosen axes."""
    t = np.moveaxis(rho, (x, y), (0, 1))
    shp = t.shape
    t = t.reshape(nsite * nsite, -1)
    t = m.T @ t
    return np.moveaxis(t.reshape(shp), (0, 1), (x, y))


def evolve_full_chain(q, coeffs, L, initial, t_max):
    """Exact evolution of the full Pauli-string distribution on L sites with
    periodic boundaries.

    A layer stepping the chain from time t to t+1 couples sites (x, x+1) for
    x even when t is even, and (x-1, x) for x even when t is odd.  Returns an
    array of shape (t_max+1, q**(2L)) whose rows are the distributions.
    """
    if L % 2:
        raise ValueError("L must be even")
    nstates = q**(2 * L)
    if nstates > MAX_ORACLE_STATES:
        raise ValueError(f"state space q^(2L) = {nstates} exceeds {MAX_ORACLE_STATES}")
    initial = np.asarray(initial, dtype=float)
    if initial.shape != (nstates,):
        raise ValueError("initial distribution has wrong length")

    m = pair_transition_matrix(coeffs, q).m
    nsite = q * q
    out = np.empty((t_max + 1, nstates))
    out[0] = initial
    rho = initial.reshape((nsite,) * L)
    for t in range(t_max):
        if t % 2 == 0:
            pairs = [(x, x + 1) for x in range(0, L, 2)]
        else:
            pairs = [((x - 1) % L, x) for x in range(0, L, 2)]
        for x, y in pairs:
            rho = _apply_pair_matrix(rho, m, x, y, nsite, L)
        out[t + 1] = rho.reshape(-1)
    return out


def single_site_initial(q, L, a, x=0):
    """Delta distribution on the Pauli string with sigma_a at site x."""
    nsite = q * q
    p = a * nsite**(L - 1 - x)
    rho = np.zeros(nsite**L)
    rho[p] = 1.0
    return rho


@dataclass
class BinaryProjection:
    projected: np.ndarray   # B rho, full q^(2L) vector of binary form
    binary: np.ndarray      # projected binary-string distribution, 2^L vector
    distance: float         # || rho - B rho ||_2


def binary_project(rho, q, L):
    """Project a full distribution onto binary form (uniform within each
    non-identity class per site) and report the 2-norm distance."""
    rho = np.asarray(rho, dtype=float)
    nsite = q * q
    t = rho.reshape((nsite,) * L)
    proj = t
    for ax in range(L):
        proj = np.moveaxis(proj, ax, 0)
        shp = proj.shape
        flat = proj.reshape(nsite, -1)
        new = np.empty_like(flat)
        new[0] = flat[0]
        new[1:] = flat[1:].sum(axis=0) / (nsite - 1)
        proj = np.moveaxis(new.reshape(shp), 0, ax)

    # binary-string marginal: sum over the non-identity values per site
    bar = t
    for ax in range(L):
        bar = np.moveaxis(bar, ax, 0)
        shp = bar.shape
        flat = bar.reshape(nsite, -1)
        new = np.empty((2,) + flat.shape[1:])
        new[0] = flat[0]
        new[1] = flat[1:].sum(axis=0)
        bar = np.moveaxis(new.reshape((2,) + shp[1:]), 0, ax)

    pvec = proj.reshape(-1)
    dist = float(np.linalg.norm(rho - pvec))
    return BinaryProjection(projected=pvec, binary=bar.reshape(-1), distance=dist)


# ---------------------------------------------------------------------------
# Haar sampling
# ---------------------------------------------------------------------------

def haar_sample(n, rng):
    """One n x n unitary from the Haar measure (QR with phase fix)."""
    return haar_batch(n, 1, rng)[0]


def haar_batch(n, size, rng):
    """Batch of Haar unitaries, shape (size, n, n)."""
    z = rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))
    qmat, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return qmat * (d / np.abs(d)).conj()[:, None, :]
