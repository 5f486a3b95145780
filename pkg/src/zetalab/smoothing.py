"""Smoothed truncations of the zeta-functions and their torus twists.

The smoothed sums replace the sharp cut-off of a Dirichlet series with the
weights ``exp(-(m/n)**sigma0_star)``; they converge absolutely for
``Re s > 1/2`` and tend to the continued function as ``n`` grows. Twisting by
a torus point multiplies the m-th term by ``omega(m)``, extended
multiplicatively over primes for the Euler-product component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import sparse

from .arith import peel_prime_powers, primes_upto
from .errors import BoundMismatchError, ConvergenceError, DomainError, TruncationError
from .zeta_kernels import DirichletCoefficients, EulerProductSpec, PeriodicSequence, dirichlet_coefficients

DEFAULT_SIGMA0_STAR = 0.6
TAIL_TOL = 1e-8
SAFETY = 2.0
_CHUNK = 1 << 21


@dataclass(frozen=True)
class SmoothingParams:
    n: int
    sigma0_star: float = DEFAULT_SIGMA0_STAR

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("n must be a positive integer")
        if not self.sigma0_star > 0.5:
            raise DomainError("sigma0_star must exceed 1/2")


def weight_v1(m, params: SmoothingParams):
    """exp(-(m/n)**sigma0_star), m >= 1."""
    m = np.asarray(m, dtype=float)
    if np.any(m < 1):
        raise DomainError("v1 is defined for m >= 1")
    out = np.exp(-((m / params.n) ** params.sigma0_star))
    return float(out) if out.ndim == 0 else out


def weight_v2(m, alpha: float, params: SmoothingParams):
    """exp(-((m + alpha)/(n + alpha))**sigma0_star), m >= 0."""
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    m = np.asarray(m, dtype=float)
    if np.any(m < 0):
        raise DomainError("v2 is defined for m >= 0")
    out = np.exp(-(((m + alpha) / (params.n + alpha)) ** params.sigma0_star))
    return float(out) if out.ndim == 0 else out


def truncation_length(params: SmoothingParams, alpha: float = 0.0, tol: float = TAIL_TOL) -> int:
    """Terms needed so that the weight has decayed far below ``tol``.

    The weight reaches ``tol`` at m = n * ln(1/tol)**(1/sigma0_star); the
    safety factor 2 pushes the cut to where it is ``tol**(2**sigma0_star)``.
    """
    reach = (params.n + alpha) * math.log(1 / tol) ** (1 / params.sigma0_star)
    return int(math.ceil(SAFETY * reach)) + 10


# --------------------------------------------------------------------------
# torus points
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TorusPoint:
    """Finite piece of a point of the product torus.

    ``angles1[i]`` is the angle (in turns, [0, 1)) at the i-th prime up to
    ``P_max``; ``angles2[j, m]`` the angle of the j-th Hurwitz torus at index
    m = 0..M_max. Values are exp(2 pi i angle); composite indices of the
    prime torus are never stored, only computed.
    """

    P_max: int
    M_max: int
    angles1: np.ndarray
    angles2: np.ndarray

    def __post_init__(self):
        a1 = np.mod(np.asarray(self.angles1, dtype=float), 1.0)
        a2 = np.mod(np.asarray(self.angles2, dtype=float), 1.0)
        if a2.ndim != 2:
            raise DomainError("angles2 must be a 2-d array (rows x (M_max+1))")
        if a1.size != primes_upto(self.P_max).size or a2.shape[1] != self.M_max + 1:
            raise BoundMismatchError("angle arrays do not match the bounds")
        for arr in (a1, a2):
            arr.flags.writeable = False
        object.__setattr__(self, "angles1", a1)
        object.__setattr__(self, "angles2", a2)

    @property
    def primes(self) -> np.ndarray:
        return primes_upto(self.P_max)

    @property
    def rows(self) -> int:
        return self.angles2.shape[0]

    @property
    def omega1(self) -> np.ndarray:
        return np.exp(2j * np.pi * self.angles1)

    @property
    def omega2(self) -> np.ndarray:
        return np.exp(2j * np.pi * self.angles2)

    def omega1_at(self, p: int) -> complex:
        primes = self.primes
        i = int(np.searchsorted(primes, p))
        if i >= primes.size or primes[i] != p:
            raise BoundMismatchError(f"{p} is not a stored prime (P_max={self.P_max})")
        return complex(np.exp(2j * np.pi * self.angles1[i]))

    def omega1_extended(self, K: int) -> np.ndarray:
        """omega1(m) for m = 1..K by multiplicative extension."""
        return np.exp(2j * np.pi * extended_angles(self.angles1[None, :], K, self.P_max)[0])

    def __eq__(self, other):
        return (
            isinstance(other, TorusPoint)
            and self.P_max == other.P_max
            and self.M_max == other.M_max
            and np.array_equal(self.angles1, other.angles1)
            and np.array_equal(self.angles2, other.angles2)
        )

    def to_dict(self, explicit: bool = False, seed: int | None = None) -> dict:
        out = {"P_max": self.P_max, "M_max": self.M_max, "rows": self.rows}
        if seed is not None:
            out["seed"] = seed
        if explicit or seed is None:
            out["angles1"] = self.angles1.tolist()
            out["angles2"] = self.angles2.tolist()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "TorusPoint":
        if "angles1" in d:
            return cls(d["P_max"], d["M_max"], np.array(d["angles1"]), np.array(d["angles2"]).reshape(d["rows"], -1))
        return sample_omega(d["seed"], d["P_max"], d["M_max"], d["rows"])


@lru_cache(maxsize=8)
def exponent_matrix(K: int) -> sparse.csr_matrix:
    """Sparse E with E[m-1, i] = exponent of the i-th prime in m, m <= K."""
    primes = primes_upto(K)
    rows, cols, vals = [], [], []
    for idx, p, e in peel_prime_powers(K):
        rows.append(idx - 1)
        cols.append(np.searchsorted(primes, p))
        vals.append(e)
    if rows:
        r, c, v = (np.concatenate(x) for x in (rows, cols, vals))
    else:
        r = c = v = np.zeros(0, dtype=np.int64)
    return sparse.csr_matrix((v.astype(float), (r, c)), shape=(K, primes.size))


def extended_angles(angles1: np.ndarray, K: int, P_max: int) -> np.ndarray:
    """Angles of omega1(m), m = 1..K, for a batch of prime-angle rows."""
    need = primes_upto(K).size
    if K > 1 and P_max < int(primes_upto(K)[-1]):
        raise BoundMismatchError(f"twist needs primes up to {K}, torus stops at {P_max}")
    E = exponent_matrix(K)
    return np.mod((E @ angles1[:, :need].T).T, 1.0)


def sample_omega_angles(seed: int, count: int, P_max: int, M_max: int, rows: int, start: int = 0):
    """Haar samples ``start..start+count-1`` as angle arrays.

    Sample i draws from the i-th spawned child of ``SeedSequence(seed)``, so
    it does not depend on how the samples are batched.
    """
    nprimes = primes_upto(P_max).size
    a1 = np.empty((count, nprimes))
    a2 = np.empty((count, rows, M_max + 1))
    children = np.random.SeedSequence(seed).spawn(start + count)[start:]
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        a1[i] = rng.random(nprimes)
        a2[i] = rng.random((rows, M_max + 1))
    return a1, a2


def sample_omega(seed: int, P_max: int, M_max: int, r: int) -> TorusPoint:
    """Haar-random torus point: independent uniform angles per coordinate."""
    if min(P_max, M_max, r) < 1:
        raise DomainError("bounds must be at least 1")
    a1, a2 = sample_omega_angles(seed, 1, P_max, M_max, r)
    return TorusPoint(P_max, M_max, a1[0], a2[0])


# --------------------------------------------------------------------------
# smoothed sums
# --------------------------------------------------------------------------


def _weighted_sum(s_flat: np.ndarray, weights: np.ndarray, logs: np.ndarray) -> np.ndarray:
    out = np.zeros(s_flat.shape, dtype=complex)
    for i, si in enumerate(s_flat):
        acc = 0j
        for start in range(0, logs.size, _CHUNK):
            sl = slice(start, start + _CHUNK)
            acc += np.sum(weights[sl] * np.exp(-si * logs[sl]))
        out[i] = acc
    return out


def _points(s):
    arr = np.asarray(s, dtype=complex)
    if np.any(arr.real <= 0.5):
        raise ConvergenceError("smoothed sums are used for Re s > 1/2")
    return arr.reshape(-1), arr.ndim == 0, np.shape(s)


def phi_n(
    s,
    spec: EulerProductSpec,
    params: SmoothingParams,
    omega: TorusPoint | None = None,
    K: int | None = None,
    coeffs: DirichletCoefficients | None = None,
):
    """sum_{m<=K} c_m omega1(m) v1(m, n) m**-s."""
    flat, scalar, shape = _points(s)
    required = truncation_length(params)
    K = required if K is None else int(K)
    if K < required:
        raise TruncationError(f"K={K} below the required truncation {required}")
    if coeffs is None:
        coeffs = dirichlet_coefficients(spec, K)
    elif coeffs.K < K:
        raise TruncationError(f"coefficient table stops at {coeffs.K} < {K}")
    m = np.arange(1, K + 1, dtype=float)
    w = coeffs.values[:K] * weight_v1(m, params)
    if omega is not None:
        w = w * omega.omega1_extended(K)
    vals = _weighted_sum(flat, w, np.log(m))
    return complex(vals[0]) if scalar else vals.reshape(shape)


def zeta_n(
    s,
    alpha: float,
    B: PeriodicSequence,
    params: SmoothingParams,
    omega_j: np.ndarray | None = None,
    M: int | None = None,
):
    """sum_{0<=m<=M} b_m omega_j(m) v2(m, n, alpha) (m + alpha)**-s.

    ``omega_j`` is one row of unit values indexed by m (e.g. ``point.omega2[j]``).
    """
    flat, scalar, shape = _points(s)
    required = truncation_length(params, alpha)
    M = required if M is None else int(M)
    if M < required:
        raise TruncationError(f"M={M} below the required truncation {required}")
    m = np.arange(M + 1, dtype=float)
    w = B.values(M + 1) * weight_v2(m, alpha, params)
    if omega_j is not None:
        omega_j = np.asarray(omega_j)
        if omega_j.size < M + 1:
            raise BoundMismatchError(f"omega row has {omega_j.size} entries, need {M + 1}")
        w = w * omega_j[: M + 1]
    vals = _weighted_sum(flat, w, np.log(m + alpha))
    return complex(vals[0]) if scalar else vals.reshape(shape)
