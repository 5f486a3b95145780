"""Hurwitz, periodic Hurwitz and Euler-product zeta evaluators.

All evaluators work in binary64 complex arithmetic. Powers ``(m + a)**(-s)``
are always formed as ``exp(-s * log(m + a))`` with the real logarithm of the
positive base, so there is no branch ambiguity.

Analytic continuation of the Hurwitz zeta-function uses Euler-Maclaurin
summation: a direct head of ``M`` terms, the integral and boundary terms, and
twelve Bernoulli corrections. The head length is ``M = max(ceil|t| + 10, 20)``
(see :func:`em_cutoff`), so ``|s| / (2 pi M)`` stays near ``1/(2 pi)`` and the
first omitted correction is far below the 1e-10 target for ``sigma >= 0.4``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.special import bernoulli, factorial

from .arith import peel_prime_powers, primes_upto
from .errors import (
    ConvergenceError,
    DomainError,
    PoleError,
    QuadratureWarning,
    TruncationError,
    TruncationWarning,
)

EM_ORDER = 12
# B_{2k} / (2k)!  for k = 1..EM_ORDER
_BERNOULLI_RATIOS = tuple(
    float(bernoulli(2 * EM_ORDER)[2 * k] / factorial(2 * k, exact=True))
    for k in range(1, EM_ORDER + 1)
)


@dataclass(frozen=True)
class StripRegion:
    """Vertical strip ``sigma_lo < Re s < sigma_hi`` cut at ``|Im s| < t_bound``."""

    sigma_lo: float
    sigma_hi: float
    t_bound: float = math.inf

    def __post_init__(self):
        if not self.sigma_lo < self.sigma_hi:
            raise DomainError("strip needs sigma_lo < sigma_hi")
        if not self.t_bound > 0:
            raise DomainError("strip needs t_bound > 0")

    def contains(self, s: complex, margin: float = 0.0) -> bool:
        return (
            self.sigma_lo + margin <= s.real <= self.sigma_hi - margin
            and abs(s.imag) <= self.t_bound - margin
        )


@dataclass(frozen=True)
class PeriodicSequence:
    """One period ``b_0..b_{l-1}`` of a periodic coefficient sequence.

    The period is the minimal one unless ``check_minimal=False`` is passed,
    which exists only for consistency experiments with repeated periods.
    """

    coeffs: tuple[complex, ...]
    check_minimal: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if not coeffs:
            raise DomainError("periodic sequence needs at least one value")
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in coeffs):
            raise DomainError("periodic sequence values must be finite")
        if all(c == 0 for c in coeffs):
            raise DomainError("periodic sequence must not vanish identically")
        if self.check_minimal:
            l = len(coeffs)
            for d in range(1, l):
                if l % d == 0 and all(coeffs[i] == coeffs[i % d] for i in range(l)):
                    raise DomainError(
                        f"period {l} is not minimal: sequence is {d}-periodic"
                    )

    @property
    def period(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, m: int) -> complex:
        return self.coeffs[m % len(self.coeffs)]

    def values(self, count: int) -> np.ndarray:
        """``b_0..b_{count-1}`` as a complex array."""
        reps = -(-count // self.period)
        return np.tile(np.asarray(self.coeffs, dtype=complex), reps)[:count]


@dataclass(frozen=True)
class LocalFactor:
    """Local Euler factor prod_j (1 - a_j x**f_j)**-1 in the variable x = p**-s."""

    exponents: tuple[int, ...]
    coeffs: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(int(f) for f in self.exponents))
        object.__setattr__(self, "coeffs", tuple(complex(a) for a in self.coeffs))
        if len(self.exponents) != len(self.coeffs) or not self.exponents:
            raise DomainError("local factor needs matching, nonempty exponents/coeffs")
        if any(f < 1 for f in self.exponents):
            raise DomainError("local factor exponents f(j,m) must be positive")

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def series(self, order: int) -> np.ndarray:
        """Power-series coefficients of the factor in x up to x**order."""
        q = np.zeros(order + 1, dtype=complex)
        q[0] = 1.0
        for f, a in zip(self.exponents, self.coeffs):
            # divide by (1 - a x**f):  q[i] += a q[i-f]
            for i in range(f, order + 1):
                q[i] += a * q[i - f]
        return q

    def value(self, x: np.ndarray) -> np.ndarray:
        out = np.ones_like(x, dtype=complex)
        for f, a in zip(self.exponents, self.coeffs):
            out = out / (1.0 - a * x**f)
        return out


@dataclass(frozen=True)
class EulerProductSpec:
    """Data of a polynomial Euler product, in the shifted normalisation.

    ``factors`` maps explicit primes to their local factor; ``default`` (if
    given) applies to every other prime, otherwise only primes up to
    ``prime_bound`` are covered. ``continuation`` optionally names a known
    meromorphic continuation (``("zeta_power", g)`` means zeta(s)**g).
    """

    label: str
    growth_alpha: float = 0.0
    growth_beta: float = 0.0
    factors: tuple[tuple[int, LocalFactor], ...] = ()
    default: LocalFactor | None = None
    prime_bound: int | None = None
    c1: float = 1.0
    sigma_star: float | None = None
    continuation: tuple[str, int] | None = None
    notes: str = ""

    def __post_init__(self):
        if self.growth_alpha < 0 or self.growth_beta < 0:
            raise DomainError("growth constants must be non-negative")
        if self.c1 <= 0:
            raise DomainError("C1 must be positive")
        for p, lf in self.factors:
            if lf.degree > self.c1 * p**self.growth_alpha + 1e-12:
                raise DomainError(f"degree g at p={p} exceeds C1 p^alpha")
            if any(abs(a) > p**self.growth_beta * (1 + 1e-12) for a in lf.coeffs):
                raise DomainError(f"|a_m^(j)| exceeds p^beta at p={p}")

    @property
    def shift(self) -> float:
        return self.growth_alpha + self.growth_beta

    def covers(self, p: int) -> bool:
        return self.default is not None or any(q == p for q, _ in self.factors)

    def factor(self, p: int) -> LocalFactor:
        for q, lf in self.factors:
            if q == p:
                return lf
        if self.default is None:
            raise TruncationError(f"spec '{self.label}' has no local factor at p={p}")
        return self.default


@dataclass(frozen=True)
class DirichletCoefficients:
    """Coefficients c_1..c_K of the shifted Dirichlet series."""

    values: np.ndarray
    K: int

    def __post_init__(self):
        if len(self.values) != self.K or self.K < 1:
            raise DomainError("coefficient table length must equal K >= 1")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("coefficients must be finite")

    def __getitem__(self, k: int) -> complex:
        return complex(self.values[k - 1])


def riemann_spec() -> EulerProductSpec:
    return EulerProductSpec(
        label="riemann",
        default=LocalFactor((1,), (1.0,)),
        sigma_star=0.5,
        continuation=("zeta_power", 1),
        notes="zeta(s); sigma* = 1/2",
    )


def zeta_power_spec(g: int) -> EulerProductSpec:
    """zeta(s)**g, local factor (1 - p**-s)**-g; kappa = g**2."""
    return EulerProductSpec(
        label=f"zeta^{g}",
        default=LocalFactor((1,) * g, (1.0,) * g),
        c1=float(g),
        sigma_star=0.5,
        continuation=("zeta_power", g),
        notes=f"zeta(s)^{g}",
    )


# --------------------------------------------------------------------------
# Hurwitz zeta via Euler-Maclaurin
# --------------------------------------------------------------------------


def em_cutoff(t_abs: float) -> int:
    """Head length M for Euler-Maclaurin at height ``|t| = t_abs``."""
    return max(int(math.ceil(t_abs)) + 10, 20)


def _em_corrections(s: np.ndarray, u: float) -> np.ndarray:
    """Boundary term plus Bernoulli corrections at u = M + a (no integral term)."""
    logu = math.log(u)
    upow = np.exp(-s * logu)
    out = 0.5 * upow
    upow = upow / u
    poch = s.copy()
    for k, ratio in enumerate(_BERNOULLI_RATIOS, start=1):
        out = out + ratio * poch * upow
        poch = poch * (s + 2 * k - 1) * (s + 2 * k)
        upow = upow / (u * u)
    return out


def _exprel(z: np.ndarray) -> np.ndarray:
    """(exp(z) - 1) / z, accurate near z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    big = np.expm1(zs) / zs
    series = 1 + z / 2 + z * z / 6 + z**3 / 24
    return np.where(small, series, big)


def _check_a(a: float) -> float:
    a = float(a)
    if not 0 < a <= 1:
        raise DomainError(f"Hurwitz parameter must lie in (0, 1], got {a}")
    return a


def _hurwitz_core(s: np.ndarray, a: float, regular: bool) -> np.ndarray:
    """Vectorised Euler-Maclaurin; ``regular`` drops the 1/(s-1) pole part."""
    out = np.empty(s.shape, dtype=complex)
    order = np.argsort(np.abs(s.imag), kind="stable")
    for start in range(0, order.size, 64):
        idx = order[start : start + 64]
        M = em_cutoff(float(np.max(np.abs(s[idx].imag))))
        logs = np.log(np.arange(M, dtype=float) + a)
        ss = s[idx]
        head = np.sum(np.exp(-np.outer(ss, logs)), axis=1)
        u = M + a
        integral = -math.log(u) * _exprel((1 - ss) * math.log(u))
        if not regular:
            integral = integral + 1 / (ss - 1)
        out[idx] = head + integral + _em_corrections(ss, u)
    return out


def _as_points(s) -> tuple[np.ndarray, bool]:
    arr = np.asarray(s, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise DomainError("complex points must be finite")
    return arr.reshape(-1), arr.ndim == 0


def hurwitz_zeta(s, a: float):
    """Hurwitz zeta sum_{m>=0} (m + a)**-s, continued to s != 1.

    Accepts a scalar or an array of points; returns the same shape.
    """
    a = _check_a(a)
    flat, scalar = _as_points(s)
    if np.any(flat == 1):
        raise PoleError("Hurwitz zeta has a pole at s = 1")
    vals = _hurwitz_core(flat, a, regular=False)
    return complex(vals[0]) if scalar else vals.reshape(np.shape(s))


def hurwitz_zeta_regular(s, a: float):
    """zeta(s, a) - 1/(s - 1); entire in s."""
    a = _check_a(a)
    flat, scalar = _as_points(s)
    vals = _hurwitz_core(flat, a, regular=True)
    return complex(vals[0]) if scalar else vals.reshape(np.shape(s))


def residue_b(B: PeriodicSequence) -> complex:
    """Mean of one period: the residue at s = 1 of zeta(s, alpha; B)."""
    return sum(B.coeffs) / B.period


def periodic_hurwitz_zeta(s, alpha: float, B: PeriodicSequence):
    """zeta(s, alpha; B) = l**-s sum_q b_q zeta(s, (q + alpha)/l)."""
    alpha = _check_a(alpha)
    flat, scalar = _as_points(s)
    l = B.period
    b = residue_b(B)
    scale = np.exp(-flat * math.log(l))
    total = np.zeros(flat.shape, dtype=complex)
    if b != 0:
        if np.any(flat == 1):
            raise PoleError("pole at s = 1 (nonzero residue)")
        for q, bq in enumerate(B.coeffs):
            if bq != 0:
                total += bq * _hurwitz_core(flat, (q + alpha) / l, regular=False)
    else:
        # the pole parts cancel exactly since sum b_q = 0
        for q, bq in enumerate(B.coeffs):
            if bq != 0:
                total += bq * _hurwitz_core(flat, (q + alpha) / l, regular=True)
    vals = scale * total
    return complex(vals[0]) if scalar else vals.reshape(np.shape(s))


# --------------------------------------------------------------------------
# Shifted block evaluation: values at grid + i*tau_k for aligned runs of k
# --------------------------------------------------------------------------


def phase_matrix(logs: np.ndarray, k0: int, count: int, step: float) -> np.ndarray:
    """P[j, m] = exp(-i (k0 + j) step logs[m]) for j < count.

    The first row is exponentiated directly and later rows by repeated
    multiplication; the result depends only on (k0, count, step).
    """
    base = np.exp(-1j * (k0 * step) * logs)
    if count == 1:
        return base[None, :]
    rot = np.exp(-1j * step * logs)
    powers = np.empty((count, logs.size), dtype=complex)
    powers[0] = 1.0
    powers[1:] = rot
    np.cumprod(powers, axis=0, out=powers)
    return powers * base


def hurwitz_shift_block(
    grid: np.ndarray, a: float, k0: int, count: int, step: float, regular: bool = False
) -> np.ndarray:
    """zeta(g + i k step, a) for k = k0..k0+count-1 and every grid point g.

    Returns an array of shape (count, len(grid)).
    """
    grid = np.asarray(grid, dtype=complex)
    taus = (k0 + np.arange(count)) * step
    t_max = float(np.max(np.abs(grid.imag)) + np.max(np.abs(taus)))
    M = em_cutoff(t_max)
    logs = np.log(np.arange(M, dtype=float) + a)
    A = np.exp(-np.outer(grid, logs))
    head = phase_matrix(logs, k0, count, step) @ A.T
    s = grid[None, :] + 1j * taus[:, None]
    if np.any(s == 1) and not regular:
        raise PoleError("shifted grid hits s = 1")
    u = M + a
    integral = -math.log(u) * _exprel((1 - s) * math.log(u))
    if not regular:
        integral = integral + 1 / (s - 1)
    return head + integral + _em_corrections(s, u)


def periodic_shift_block(
    grid: np.ndarray, alpha: float, B: PeriodicSequence, k0: int, count: int, step: float
) -> np.ndarray:
    l = B.period
    regular = residue_b(B) == 0
    taus = (k0 + np.arange(count)) * step
    s = np.asarray(grid, dtype=complex)[None, :] + 1j * taus[:, None]
    total = np.zeros(s.shape, dtype=complex)
    for q, bq in enumerate(B.coeffs):
        if bq != 0:
            total += bq * hurwitz_shift_block(grid, (q + alpha) / l, k0, count, step, regular)
    return np.exp(-s * math.log(l)) * total


def dirichlet_shift_block(
    grid: np.ndarray, weights: np.ndarray, logs: np.ndarray, k0: int, count: int, step: float
) -> np.ndarray:
    """sum_m weights[m] exp(-(g + i k step) logs[m]) for a run of k."""
    A = weights[None, :] * np.exp(-np.outer(np.asarray(grid, dtype=complex), logs))
    return phase_matrix(logs, k0, count, step) @ A.T


# --------------------------------------------------------------------------
# Euler products and Dirichlet coefficients
# --------------------------------------------------------------------------


def _check_coverage(spec: EulerProductSpec, primes: np.ndarray) -> None:
    if spec.default is not None:
        return
    explicit = {p for p, _ in spec.factors}
    missing = [int(p) for p in primes if int(p) not in explicit]
    if missing:
        raise TruncationError(
            f"spec '{spec.label}' lacks local factors at primes {missing[:5]}"
        )


def _is_trivial_zeta_power(spec: EulerProductSpec) -> bool:
    d = spec.default
    return (
        not spec.factors
        and d is not None
        and d.degree == 1
        and d.exponents == (1,)
        and d.coeffs == (1 + 0j,)
    )


@lru_cache(maxsize=4)
def _dirichlet_coefficients_cached(spec: EulerProductSpec, K: int) -> np.ndarray:
    primes = primes_upto(K)
    _check_coverage(spec, primes)
    if _is_trivial_zeta_power(spec):
        c = np.ones(K + 1, dtype=complex)
    else:
        emax = max(1, int(math.log2(K)) + 1) if K > 1 else 1
        explicit = dict(spec.factors)
        default_series = spec.default.series(emax) if spec.default is not None else None
        special = {p: lf.series(emax) for p, lf in explicit.items() if p <= K}
        c = np.ones(K + 1, dtype=complex)
        for idx, p, e in peel_prime_powers(K):
            if default_series is not None:
                coef = default_series[e]
            else:
                coef = np.zeros(idx.size, dtype=complex)
            for q, ser in special.items():
                hit = p == q
                if hit.any():
                    coef = np.where(hit, ser[e], coef)
            c[idx] *= coef
    c[0] = 0
    if spec.shift:
        k = np.arange(1, K + 1, dtype=float)
        c[1:] *= np.exp(-spec.shift * np.log(k))
    c.flags.writeable = False
    return c


def dirichlet_coefficients(spec: EulerProductSpec, K: int) -> DirichletCoefficients:
    """Expand the Euler product into c_1..c_K of the shifted Dirichlet series.

    Each local factor is expanded in powers of p**-s; c_k is the product of
    the prime-power coefficients of k, then scaled by k**-(alpha + beta).
    """
    K = int(K)
    if K < 1:
        raise DomainError("K must be a positive integer")
    c = _dirichlet_coefficients_cached(spec, K)
    return DirichletCoefficients(values=c[1:], K=K)


def euler_tail_bound(spec: EulerProductSpec, sigma: float, P: int) -> float:
    """Rough bound on |log| of the omitted factors p > P (growth constants)."""
    if sigma <= 1:
        return math.inf
    P = max(P, 2)
    return spec.c1 * 2 * P ** (1 - sigma) / ((sigma - 1) * math.log(P))


def dirichlet_tail_bound(spec: EulerProductSpec, sigma: float, K: int) -> float:
    """Estimate of sum_{k>K} |c_k| k**-sigma assuming |c_k| <= k**eps."""
    if sigma <= 1:
        return math.inf
    eps = min(0.1, (sigma - 1) / 2)
    g = max([spec.default.degree if spec.default else 1] + [lf.degree for _, lf in spec.factors])
    return g * K ** (1 - sigma + eps) / (sigma - 1 - eps)


def matsumoto_eval(
    spec: EulerProductSpec,
    s,
    mode: str = "euler_product",
    cutoff: int = 100_000,
    tol: float = 1e-8,
):
    """phi(s) for Re s > 1 via the Euler product (primes <= cutoff) or the
    Dirichlet sum (k <= cutoff). Warns when the estimated tail exceeds tol."""
    flat, scalar = _as_points(s)
    sigma = float(np.min(flat.real))
    if sigma <= 1:
        raise ConvergenceError("Euler product / Dirichlet series need Re s > 1")
    if mode == "euler_product":
        primes = primes_upto(int(cutoff))
        _check_coverage(spec, primes)
        logp = np.log(primes.astype(float))
        vals = np.ones(flat.shape, dtype=complex)
        explicit = dict(spec.factors)
        for i, si in enumerate(flat):
            x = np.exp(-(si + spec.shift) * logp)
            if spec.default is not None:
                fac = spec.default.value(x)
            else:
                fac = np.ones_like(x)
            for p, lf in explicit.items():
                j = np.searchsorted(primes, p)
                if j < primes.size and primes[j] == p:
                    fac[j] = lf.value(x[j : j + 1])[0]
            vals[i] = np.prod(fac)
        bound = euler_tail_bound(spec, sigma, int(cutoff)) * np.max(np.abs(vals))
    elif mode == "dirichlet_sum":
        K = int(cutoff)
        c = dirichlet_coefficients(spec, K).values
        logk = np.log(np.arange(1, K + 1, dtype=float))
        vals = np.array(
            [np.sum(c * np.exp(-si * logk)) for si in flat], dtype=complex
        )
        bound = dirichlet_tail_bound(spec, sigma, K)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    if bound > tol:
        warnings.warn(
            f"estimated truncation tail {bound:.3g} exceeds {tol:g}", TruncationWarning,
            stacklevel=2,
        )
    return complex(vals[0]) if scalar else vals.reshape(np.shape(s))


def continued_evaluator(spec: EulerProductSpec) -> Callable:
    """Evaluator of phi in the critical strip for specs with a known continuation."""
    if spec.continuation is None:
        raise DomainError(f"spec '{spec.label}' has no implemented continuation")
    kind, power = spec.continuation
    if kind != "zeta_power" or spec.shift:
        raise DomainError(f"unsupported continuation {spec.continuation!r}")

    def evaluate(s):
        return hurwitz_zeta(s, 1.0) ** power

    return evaluate


# --------------------------------------------------------------------------
# Diagnostics
# --------------------------------------------------------------------------


def _call_vectorised(evaluator: Callable, pts: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(evaluator(pts), dtype=complex)
        if vals.shape == pts.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.array([complex(evaluator(complex(p))) for p in pts], dtype=complex)


def mean_square_on_line(
    evaluator: Callable, sigma0: float, T: float, steps: int, rtol: float = 1e-3
) -> float:
    """(1/T) int_0^T |F(sigma0 + it)|^2 dt by composite Simpson.

    ``steps`` is the number of Simpson panels (two subintervals each). A
    QuadratureWarning is raised when the sampled integrand swings by more than
    half its overall range inside a single panel, or when halving the panel
    count moves the result by more than ``rtol`` relatively.
    """
    if steps < 100:
        raise DomainError("mean_square_on_line needs at least 100 panels")
    if T <= 0:
        raise DomainError("T must be positive")
    t = np.linspace(0.0, T, 2 * steps + 1)
    vals = _call_vectorised(evaluator, sigma0 + 1j * t)
    y = np.abs(vals) ** 2
    fine = simpson(y, x=t)
    coarse = simpson(y[::2], x=t[::2])
    spread = float(y.max() - y.min())
    panels = np.lib.stride_tricks.sliding_window_view(y, 3)[::2]
    swing = float(np.max(panels.max(axis=1) - panels.min(axis=1)))
    if spread > 1e-12 * max(1.0, float(y.max())) and swing > 0.5 * spread:
        warnings.warn(
            f"integrand swings {swing:.3g} within one panel (range {spread:.3g})",
            QuadratureWarning,
            stacklevel=2,
        )
    elif abs(fine - coarse) > rtol * abs(fine):
        warnings.warn(
            f"Simpson panels too coarse: fine={fine:.6g}, half={coarse:.6g}",
            QuadratureWarning,
            stacklevel=2,
        )
    return float(fine / T)


def steuding_kappa(
    coeffs: DirichletCoefficients, spec: EulerProductSpec | None = None, x: float = 100
) -> float:
    """(1/pi(x)) sum_{p<=x} |a(p)|^2 with a(p) the prime Dirichlet coefficients."""
    if x < 2:
        raise DomainError("x must be at least 2")
    primes = primes_upto(int(x))
    if primes[-1] > coeffs.K:
        raise TruncationError(f"coefficients only reach K={coeffs.K} < {primes[-1]}")
    ap = coeffs.values[primes - 1]
    return float(np.sum(np.abs(ap) ** 2) / primes.size)


def mean_square_table(
    evaluator: Callable, sigma0: float, Ts: Iterable[float], panels_per_unit: float = 10
) -> list[tuple[float, float]]:
    """(T, mean square) rows for an empirical O(T) check."""
    return [
        (float(T), mean_square_on_line(evaluator, sigma0, T, max(100, int(T * panels_per_unit))))
        for T in Ts
    ]
