"""Torus dynamics behind the discrete shifts.

The shift s -> s + i k h acts on the coefficients of the Dirichlet series as
multiplication by the torus point (p^{-ikh1}, (m + alpha_j)^{-ikh2}). This
module builds those points, the rotation that advances k by one, Weyl sums
and discrepancies for equidistribution, and a moment comparison between the
shifted smoothed functions and their Haar-random counterparts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .arith import primes_upto
from .errors import BoundMismatchError, DomainError
from .parameters import HurwitzCollection
from .smoothing import (
    SmoothingParams,
    TorusPoint,
    extended_angles,
    sample_omega_angles,
    truncation_length,
    weight_v1,
    weight_v2,
)
from .zeta_kernels import EulerProductSpec, dirichlet_coefficients, dirichlet_shift_block

TWO_PI = 2 * math.pi
_BLOCK = 128
_MC_BATCH = 256
_SPLIT = 2**26


def frac_multiple(k, f) -> np.ndarray:
    """(k * f) mod 1 without losing the low bits of k * f.

    f is split as n / 2**26 + rest with integer n; k * n is formed exactly in
    int64 (fine for k * f < 2**37), so only the small ``k * rest`` is rounded.
    """
    k = np.asarray(k)
    f = np.asarray(f, dtype=float)
    n = np.round(f * _SPLIT).astype(np.int64)
    rest = f - n / _SPLIT
    whole = np.mod(np.multiply.outer(k.astype(np.int64), n), _SPLIT) / _SPLIT
    return np.mod(whole + np.multiply.outer(k.astype(float), rest), 1.0)


def _frequencies(collection: HurwitzCollection, P_max: int, M_max: int):
    """Turns per unit k of every stored coordinate: h log(x) / 2pi."""
    f1 = collection.h1 * np.log(primes_upto(P_max)) / TWO_PI
    m = np.arange(M_max + 1, dtype=float)
    f2 = np.array([h * np.log(m + a) / TWO_PI for _, a, h in collection.torus_rows()])
    return f1, f2


def trajectory_point(k: int, collection: HurwitzCollection, P_max: int, M_max: int) -> TorusPoint:
    """Torus point reached after k shifts: p^{-ikh1} and (m + alpha_j)^{-ikh2}."""
    if min(P_max, M_max) < 1 or k < 0:
        raise DomainError("bounds must be >= 1 and k >= 0")
    f1, f2 = _frequencies(collection, P_max, M_max)
    return TorusPoint(P_max, M_max, -frac_multiple(k, f1), -frac_multiple(k, f2))


def rotate(point: TorusPoint, collection: HurwitzCollection) -> TorusPoint:
    """Multiply by the one-step element (k = 1)."""
    if point.rows != len(collection.torus_rows()):
        raise BoundMismatchError(f"point has {point.rows} Hurwitz rows, collection needs {len(collection.torus_rows())}")
    step = trajectory_point(1, collection, point.P_max, point.M_max)
    return TorusPoint(point.P_max, point.M_max, point.angles1 + step.angles1, point.angles2 + step.angles2)


def identity_point(collection: HurwitzCollection, P_max: int, M_max: int) -> TorusPoint:
    return trajectory_point(0, collection, P_max, M_max)


# --------------------------------------------------------------------------
# characters and Weyl sums
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CharacterIndex:
    """Exponents of a torus character.

    ``k_p`` maps primes to exponents; ``l_mj`` maps (m, row) to exponents,
    where row indexes the Hurwitz torus rows of the collection (0-based).
    """

    k_p: dict = field(default_factory=dict)
    l_mj: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "k_p", {int(p): int(e) for p, e in self.k_p.items() if e})
        object.__setattr__(self, "l_mj", {(int(m), int(j)): int(e) for (m, j), e in self.l_mj.items() if e})

    @property
    def trivial(self) -> bool:
        return not self.k_p and not self.l_mj

    def theta(self, collection: HurwitzCollection) -> float:
        """theta with chi(trajectory_point(k)) = exp(-i k theta)."""
        rows = collection.torus_rows()
        out = collection.h1 * sum(e * math.log(p) for p, e in self.k_p.items())
        for (m, j), e in self.l_mj.items():
            _, a, h = rows[j]
            out += h * e * math.log(m + a)
        return out

    def __call__(self, point: TorusPoint) -> complex:
        primes = point.primes
        turns = 0.0
        for p, e in self.k_p.items():
            i = int(np.searchsorted(primes, p))
            if i >= primes.size or primes[i] != p:
                raise BoundMismatchError(f"character uses p={p} beyond P_max={point.P_max}")
            turns += e * point.angles1[i]
        for (m, j), e in self.l_mj.items():
            if m > point.M_max or j >= point.rows:
                raise BoundMismatchError(f"character uses (m={m}, row={j}) outside the point")
            turns += e * point.angles2[j, m]
        return complex(np.exp(2j * np.pi * (turns % 1.0)))


def _character_turns(chi: CharacterIndex, collection: HurwitzCollection, ks: np.ndarray) -> np.ndarray:
    """Angle of chi at trajectory_point(k) for every k, built coordinatewise."""
    rows = collection.torus_rows()
    h1 = collection.h1
    turns = np.zeros(ks.shape)
    for p, e in chi.k_p.items():
        turns -= e * frac_multiple(ks, h1 * math.log(p) / TWO_PI)
    for (m, j), e in chi.l_mj.items():
        if j >= len(rows):
            raise BoundMismatchError(f"row {j} outside the collection")
        _, a, h = rows[j]
        turns -= e * frac_multiple(ks, h * math.log(m + a) / TWO_PI)
    return np.mod(turns, 1.0)


def weyl_sum(chi: CharacterIndex, N: int, collection: HurwitzCollection) -> complex:
    """(1/(N+1)) sum_{k<=N} chi(trajectory_point(k))."""
    if N < 0:
        raise DomainError("N must be >= 0")
    if chi.trivial:
        return 1.0 + 0j
    ks = np.arange(N + 1)
    # np.sum reduces pairwise, so the order is fixed by N alone
    return complex(np.sum(np.exp(2j * np.pi * _character_turns(chi, collection, ks))) / (N + 1))


def weyl_closed_form(theta: float, N: int) -> complex:
    """Geometric-series value of the Weyl sum for theta outside 2 pi Z."""
    return complex(np.exp(-0.5j * N * theta) * math.sin((N + 1) * theta / 2) / ((N + 1) * math.sin(theta / 2)))


# --------------------------------------------------------------------------
# discrepancy
# --------------------------------------------------------------------------


def star_discrepancy_1d(angles, exact: bool = True, bins: int = 1000) -> float:
    """Star discrepancy D*_N of points in [0, 1).

    Exact mode: 1/(2N) + max_i |x_(i) - (2i - 1)/(2N)| on the sorted points.
    Otherwise the empirical distribution is compared with the uniform one at
    ``bins`` equally spaced anchors (accurate to about 1/bins).
    """
    x = np.asarray(angles, dtype=float).ravel()
    n = x.size
    if n == 0:
        raise DomainError("need at least one point")
    if exact:
        xs = np.sort(x)
        i = np.arange(1, n + 1)
        return float(1 / (2 * n) + np.max(np.abs(xs - (2 * i - 1) / (2 * n))))
    counts, edges = np.histogram(x, bins=bins, range=(0.0, 1.0))
    cdf = np.concatenate([[0], np.cumsum(counts)]) / n
    return float(np.max(np.abs(cdf - edges)))


def coordinate_angles(collection: HurwitzCollection, p: int, N: int) -> np.ndarray:
    """{k h1 log p / 2pi mod 1 : k = 0..N}."""
    return frac_multiple(np.arange(N + 1), collection.h1 * math.log(p) / TWO_PI)


def discrepancy_table(collection: HurwitzCollection, primes=(2, 3, 5), Ns=(10**3, 10**4, 10**5)) -> list[dict]:
    return [
        {"p": p, "N": N, "discrepancy": star_discrepancy_1d(coordinate_angles(collection, p, N))}
        for p in primes
        for N in Ns
    ]


# --------------------------------------------------------------------------
# moment comparison
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleMoments:
    count: int
    mean: complex
    abs_mean: float
    second_moment: float
    se_mean: float
    se_abs_mean: float
    se_second: float

    @classmethod
    def of(cls, x: np.ndarray) -> "SampleMoments":
        n = x.size
        mod = np.abs(x)
        sq = mod**2
        mean = complex(np.mean(x))
        root = math.sqrt(n)
        return cls(
            n,
            mean,
            float(np.mean(mod)),
            float(np.mean(sq)),
            float(np.sqrt(np.mean(np.abs(x - mean) ** 2)) / root),
            float(np.std(mod) / root),
            float(np.std(sq) / root),
        )


@dataclass(frozen=True)
class MomentReport:
    component: str
    shift: SampleMoments
    mc: SampleMoments
    mean_oracle: complex
    second_moment_oracle: float
    tolerance_se: float
    gates: dict

    @property
    def sample_count_shift(self) -> int:
        return self.shift.count

    @property
    def sample_count_mc(self) -> int:
        return self.mc.count

    @property
    def passed(self) -> bool:
        return all(self.gates.values())

    def to_dict(self) -> dict:
        def mom(m: SampleMoments):
            return {
                "count": m.count,
                "mean": [m.mean.real, m.mean.imag],
                "abs_mean": m.abs_mean,
                "second_moment": m.second_moment,
                "se_mean": m.se_mean,
                "se_abs_mean": m.se_abs_mean,
                "se_second": m.se_second,
            }

        return {
            "component": self.component,
            "shift": mom(self.shift),
            "mc": mom(self.mc),
            "mean_oracle": [self.mean_oracle.real, self.mean_oracle.imag],
            "second_moment_oracle": self.second_moment_oracle,
            "tolerance_se": self.tolerance_se,
            "gates": dict(self.gates),
            "passed": self.passed,
        }


@dataclass(frozen=True)
class MomentComparison:
    sigma: float
    N: int
    mc_samples: int
    n_smooth: int
    seed: int
    components: tuple[MomentReport, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.components)

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "N": self.N,
            "mc_samples": self.mc_samples,
            "n_smooth": self.n_smooth,
            "seed": self.seed,
            "passed": self.passed,
            "components": [c.to_dict() for c in self.components],
        }


def _gate(a: float | complex, b: float | complex, se: float, tol: float) -> bool:
    # the floor absorbs summation rounding when a sample is constant (se = 0)
    return bool(abs(a - b) <= tol * se + 1e-12 * max(1.0, abs(a), abs(b)))


def _report(label, shift, mc, mean_oracle, second_oracle, tol) -> MomentReport:
    both_mean = math.hypot(shift.se_mean, mc.se_mean)
    gates = {
        "mean_shift_vs_mc": _gate(shift.mean, mc.mean, both_mean, tol),
        "abs_mean_shift_vs_mc": _gate(shift.abs_mean, mc.abs_mean, math.hypot(shift.se_abs_mean, mc.se_abs_mean), tol),
        "second_shift_vs_mc": _gate(shift.second_moment, mc.second_moment, math.hypot(shift.se_second, mc.se_second), tol),
        "mean_shift_vs_oracle": _gate(shift.mean, mean_oracle, shift.se_mean, tol),
        "mean_mc_vs_oracle": _gate(mc.mean, mean_oracle, mc.se_mean, tol),
        "second_shift_vs_oracle": _gate(shift.second_moment, second_oracle, shift.se_second, tol),
        "second_mc_vs_oracle": _gate(mc.second_moment, second_oracle, mc.se_second, tol),
    }
    return MomentReport(label, shift, mc, complex(mean_oracle), float(second_oracle), tol, gates)


def _shift_sample(sigma: float, weights: np.ndarray, logs: np.ndarray, N: int, step: float) -> np.ndarray:
    grid = np.array([sigma], dtype=complex)
    out = np.empty(N + 1, dtype=complex)
    for k0 in range(0, N + 1, _BLOCK):
        count = min(_BLOCK, N + 1 - k0)
        out[k0 : k0 + count] = dirichlet_shift_block(grid, weights, logs, k0, count, step)[:, 0]
    return out


def compare_distributions(
    collection: HurwitzCollection,
    spec: EulerProductSpec,
    sigma: float = 1.5,
    N: int = 10**4,
    mc_samples: int = 10**4,
    n_smooth: int = 10,
    seed: int = 0,
    tolerance_se: float = 3.0,
) -> MomentComparison:
    """First and second moments of shifted versus Haar-random smoothed sums.

    Shift side: phi_n(sigma + i k h1) and zeta_n(sigma + i k h2, alpha_j; B)
    for k = 0..N. Random side: the same sums with Haar-random torus points.
    Oracles: the mean is the m = 1 term for phi_n (omega(1) = 1) and 0 for the
    Hurwitz components; the second moment is sum |c_m|^2 v^2 m^{-2 sigma}.
    """
    if N < 10**3 or mc_samples < 10**3:
        raise DomainError("N and mc_samples must be at least 1000")
    if sigma <= 0.5:
        raise DomainError("sigma must exceed 1/2")
    params = SmoothingParams(n_smooth)

    K = truncation_length(params)
    m1 = np.arange(1, K + 1, dtype=float)
    w1 = dirichlet_coefficients(spec, K).values * weight_v1(m1, params)
    logs1 = np.log(m1)
    amp1 = w1 * np.exp(-sigma * logs1)

    comps = []
    for j, l, a, seq, h in collection.components():
        M = truncation_length(params, a)
        m = np.arange(M + 1, dtype=float)
        w = seq.values(M + 1) * weight_v2(m, a, params)
        logs = np.log(m + a)
        comps.append((f"zeta_{j + 1}{l + 1}", collection.row_of(j, l), w, logs, w * np.exp(-sigma * logs), h))
    M_max = max(c[2].size for c in comps) - 1
    n_rows = len(collection.torus_rows())

    shift_vals = [_shift_sample(sigma, w1, logs1, N, collection.h1)]
    shift_vals += [_shift_sample(sigma, w, logs, N, h) for _, _, w, logs, _, h in comps]

    mc_vals = [np.empty(mc_samples, dtype=complex) for _ in shift_vals]
    for start in range(0, mc_samples, _MC_BATCH):
        count = min(_MC_BATCH, mc_samples - start)
        a1, a2 = sample_omega_angles(seed, count, K, M_max, n_rows, start=start)
        turns = extended_angles(a1, K, K)
        mc_vals[0][start : start + count] = np.exp(2j * np.pi * turns) @ amp1
        for i, (_, row, _, _, amp, _) in enumerate(comps, 1):
            mc_vals[i][start : start + count] = np.exp(2j * np.pi * a2[:, row, : amp.size]) @ amp

    reports = [
        _report(
            "phi",
            SampleMoments.of(shift_vals[0]),
            SampleMoments.of(mc_vals[0]),
            amp1[0],
            float(np.sum(np.abs(amp1) ** 2)),
            tolerance_se,
        )
    ]
    for i, (label, _, _, _, amp, _) in enumerate(comps, 1):
        reports.append(
            _report(
                label,
                SampleMoments.of(shift_vals[i]),
                SampleMoments.of(mc_vals[i]),
                0j,
                float(np.sum(np.abs(amp) ** 2)),
                tolerance_se,
            )
        )
    return MomentComparison(sigma, N, mc_samples, n_smooth, seed, tuple(reports))
