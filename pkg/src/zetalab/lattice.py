"""Exact integer LLL and an integer-relation test built on it.

The relation test embeds scaled values in the lattice spanned by
``[e_i | X_i]`` with ``X_i = round(10**digits * x_i)``. A relation ``c`` with
``|c_i| <= B`` gives a lattice vector of squared norm at most
``n B**2 + (n B / 2 + 1)**2``; every nonzero lattice vector is at least as
long as the shortest Gram-Schmidt vector of any basis. So when the reduced
basis has all Gram-Schmidt norms above that bound, no such relation exists
at this precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import PrecisionError

DELTA = Fraction(99, 100)


def lll_reduce(basis, delta: Fraction = DELTA):
    """Integral LLL with exact sub-determinants (Cohen, Algorithm 2.6.7).

    Returns the reduced basis and ``d`` with ``d[0] = 1`` and
    ``|b*_i|**2 = d[i+1] / d[i]``. Rows must be linearly independent.
    """
    b = [list(map(int, v)) for v in basis]
    n = len(b)
    p, q = delta.numerator, delta.denominator
    d = [1] + [0] * n
    lam = [[0] * n for _ in range(n)]

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def gram_schmidt(k):
        for j in range(k + 1):
            u = dot(b[k], b[j])
            for i in range(j):
                u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
            if j < k:
                lam[k][j] = u
            else:
                if u == 0:
                    raise ValueError("basis rows are linearly dependent")
                d[k + 1] = u

    def reduce(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            r = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - r * y for x, y in zip(b[k], b[l])]
            lam[k][l] -= r * d[l + 1]
            for i in range(l):
                lam[k][i] -= r * lam[l][i]

    def swap(k, kmax):
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        la = lam[k][k - 1]
        big = (d[k - 1] * d[k + 1] + la * la) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - la * t) // d[k]
            lam[i][k - 1] = (big * t + la * lam[i][k]) // d[k + 1]
        d[k] = big

    if n == 0:
        return b, d
    gram_schmidt(0)
    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            gram_schmidt(k)
        reduce(k, k - 1)
        if q * d[k + 1] * d[k - 1] < p * d[k] * d[k] - q * lam[k][k - 1] ** 2:
            swap(k, kmax)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                reduce(k, l)
            k += 1
    return b, d


@dataclass(frozen=True)
class RelationOutcome:
    found: bool
    coefficients: tuple[int, ...]
    residual: float


def _normalise(c):
    g = 0
    for x in c:
        g = gcd(g, x)
    c = [x // g for x in c]
    first = next(x for x in c if x)
    return tuple(-x for x in c) if first < 0 else tuple(c)


def integer_relation(scaled: list[int], guard_scale: int, digits: int, max_coeff: int) -> RelationOutcome:
    """Decide whether the values behind ``scaled`` admit a small relation.

    ``scaled[i]`` is ``round(x_i * 10**digits * guard_scale)``; the extra guard
    digits are used only for the residual check. Raises PrecisionError when
    neither a relation nor a certificate of absence is obtained.
    """
    n = len(scaled)
    coarse = [(2 * x + guard_scale) // (2 * guard_scale) for x in scaled]
    basis = [[int(i == j) for j in range(n)] + [coarse[i]] for i in range(n)]
    reduced, d = lll_reduce(basis)
    full = 10**digits * guard_scale
    for v in reduced:
        c = v[:n]
        if not any(c) or max(abs(x) for x in c) > max_coeff:
            continue
        resid = abs(sum(ci * xi for ci, xi in zip(c, scaled)))
        # |sum c_i x_i| <= 10**(2 - digits) * |c|, squared to stay in integers
        if (resid * 10 ** (digits - 2)) ** 2 <= sum(x * x for x in c) * full**2:
            return RelationOutcome(True, _normalise(c), float(Fraction(resid, full)))
    bound = n * max_coeff**2 + (n * max_coeff // 2 + 1) ** 2
    if all(d[i + 1] > bound * d[i] for i in range(n)):
        return RelationOutcome(False, (), 0.0)
    raise PrecisionError(
        f"{digits} digits cannot separate relations with coefficients <= {max_coeff} among {n} values"
    )
