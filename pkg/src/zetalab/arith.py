"""Small arithmetic helpers: prime sieves and factorisation tables."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def primes_upto(n: int) -> np.ndarray:
    """All primes ``p <= n`` as an int64 array."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(n**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def prime_count(x: float) -> int:
    return int(primes_upto(int(x)).size)


@lru_cache(maxsize=4)
def smallest_prime_factor(n: int) -> np.ndarray:
    """spf[k] for 0 <= k <= n, with spf[0] = spf[1] = 0. Read-only."""
    spf = np.zeros(n + 1, dtype=np.int64)
    if n >= 2:
        spf[2::2] = 2
        for p in range(3, int(n**0.5) + 1, 2):
            if spf[p] == 0:
                block = spf[p * p :: p]
                block[block == 0] = p
        rest = np.flatnonzero(spf == 0)
        rest = rest[rest >= 2]
        spf[rest] = rest
    spf.flags.writeable = False
    return spf


def peel_prime_powers(n: int):
    """Yield ``(indices, primes, exponents)`` layers factoring every 2 <= k <= n.

    Each k appears once per distinct prime divisor; across layers the triples
    enumerate its factorisation k = prod p**e.
    """
    spf = smallest_prime_factor(n)
    rest = np.arange(n + 1, dtype=np.int64)
    active = np.arange(2, n + 1, dtype=np.int64)
    while active.size:
        vals = rest[active]
        p = spf[vals]
        e = np.zeros(active.size, dtype=np.int64)
        mask = np.ones(active.size, dtype=bool)
        while mask.any():
            vals = np.where(mask, vals // np.where(mask, p, 1), vals)
            e += mask
            mask = (vals % p) == 0
        rest[active] = vals
        yield active, p, e
        active = active[vals > 1]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True
