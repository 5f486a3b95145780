"""Experimental tuples for the mixed joint universality experiment.

A :class:`HurwitzCollection` holds the Hurwitz families (alpha_j with their
periodic sequences) and the common differences in one of three modes:

* ``equal``: one step ``h`` for every component;
* ``per_family``: ``h1`` for the Euler-product component, ``h2[j]`` per family;
* ``per_sequence``: ``h1`` plus one step ``h2[j][l]`` per sequence.

Real parameters are stored as expression text (``"1/pi"``) so the logarithm
sets can be rebuilt at the precision needed by the relation search.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources

import mpmath
import numpy as np

from .arith import primes_upto
from .errors import ConfigError, DomainError, PrecisionError
from .expr import evaluate, normalise
from .lattice import integer_relation
from .zeta_kernels import EulerProductSpec, PeriodicSequence, riemann_spec, zeta_power_spec

MODES = ("equal", "per_family", "per_sequence")
DEFAULT_P_CUT = 20
DEFAULT_M_CUT = 20
DEFAULT_DIGITS = 50
DEFAULT_MAX_COEFF = 10**4
DEFAULT_SUBSET_SIZE = 3
GUARD_DIGITS = 20


# --------------------------------------------------------------------------
# collection
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class HurwitzFamily:
    alpha: str
    sequences: tuple[PeriodicSequence, ...]

    def __post_init__(self):
        object.__setattr__(self, "alpha", normalise(self.alpha))
        object.__setattr__(self, "sequences", tuple(self.sequences))
        if not 0 < self.alpha_value < 1:
            raise DomainError(f"alpha = {self.alpha} must lie in the open interval (0, 1)")
        if not self.sequences:
            raise DomainError("a family needs at least one sequence")

    @property
    def alpha_value(self) -> float:
        return evaluate(self.alpha)

    @property
    def l(self) -> int:
        return len(self.sequences)


@dataclass(frozen=True)
class Differences:
    mode: str
    h: str | None = None
    h1: str | None = None
    h2: tuple = ()

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown difference mode {self.mode!r}")
        if self.mode == "equal":
            if self.h is None:
                raise ConfigError("equal mode needs h")
            object.__setattr__(self, "h", normalise(self.h))
            vals = [self.h]
        else:
            if self.h1 is None or not self.h2:
                raise ConfigError(f"{self.mode} mode needs h1 and h2")
            object.__setattr__(self, "h1", normalise(self.h1))
            if self.mode == "per_family":
                h2 = tuple(normalise(x) for x in self.h2)
                vals = [self.h1, *h2]
            else:
                h2 = tuple(tuple(normalise(x) for x in row) for row in self.h2)
                vals = [self.h1, *itertools.chain.from_iterable(h2)]
            object.__setattr__(self, "h2", h2)
        if any(not evaluate(v) > 0 for v in vals):
            raise DomainError("all differences must be positive")

    def prime_step(self) -> str:
        return self.h if self.mode == "equal" else self.h1

    def hurwitz_step(self, j: int, l: int) -> str:
        """Step of sequence l in family j (both 0-based)."""
        if self.mode == "equal":
            return self.h
        if self.mode == "per_family":
            return self.h2[j]
        return self.h2[j][l]


@dataclass(frozen=True)
class HurwitzCollection:
    families: tuple[HurwitzFamily, ...]
    differences: Differences
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "families", tuple(self.families))
        if not self.families:
            raise DomainError("r must be at least 1")
        d = self.differences
        if d.mode == "per_family" and len(d.h2) != self.r:
            raise ConfigError(f"per_family mode needs {self.r} values of h2, got {len(d.h2)}")
        if d.mode == "per_sequence":
            if len(d.h2) != self.r or any(len(row) != f.l for row, f in zip(d.h2, self.families)):
                raise ConfigError("per_sequence mode needs one h2 value per sequence")

    @property
    def r(self) -> int:
        return len(self.families)

    @property
    def lam(self) -> int:
        return sum(f.l for f in self.families)

    @property
    def alphas(self) -> list[float]:
        return [f.alpha_value for f in self.families]

    @property
    def h1(self) -> float:
        return evaluate(self.differences.prime_step())

    def h2(self, j: int, l: int = 0) -> float:
        return evaluate(self.differences.hurwitz_step(j, l))

    def components(self):
        """(j, l, alpha_j, sequence, step) for every Hurwitz component, 0-based."""
        for j, fam in enumerate(self.families):
            for l, seq in enumerate(fam.sequences):
                yield j, l, fam.alpha_value, seq, self.h2(j, l)

    def torus_rows(self) -> list[tuple[int, float, float]]:
        """Rows of the Hurwitz torus: (family, alpha, step).

        One row per family, except in per_sequence mode where every sequence
        moves with its own step and gets its own row.
        """
        if self.differences.mode == "per_sequence":
            return [(j, a, h) for j, _, a, _, h in self.components()]
        return [(j, f.alpha_value, self.h2(j)) for j, f in enumerate(self.families)]

    def row_of(self, j: int, l: int) -> int:
        if self.differences.mode != "per_sequence":
            return j
        return sum(f.l for f in self.families[:j]) + l

    # serialisation ------------------------------------------------------

    def to_dict(self) -> dict:
        d = self.differences
        diff = {"mode": d.mode}
        if d.mode == "equal":
            diff["h"] = d.h
        else:
            diff["h1"] = d.h1
            diff["h2"] = [list(row) for row in d.h2] if d.mode == "per_sequence" else list(d.h2)
        return {
            "name": self.name,
            "families": [
                {"alpha": f.alpha, "sequences": [_coeffs_out(s.coeffs) for s in f.sequences]} for f in self.families
            ],
            "differences": diff,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HurwitzCollection":
        try:
            fams = tuple(
                HurwitzFamily(f["alpha"], tuple(PeriodicSequence(_coeffs_in(c)) for c in f["sequences"]))
                for f in d["families"]
            )
            diff = dict(d["differences"])
            if diff.get("mode") == "per_sequence":
                diff["h2"] = tuple(tuple(row) for row in diff["h2"])
            elif "h2" in diff:
                diff["h2"] = tuple(diff["h2"])
            return cls(fams, Differences(**diff), d.get("name", ""))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed collection: {exc}") from exc


def _coeffs_out(coeffs):
    out = []
    for c in coeffs:
        c = complex(c)
        out.append(c.real if c.imag == 0 else [c.real, c.imag])
    return out


def _coeffs_in(raw):
    return tuple(complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c) for c in raw)


# --------------------------------------------------------------------------
# rank condition
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientMatrix:
    """k_j x l(j) matrix of b_{m j l}, rows m = 1..k_j."""

    entries: np.ndarray

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    @property
    def l(self) -> int:
        return self.entries.shape[1]


def build_Bj_matrix(collection: HurwitzCollection, j: int) -> CoefficientMatrix:
    """Matrix of family ``j`` (1-based); row m holds b_m of every sequence."""
    if not 1 <= j <= collection.r:
        raise DomainError(f"family index {j} outside 1..{collection.r}")
    seqs = collection.families[j - 1].sequences
    k = math.lcm(*(s.period for s in seqs))
    m = np.arange(1, k + 1)
    entries = np.stack([np.asarray(s.coeffs, dtype=complex)[m % s.period] for s in seqs], axis=1)
    return CoefficientMatrix(entries)


def rank_check(M, tol: float | None = None) -> int:
    """Numeric rank: singular values above ``tol`` (default 1e-10 * largest)."""
    a = M.entries if isinstance(M, CoefficientMatrix) else np.asarray(M, dtype=complex)
    sv = np.linalg.svd(a, compute_uv=False)
    if sv.size == 0 or sv[0] == 0:
        return 0
    if tol is None:
        tol = 1e-10 * sv[0]
    if tol <= 0:
        raise DomainError("tol must be positive")
    return int(np.count_nonzero(sv > tol))


def check_ranks(collection: HurwitzCollection) -> list[dict]:
    out = []
    for j in range(1, collection.r + 1):
        M = build_Bj_matrix(collection, j)
        rk = rank_check(M)
        out.append({"j": j, "k": M.k, "l": M.l, "rank": rk, "ok": rk == M.l})
    return out


# --------------------------------------------------------------------------
# logarithm sets and relation search
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LogSet:
    """Finite piece of the set whose linear independence is hypothesised.

    Entries are (label, expression); values are derived from the text.
    """

    entries: tuple[tuple[str, str], ...]
    P_cut: int = 0
    M_cut: int = 0

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple((str(a), str(b)) for a, b in self.entries))
        labels = [lab for lab, _ in self.entries]
        if len(set(labels)) != len(labels):
            raise DomainError("LogSet labels must be unique")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("LogSet values must be finite")

    @classmethod
    def from_expressions(cls, exprs: dict[str, str]) -> "LogSet":
        return cls(tuple(exprs.items()))

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def labels(self) -> list[str]:
        return [lab for lab, _ in self.entries]

    @cached_property
    def values(self) -> np.ndarray:
        return np.array([evaluate(e) for _, e in self.entries])

    def scaled(self, digits: int, guard: int = GUARD_DIGITS) -> list[int]:
        """round(x * 10**(digits + guard)) for every entry, from mpmath."""
        dps = digits + guard + 10
        with mpmath.workdps(dps):
            scale = mpmath.mpf(10) ** (digits + guard)
            return [int(mpmath.nint(evaluate(e, dps) * scale)) for _, e in self.entries]


def build_log_set(collection: HurwitzCollection, P_cut: int = DEFAULT_P_CUT, M_cut: int = DEFAULT_M_CUT) -> LogSet:
    """Truncated logarithm set, including the constant element.

    Equal mode: log p, log(m + alpha_j) and 2 pi / h.
    Other modes: h1 log p, h2 log(m + alpha_j) (per family or per sequence) and pi.
    """
    if P_cut < 2 or M_cut < 2:
        raise DomainError("cuts must be at least 2")
    d = collection.differences
    entries = []
    if d.mode == "equal":
        entries += [(f"log({p})", f"log({p})") for p in primes_upto(P_cut)]
        for j, fam in enumerate(collection.families, 1):
            entries += [(f"log({m}+a{j})", f"log({m}+({fam.alpha}))") for m in range(M_cut + 1)]
        entries.append(("2pi/h", f"2*pi/({d.h})"))
    else:
        entries += [(f"h1*log({p})", f"({d.h1})*log({p})") for p in primes_upto(P_cut)]
        for j, fam in enumerate(collection.families, 1):
            steps = [(f"h2_{j}", d.h2[j - 1])] if d.mode == "per_family" else [
                (f"h2_{j}{l}", d.h2[j - 1][l - 1]) for l in range(1, fam.l + 1)
            ]
            for name, h in steps:
                entries += [(f"{name}*log({m}+a{j})", f"({h})*log({m}+({fam.alpha}))") for m in range(M_cut + 1)]
        entries.append(("pi", "pi"))
    return LogSet(tuple(entries), P_cut, M_cut)


@dataclass(frozen=True)
class RelationReport:
    found: bool
    coefficients: tuple[int, ...]
    residual: float
    precision_digits: int
    max_coeff_bound: int
    subset_size: int = 0
    subsets_checked: int = 0
    sampled: bool = False
    labels: tuple[str, ...] = field(default=())

    def relation_text(self) -> str:
        return " + ".join(f"{c}*[{lab}]" for c, lab in zip(self.coefficients, self.labels) if c)

    def to_dict(self) -> dict:
        return {
            "found": self.found,
            "coefficients": list(self.coefficients),
            "residual": self.residual,
            "precision_digits": self.precision_digits,
            "max_coeff_bound": self.max_coeff_bound,
            "subset_size": self.subset_size,
            "subsets_checked": self.subsets_checked,
            "sampled": self.sampled,
            "labels": list(self.labels),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RelationReport":
        d = dict(d)
        d["coefficients"] = tuple(d["coefficients"])
        d["labels"] = tuple(d.get("labels", ()))
        return cls(**d)


def _unrank(rank: int, n: int, k: int) -> tuple[int, ...]:
    """The ``rank``-th k-subset of range(n) in lexicographic order."""
    out, start = [], 0
    for slot in range(k, 0, -1):
        for x in range(start, n):
            c = math.comb(n - x - 1, slot - 1)
            if rank < c:
                out.append(x)
                start = x + 1
                break
            rank -= c
    return tuple(out)


def select_subsets(n: int, k: int, max_subsets: int | None, seed: int = 0) -> tuple[list[tuple[int, ...]], bool]:
    """All k-subsets in lexicographic order, or a seeded sample kept in that order."""
    total = math.comb(n, k)
    if max_subsets is None or total <= max_subsets:
        return list(itertools.combinations(range(n), k)), False
    rng = np.random.default_rng(seed)
    ranks = set()
    while len(ranks) < max_subsets:
        ranks.update(int(x) for x in rng.integers(0, total, size=max_subsets - len(ranks)))
    return [_unrank(r, n, k) for r in sorted(ranks)], True


def _check_chunk(args):
    scaled, subsets, guard, digits, max_coeff = args
    for sub in subsets:
        out = integer_relation([scaled[i] for i in sub], 10**guard, digits, max_coeff)
        if out.found:
            return sub, out
    return None


def relation_search(
    L: LogSet,
    subset_size: int = DEFAULT_SUBSET_SIZE,
    precision_digits: int = DEFAULT_DIGITS,
    max_coeff: int = DEFAULT_MAX_COEFF,
    max_subsets: int | None = None,
    seed: int = 0,
    workers: int = 1,
) -> RelationReport:
    """Integer-relation screening over subsets of ``L``.

    Subsets are checked in lexicographic order (or a seeded sample of them
    when ``max_subsets`` is smaller than the count); the first relation found
    is reported with coefficients over the whole set. ``found=False`` means
    every checked subset carries a lattice certificate that no relation with
    coefficients up to ``max_coeff`` exists at this precision.
    """
    n = len(L)
    if not 1 <= subset_size <= n:
        raise DomainError(f"subset_size must lie in 1..{n}")
    if precision_digits < 30:
        raise PrecisionError("relation search needs at least 30 digits")
    scaled = L.scaled(precision_digits, GUARD_DIGITS)
    subsets, sampled = select_subsets(n, subset_size, max_subsets, seed)
    chunk = 256
    jobs = [
        (scaled, subsets[i : i + chunk], GUARD_DIGITS, precision_digits, max_coeff)
        for i in range(0, len(subsets), chunk)
    ]
    hit = None
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(workers) as pool:
            for res in pool.map(_check_chunk, jobs):
                if res is not None:
                    hit = res
                    break
    else:
        for job in jobs:
            hit = _check_chunk(job)
            if hit is not None:
                break
    common = dict(
        precision_digits=precision_digits,
        max_coeff_bound=max_coeff,
        subset_size=subset_size,
        subsets_checked=len(subsets),
        sampled=sampled,
        labels=tuple(L.labels),
    )
    if hit is None:
        return RelationReport(False, (), 0.0, **common)
    sub, out = hit
    coeffs = [0] * n
    for i, c in zip(sub, out.coefficients):
        coeffs[i] = c
    return RelationReport(True, tuple(coeffs), out.residual, **common)


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Preset:
    name: str
    collection: HurwitzCollection
    spec: EulerProductSpec
    report: RelationReport | None
    description: str = ""


def spec_by_label(label: str) -> EulerProductSpec:
    if label == "riemann":
        return riemann_spec()
    if label.startswith("zeta^"):
        return zeta_power_spec(int(label[5:]))
    raise ConfigError(f"unknown Euler-product preset {label!r}")


def preset_definitions() -> list[dict]:
    """Curated experimental tuples (without stored reports)."""
    one = [1.0]
    return [
        {
            "name": "riemann-pi",
            "spec": "riemann",
            "description": "zeta(s) with zeta(s, 1/pi), common difference h = 1",
            "collection": {
                "families": [{"alpha": "1/pi", "sequences": [one]}],
                "differences": {"mode": "equal", "h": "1"},
            },
        },
        {
            "name": "riemann-pi-e",
            "spec": "riemann",
            "description": "two families (1/pi with two sequences, 1/e), per-family differences",
            "collection": {
                "families": [
                    {"alpha": "1/pi", "sequences": [one, [1.0, -1.0]]},
                    {"alpha": "1/e", "sequences": [[1.0, 2.0, 0.5]]},
                ],
                "differences": {"mode": "per_family", "h1": "1", "h2": ["1", "sqrt(2)"]},
            },
        },
        {
            "name": "riemann-pi4-seq",
            "spec": "riemann",
            "description": "one family alpha = pi/4 with two sequences, per-sequence differences",
            "collection": {
                "families": [{"alpha": "pi/4", "sequences": [one, [1.0, 0.0, -1.0]]}],
                "differences": {"mode": "per_sequence", "h1": "1", "h2": [["1", "sqrt(3)"]]},
            },
        },
    ]


def presets() -> list[Preset]:
    stored = json.loads(resources.files("zetalab").joinpath("data/preset_reports.json").read_text())
    out = []
    for d in preset_definitions():
        coll = HurwitzCollection.from_dict({**d["collection"], "name": d["name"]})
        rep = stored.get(d["name"])
        out.append(
            Preset(
                d["name"],
                coll,
                spec_by_label(d["spec"]),
                RelationReport.from_dict(rep) if rep else None,
                d["description"],
            )
        )
    return out


def preset(name: str) -> Preset:
    for p in presets():
        if p.name == name:
            return p
    raise ConfigError(f"unknown preset {name!r}; known: {[p.name for p in presets()]}")
