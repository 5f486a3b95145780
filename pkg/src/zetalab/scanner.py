"""Discrete-shift universality scans.

For k = 0..N every component F (the Euler-product function and each periodic
Hurwitz function) is evaluated on its compact grid shifted by i k h_F, compared
with its target, and the worst sup-distance over components is recorded. The
density of k with that distance below epsilon estimates the lower density of
approximating shifts.

Shifts are processed in blocks of 128 consecutive k aligned at multiples of
128, so each block's arithmetic is the same whichever worker computes it.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, GridError, InadmissibleError, ZetaLabError
from .parameters import HurwitzCollection, RelationReport, check_ranks
from .smoothing import SmoothingParams, phi_n, truncation_length, weight_v1
from .zeta_kernels import (
    EulerProductSpec,
    PeriodicSequence,
    StripRegion,
    dirichlet_coefficients,
    dirichlet_shift_block,
    hurwitz_shift_block,
    hurwitz_zeta,
    periodic_hurwitz_zeta,
    periodic_shift_block,
)

BLOCK = 128
HIT_DETAIL = 100
DEFAULT_RESOLUTION = 0.01
DEFAULT_EPSILONS = (0.2, 0.5, 0.8, 1.0)
NONVANISHING_MARGIN = 1e-6
HURWITZ_STRIP = StripRegion(0.5, 1.0)


# --------------------------------------------------------------------------
# compact sets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Rectangle:
    sigma_lo: float
    sigma_hi: float
    t_lo: float
    t_hi: float

    def __post_init__(self):
        if not (self.sigma_lo <= self.sigma_hi and self.t_lo <= self.t_hi):
            raise GridError("rectangle bounds are reversed")

    def to_dict(self):
        return {"rectangle": [self.sigma_lo, self.sigma_hi, self.t_lo, self.t_hi]}


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not self.radius > 0:
            raise GridError("disk radius must be positive")

    def to_dict(self):
        return {"disk": {"center": [self.center.real, self.center.imag], "radius": self.radius}}


def shape_from_dict(d: dict):
    if "rectangle" in d:
        return Rectangle(*map(float, d["rectangle"]))
    if "disk" in d:
        c = d["disk"]["center"]
        center = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
        return Disk(center, float(d["disk"]["radius"]))
    raise ConfigError(f"unknown compact shape {d!r}")


@dataclass(frozen=True, eq=False)
class CompactSetGrid:
    shape: Rectangle | Disk
    points: np.ndarray
    resolution: float

    def __len__(self) -> int:
        return self.points.size


def _count(span: float, resolution: float) -> int:
    # tolerant ceil: 0.1 / 0.05 must give 2, not 3
    return int(math.ceil(span / resolution - 1e-9)) + 1


def grid_compact(
    shape: Rectangle | Disk, resolution: float = DEFAULT_RESOLUTION, ambient: StripRegion = HURWITZ_STRIP, pole_at_one: bool = True
) -> CompactSetGrid:
    """Regular grid over the shape with spacing at most ``resolution``.

    Every point must sit inside ``ambient`` with margin ``resolution``; shapes
    within ``resolution`` of s = 1 are rejected when the component has a pole.
    """
    if not resolution > 0:
        raise GridError("resolution must be positive")
    if isinstance(shape, Rectangle):
        sig = np.linspace(shape.sigma_lo, shape.sigma_hi, _count(shape.sigma_hi - shape.sigma_lo, resolution))
        ts = np.linspace(shape.t_lo, shape.t_hi, _count(shape.t_hi - shape.t_lo, resolution))
        pts = (sig[:, None] + 1j * ts[None, :]).ravel()
    elif isinstance(shape, Disk):
        n = int(math.floor(shape.radius / resolution + 1e-9))
        i = np.arange(-n, n + 1)
        offs = (i[:, None] + 1j * i[None, :]).ravel() * resolution
        offs = offs[np.abs(offs) <= shape.radius * (1 + 1e-12)]
        pts = shape.center + offs
    else:
        raise GridError(f"unsupported shape {shape!r}")
    if pts.size == 0:
        raise GridError("grid is empty")
    lo, hi = ambient.sigma_lo + resolution, ambient.sigma_hi - resolution
    if np.any(pts.real < lo - 1e-12) or np.any(pts.real > hi + 1e-12):
        raise GridError(
            f"shape leaves the strip {ambient.sigma_lo} < sigma < {ambient.sigma_hi} (margin {resolution})"
        )
    if np.any(np.abs(pts.imag) > ambient.t_bound - resolution):
        raise GridError("shape exceeds the strip height")
    if pole_at_one and np.any(np.abs(pts - 1) < resolution):
        raise GridError("shape touches the pole at s = 1")
    return CompactSetGrid(shape, pts, float(resolution))


# --------------------------------------------------------------------------
# targets
# --------------------------------------------------------------------------

TARGET_KINDS = ("dirichlet_polynomial", "polynomial", "exp_polynomial", "self_shift")


@dataclass(frozen=True)
class TargetFunction:
    """Function to approximate on a compact set.

    ``polynomial`` and ``exp_polynomial`` coefficients are in ascending powers
    of s; ``dirichlet_polynomial`` coefficients are a_1..a_L; ``self_shift``
    is the component's own function at s + i delta.
    """

    kind: str
    coeffs: tuple[complex, ...] = ()
    delta: float = 0.0
    component: str = ""
    nonvanishing_required: bool = False

    def __call__(self, s, evaluator: Callable | None = None) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(s, np.asarray(self.coeffs, dtype=complex))
        if self.kind == "exp_polynomial":
            return np.exp(np.polynomial.polynomial.polyval(s, np.asarray(self.coeffs, dtype=complex)))
        if self.kind == "dirichlet_polynomial":
            k = np.arange(1, len(self.coeffs) + 1, dtype=float)
            terms = np.asarray(self.coeffs, dtype=complex) * np.exp(-np.multiply.outer(s, np.log(k)))
            return terms.sum(axis=-1)
        if evaluator is None:
            raise ConfigError("self_shift targets need the component evaluator")
        return evaluator(s + 1j * self.delta)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "nonvanishing_required": self.nonvanishing_required}
        if self.kind == "self_shift":
            out.update(delta=self.delta, component=self.component)
        else:
            out["coeffs"] = [c.real if c.imag == 0 else [c.real, c.imag] for c in self.coeffs]
        return out

    @classmethod
    def from_dict(cls, d: dict, grid: CompactSetGrid | None = None) -> "TargetFunction":
        params = {k: v for k, v in d.items() if k not in ("kind", "nonvanishing_required")}
        return make_target(d["kind"], params, d.get("nonvanishing_required", False), grid)


def make_target(kind: str, params: dict, nonvanishing_required: bool = False, grid: CompactSetGrid | None = None) -> TargetFunction:
    """Build a target; nonvanishing is certified by construction or on ``grid``."""
    if kind not in TARGET_KINDS:
        raise ConfigError(f"unknown target kind {kind!r}")
    if kind == "self_shift":
        tgt = TargetFunction(kind, (), float(params.get("delta", 0.0)), str(params.get("component", "")), nonvanishing_required)
    else:
        raw = params.get("coeffs", params.get("inner", ()))
        coeffs = tuple(complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c) for c in raw)
        if kind == "dirichlet_polynomial" and not coeffs:
            raise ConfigError("dirichlet_polynomial needs at least one coefficient")
        if kind == "polynomial" and not coeffs:
            coeffs = (0j,)
        tgt = TargetFunction(kind, coeffs, 0.0, "", nonvanishing_required)
    if nonvanishing_required and kind != "exp_polynomial":
        if kind == "self_shift" or grid is None:
            raise ConfigError(f"cannot certify that a {kind} target is nonvanishing without a grid check")
        low = float(np.min(np.abs(tgt(grid.points))))
        if not low > NONVANISHING_MARGIN:
            raise ConfigError(f"target vanishes on the grid (min modulus {low:.3g})")
    return tgt


# --------------------------------------------------------------------------
# sup distance
# --------------------------------------------------------------------------


def sup_distance(evaluator: Callable, shift: float, target: TargetFunction, grid: CompactSetGrid) -> float:
    """max over the grid of |F(s + i shift) - f(s)|."""
    vals = np.asarray(evaluator(grid.points + 1j * shift))
    return float(np.max(np.abs(vals - target(grid.points, evaluator))))


# --------------------------------------------------------------------------
# components
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Component:
    """One function of the joint scan with its grid, target and step."""

    name: str
    kind: str  # "zeta_power" | "smoothed" | "hurwitz"
    grid: CompactSetGrid
    target: TargetFunction
    step: float
    alpha: float = 1.0
    sequence: PeriodicSequence | None = None
    power: int = 1
    spec: EulerProductSpec | None = None
    n_smooth: int = 0

    def evaluator(self) -> Callable:
        if self.kind == "zeta_power":
            return lambda s: np.asarray(hurwitz_zeta(s, 1.0)) ** self.power
        if self.kind == "smoothed":
            params = SmoothingParams(self.n_smooth)
            return lambda s: np.asarray(phi_n(s, self.spec, params))
        return lambda s: np.asarray(periodic_hurwitz_zeta(s, self.alpha, self.sequence))

    def block(self, k0: int, count: int, cache: dict) -> np.ndarray:
        """Values on the grid for k = k0..k0+count-1, shape (count, G)."""
        g = self.grid.points
        if self.kind == "zeta_power":
            return hurwitz_shift_block(g, 1.0, k0, count, self.step) ** self.power
        if self.kind == "hurwitz":
            return periodic_shift_block(g, self.alpha, self.sequence, k0, count, self.step)
        if self.name not in cache:
            params = SmoothingParams(self.n_smooth)
            K = truncation_length(params)
            m = np.arange(1, K + 1, dtype=float)
            cache[self.name] = (dirichlet_coefficients(self.spec, K).values * weight_v1(m, params), np.log(m))
        w, logs = cache[self.name]
        return dirichlet_shift_block(g, w, logs, k0, count, self.step)

    def target_values(self) -> np.ndarray:
        return self.target(self.grid.points, self.evaluator())


def phi_method(spec: EulerProductSpec, requested: str) -> str:
    if requested == "auto":
        return "continued" if spec.continuation is not None else "smoothed"
    if requested == "continued" and spec.continuation is None:
        raise ConfigError(f"spec '{spec.label}' has no implemented continuation; use phi_method='smoothed'")
    if requested not in ("continued", "smoothed"):
        raise ConfigError(f"unknown phi method {requested!r}")
    return requested


def build_components(
    collection: HurwitzCollection,
    spec: EulerProductSpec,
    targets: dict,
    grids: dict,
    method: str = "auto",
    n_smooth: int = 1000,
) -> list[Component]:
    """Components in fixed order: "phi", then "zeta_jl" (1-based j, l).

    ``targets`` and ``grids`` are keyed by those names. A component without
    a target is left out of the scan.
    """
    out = []
    if "phi" in targets:
        m = phi_method(spec, method)
        if m == "continued":
            out.append(Component("phi", "zeta_power", grids["phi"], targets["phi"], collection.h1, power=spec.continuation[1]))
        else:
            out.append(Component("phi", "smoothed", grids["phi"], targets["phi"], collection.h1, spec=spec, n_smooth=n_smooth))
    for j, l, a, seq, h in collection.components():
        name = f"zeta_{j + 1}{l + 1}"
        if name in targets:
            out.append(Component(name, "hurwitz", grids[name], targets[name], h, alpha=a, sequence=seq))
    unknown = set(targets) - {c.name for c in out}
    if unknown:
        raise ConfigError(f"targets for unknown components: {sorted(unknown)}")
    if not out:
        raise ConfigError("no component has a target")
    return out


# --------------------------------------------------------------------------
# scan
# --------------------------------------------------------------------------


@dataclass
class ScanResult:
    N: int
    epsilon: float
    per_k_max_sup: np.ndarray
    component_names: tuple[str, ...]
    per_component_sup: np.ndarray = field(repr=False)
    config: dict = field(default_factory=dict)

    @property
    def hit_mask(self) -> np.ndarray:
        return self.per_k_max_sup < self.epsilon

    @property
    def hit_count(self) -> int:
        return int(np.count_nonzero(self.hit_mask))

    @property
    def density(self) -> float:
        return self.hit_count / (self.N + 1)

    def density_at(self, epsilon: float, k_lo: int = 0, k_hi: int | None = None) -> float:
        seg = self.per_k_max_sup[k_lo : (self.N + 1 if k_hi is None else k_hi)]
        return float(np.count_nonzero(seg < epsilon) / seg.size)

    def hit_detail(self, limit: int = HIT_DETAIL) -> list[dict]:
        ks = np.flatnonzero(self.hit_mask)[:limit]
        return [
            {"k": int(k), **{n: float(v) for n, v in zip(self.component_names, self.per_component_sup[k])}} for k in ks
        ]

    def summary(self, epsilons=None) -> dict:
        eps = list(epsilons) if epsilons is not None else [self.epsilon]
        return {
            "N": self.N,
            "epsilon": self.epsilon,
            "hit_count": self.hit_count,
            "density": self.density,
            "density_vs_eps": [{"epsilon": e, "density": self.density_at(e)} for e in eps],
            "components": list(self.component_names),
            "max_sup_min": float(np.min(self.per_k_max_sup)),
            "max_sup_median": float(np.median(self.per_k_max_sup)),
            "hits": self.hit_detail(),
            "config": self.config,
        }


def _scan_blocks(components: list[Component], blocks: list[tuple[int, int]]) -> np.ndarray:
    cache: dict = {}
    targets = [c.target_values() for c in components]
    total = sum(n for _, n in blocks)
    out = np.empty((total, len(components)))
    row = 0
    for k0, count in blocks:
        for i, (c, tv) in enumerate(zip(components, targets)):
            try:
                vals = c.block(k0, count, cache)
            except ZetaLabError as exc:
                raise type(exc)(f"{c.name} at k in [{k0}, {k0 + count - 1}]: {exc}") from exc
            out[row : row + count, i] = np.max(np.abs(vals - tv[None, :]), axis=1)
        row += count
    return out


def _check_admissible(collection: HurwitzCollection, report: RelationReport | None, override: bool) -> None:
    if override:
        return
    bad = [r for r in check_ranks(collection) if not r["ok"]]
    if bad:
        raise InadmissibleError(f"rank condition fails for families {[r['j'] for r in bad]}")
    if report is None:
        raise InadmissibleError("no relation report supplied (pass override=True to scan anyway)")
    if report.found:
        raise InadmissibleError(f"relation found among the parameters: {report.relation_text()}")


def default_workers() -> int:
    return max(1, int(os.environ.get("ZETALAB_WORKERS", "1")))


def scan_density(
    collection: HurwitzCollection,
    spec: EulerProductSpec,
    targets: dict,
    grids: dict,
    epsilon: float,
    N: int,
    *,
    report: RelationReport | None = None,
    override: bool = False,
    method: str = "auto",
    n_smooth: int = 1000,
    workers: int | None = None,
    config: dict | None = None,
) -> ScanResult:
    """Density of k <= N at which every component is within epsilon of its target."""
    if N < 0 or not epsilon > 0:
        raise ConfigError("need N >= 0 and epsilon > 0")
    _check_admissible(collection, report, override)
    comps = build_components(collection, spec, targets, grids, method, n_smooth)
    blocks = [(k0, min(BLOCK, N + 1 - k0)) for k0 in range(0, N + 1, BLOCK)]
    workers = default_workers() if workers is None else max(1, int(workers))
    if workers == 1 or len(blocks) == 1:
        per = _scan_blocks(comps, blocks)
    else:
        # contiguous runs of whole blocks per task, merged back in k order
        n_tasks = min(len(blocks), 4 * workers)
        bounds = np.linspace(0, len(blocks), n_tasks + 1).astype(int)
        chunks = [blocks[a:b] for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(workers) as pool:
            per = np.concatenate(list(pool.map(_scan_blocks, [comps] * len(chunks), chunks)))
    return ScanResult(N, float(epsilon), per.max(axis=1), tuple(c.name for c in comps), per, dict(config or {}))


def scan_profile(result: ScanResult, bins: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Histogram of per-k max sup distances; edges equally spaced from 0 to the max."""
    if bins < 2:
        raise ConfigError("bins must be at least 2")
    top = float(np.max(result.per_k_max_sup))
    counts, edges = np.histogram(result.per_k_max_sup, bins=bins, range=(0.0, top if top > 0 else 1.0))
    return counts, edges
