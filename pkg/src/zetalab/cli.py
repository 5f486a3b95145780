"""Command-line front end: one experiment per invocation, driven by a JSON config.

    zetalab scan --config scan.json --out results/scan.json --workers 4
    zetalab eval --dump-default-config > eval.json

Every command writes a JSON summary (stdout, or ``--out``). With ``--out``
run timestamps go to ``<out>.meta.json`` and plot tables to
``<stem>.<kind>.csv`` beside it, so the summary itself is byte-reproducible.

Exit codes: 0 success, 2 configuration error, 3 admissibility failure,
4 evaluator error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError, GridError, InadmissibleError, ZetaLabError
from .expr import evaluate
from .parameters import (
    DEFAULT_DIGITS,
    DEFAULT_M_CUT,
    DEFAULT_MAX_COEFF,
    DEFAULT_P_CUT,
    DEFAULT_SUBSET_SIZE,
    HurwitzCollection,
    RelationReport,
    build_log_set,
    check_ranks,
    preset,
    relation_search,
    spec_by_label,
)
from .scanner import (
    DEFAULT_EPSILONS,
    HURWITZ_STRIP,
    ScanResult,
    TargetFunction,
    default_workers,
    grid_compact,
    scan_density,
    scan_profile,
    shape_from_dict,
)
from .smoothing import DEFAULT_SIGMA0_STAR, SmoothingParams, phi_n, zeta_n
from .torus_lab import compare_distributions, discrepancy_table
from .zeta_kernels import (
    PeriodicSequence,
    StripRegion,
    continued_evaluator,
    hurwitz_zeta,
    mean_square_table,
    periodic_hurwitz_zeta,
)

COMMANDS = ("eval", "smooth", "admissibility", "torus", "meanvalue", "scan")
PLOT_KINDS = ("density_vs_eps", "supnorm_histogram", "discrepancy_vs_N", "smoothing_error_vs_n")
EXIT_OK, EXIT_CONFIG, EXIT_INADMISSIBLE, EXIT_EVALUATOR = 0, 2, 3, 4
SIG_DIGITS = 12

Coefficient = float | tuple[float, float]


# --------------------------------------------------------------------------
# configuration models
# --------------------------------------------------------------------------


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class _Base(_Model):
    """Source of the experimental tuple plus run controls.

    Either a preset name, or an inline collection with an Euler-product label.
    """

    preset: str | None = "riemann-pi"
    collection: dict | None = None
    spec: str = "riemann"
    seed: int = 0
    workers: int | None = None

    @model_validator(mode="after")
    def _one_source(self):
        if (self.preset is None) == (self.collection is None):
            raise ValueError("give exactly one of 'preset' or 'collection'")
        return self

    def resolve(self):
        if self.preset is not None:
            p = preset(self.preset)
            return p.collection, p.spec, p.report
        return HurwitzCollection.from_dict(self.collection), spec_by_label(self.spec), None


def _sequence(values: list[Coefficient]) -> PeriodicSequence:
    return PeriodicSequence(tuple(complex(*v) if isinstance(v, (tuple, list)) else complex(v) for v in values))


class EvalConfig(_Base):
    function: Literal["phi", "hurwitz", "periodic"] = "phi"
    points: list[tuple[float, float]] = [(2.0, 0.0)]
    alpha: str = "1"
    sequence: list[Coefficient] = [1.0]


class SmoothConfig(_Base):
    s: tuple[float, float] = (0.9, 5.0)
    n_values: list[int] = [100, 1000, 10000]
    sigma0_star: float = DEFAULT_SIGMA0_STAR
    alpha: str = "1/3"
    sequence: list[Coefficient] = [1.0]


class AdmissibilityConfig(_Base):
    use_stored: bool = True
    subset_size: int = DEFAULT_SUBSET_SIZE
    precision_digits: int = DEFAULT_DIGITS
    max_coeff: int = DEFAULT_MAX_COEFF
    max_subsets: int | None = None
    P_cut: int = DEFAULT_P_CUT
    M_cut: int = DEFAULT_M_CUT


class TorusConfig(_Base):
    primes: list[int] = [2, 3, 5]
    Ns: list[int] = [1000, 10000, 100000]


class MeanSquareConfig(_Model):
    enabled: bool = True
    sigma0: float = 0.75
    Ts: list[float] = [1000.0, 3000.0, 5000.0]
    panels_per_unit: float = 10.0


class MeanValueConfig(_Base):
    sigma: float = 1.5
    N: int = 10000
    mc_samples: int = 10000
    n_smooth: int = 10
    tolerance_se: float = 3.0
    mean_square: MeanSquareConfig = Field(default_factory=MeanSquareConfig)


class GridConfig(_Model):
    shape: dict
    resolution: float = 0.01


class ScanConfig(_Base):
    grids: dict[str, GridConfig] = {
        "phi": GridConfig(shape={"disk": {"center": [0.85, 0.0], "radius": 0.03}}),
    }
    targets: dict[str, dict] = {
        "phi": {"kind": "exp_polynomial", "coeffs": [0.0, 0.1], "nonvanishing_required": True},
    }
    epsilon: float = 0.8
    epsilons: list[float] = list(DEFAULT_EPSILONS)
    N: int = 100000
    method: Literal["auto", "continued", "smoothed"] = "auto"
    n_smooth: int = 1000
    override: bool = False
    report: dict | None = None
    histogram_bins: int = 10
    dump_per_k: bool = False


CONFIG_MODELS: dict[str, type[_Base]] = {
    "eval": EvalConfig,
    "smooth": SmoothConfig,
    "admissibility": AdmissibilityConfig,
    "torus": TorusConfig,
    "meanvalue": MeanValueConfig,
    "scan": ScanConfig,
}


def default_config(command: str) -> dict:
    return CONFIG_MODELS[command]().model_dump(mode="json")


def load_config(command: str, path: str | None) -> _Base:
    if path is None:
        return CONFIG_MODELS[command]()
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    try:
        return CONFIG_MODELS[command].model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"invalid {command} config: {exc}") from exc


# --------------------------------------------------------------------------
# output formatting
# --------------------------------------------------------------------------


def _num(x: float) -> float | str:
    if not math.isfinite(x):
        return str(x)
    return float(f"{x:.{SIG_DIGITS}g}")


def rounded(obj):
    """JSON-ready copy with every number cut to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): rounded(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [rounded(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return rounded(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_num(obj.real), _num(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    return obj


def dumps(obj) -> str:
    return json.dumps(rounded(obj), indent=2, sort_keys=True) + "\n"


def emit_plot_data(result, kind: str, path: str | Path | None = None, **opts) -> str:
    """Delimited table with a header row for one plot kind.

    ``density_vs_eps`` and ``supnorm_histogram`` take a ScanResult;
    ``discrepancy_vs_N`` takes discrepancy_table rows and
    ``smoothing_error_vs_n`` the rows of the smooth command.
    """
    if kind not in PLOT_KINDS:
        raise ConfigError(f"unknown plot kind {kind!r}")
    if kind in ("density_vs_eps", "supnorm_histogram"):
        if not isinstance(result, ScanResult):
            raise ConfigError(f"{kind} needs a scan result")
        if kind == "density_vs_eps":
            header = ["epsilon", "density"]
            rows = [[e, result.density_at(e)] for e in opts.get("epsilons", DEFAULT_EPSILONS)]
        else:
            counts, edges = scan_profile(result, opts.get("bins", 10))
            header = ["bin_lo", "bin_hi", "count"]
            rows = [[lo, hi, int(c)] for lo, hi, c in zip(edges[:-1], edges[1:], counts)]
    else:
        keys = ["N", "discrepancy", "p"] if kind == "discrepancy_vs_N" else ["n", "phi_error", "zeta_error"]
        if not isinstance(result, list) or not all(isinstance(r, dict) and set(keys) <= set(r) for r in result):
            raise ConfigError(f"{kind} needs rows with keys {keys}")
        header = keys
        rows = [[r[k] for k in keys] for r in result]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, int) else f"{v:.{SIG_DIGITS}g}" for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


@dataclass
class Outcome:
    summary: dict
    plots: dict  # kind -> (result, opts)
    dumps: dict  # suffix -> csv text
    exit_code: int = EXIT_OK


def _cmd_eval(cfg: EvalConfig) -> Outcome:
    pts = np.array([complex(a, b) for a, b in cfg.points])
    if cfg.function == "phi":
        _, spec, _ = cfg.resolve()
        vals = continued_evaluator(spec)(pts)
    elif cfg.function == "hurwitz":
        vals = hurwitz_zeta(pts, evaluate(cfg.alpha))
    else:
        vals = periodic_hurwitz_zeta(pts, evaluate(cfg.alpha), _sequence(cfg.sequence))
    rows = [{"s": complex(s), "value": complex(v)} for s, v in zip(pts, np.atleast_1d(vals))]
    return Outcome({"function": cfg.function, "values": rows}, {}, {})


def _cmd_smooth(cfg: SmoothConfig) -> Outcome:
    _, spec, _ = cfg.resolve()
    s = complex(*cfg.s)
    alpha = evaluate(cfg.alpha)
    B = _sequence(cfg.sequence)
    phi_ref = continued_evaluator(spec)(s)
    zeta_ref = periodic_hurwitz_zeta(s, alpha, B)
    rows = []
    for n in cfg.n_values:
        params = SmoothingParams(int(n), cfg.sigma0_star)
        pv, zv = phi_n(s, spec, params), zeta_n(s, alpha, B, params)
        rows.append(
            {"n": int(n), "phi_n": pv, "phi_error": abs(pv - phi_ref), "zeta_n": zv, "zeta_error": abs(zv - zeta_ref)}
        )
    summary = {"s": s, "alpha": alpha, "phi_reference": phi_ref, "zeta_reference": zeta_ref, "rows": rows}
    return Outcome(summary, {"smoothing_error_vs_n": (rows, {})}, {})


def _cmd_admissibility(cfg: AdmissibilityConfig) -> Outcome:
    coll, _, stored = cfg.resolve()
    ranks = check_ranks(coll)
    if cfg.use_stored and stored is not None:
        report, source = stored, "stored"
    else:
        L = build_log_set(coll, cfg.P_cut, cfg.M_cut)
        report = relation_search(
            L, cfg.subset_size, cfg.precision_digits, cfg.max_coeff, cfg.max_subsets, cfg.seed, cfg.workers or default_workers()
        )
        source = "computed"
    ok = all(r["ok"] for r in ranks) and not report.found
    summary = {
        "admissible": ok,
        "ranks": ranks,
        "report_source": source,
        "report": report.to_dict(),
        "relation": report.relation_text() if report.found else None,
    }
    return Outcome(summary, {}, {}, EXIT_OK if ok else EXIT_INADMISSIBLE)


def _cmd_torus(cfg: TorusConfig) -> Outcome:
    coll, _, _ = cfg.resolve()
    rows = discrepancy_table(coll, tuple(cfg.primes), tuple(cfg.Ns))
    return Outcome({"discrepancy": rows}, {"discrepancy_vs_N": (rows, {})}, {})


def _cmd_meanvalue(cfg: MeanValueConfig) -> Outcome:
    coll, spec, _ = cfg.resolve()
    rep = compare_distributions(coll, spec, cfg.sigma, cfg.N, cfg.mc_samples, cfg.n_smooth, cfg.seed, cfg.tolerance_se)
    summary = {"moments": rep.to_dict()}
    ms = cfg.mean_square
    if ms.enabled:
        table = mean_square_table(continued_evaluator(spec), ms.sigma0, ms.Ts, ms.panels_per_unit)
        entry = {"sigma0": ms.sigma0, "rows": [{"T": T, "mean_square": v} for T, v in table]}
        if spec.label == "riemann":
            entry["reference"] = complex(hurwitz_zeta(2 * ms.sigma0, 1.0)).real
        summary["mean_square"] = entry
    return Outcome(summary, {}, {})


def _scan_inputs(cfg: ScanConfig, spec):
    grids, targets = {}, {}
    for name, g in cfg.grids.items():
        ambient = StripRegion(spec.sigma_star, 1.0) if name == "phi" else HURWITZ_STRIP
        grids[name] = grid_compact(shape_from_dict(g.shape), g.resolution, ambient)
    for name, t in cfg.targets.items():
        if name not in grids:
            raise ConfigError(f"target '{name}' has no grid")
        targets[name] = TargetFunction.from_dict(t, grids[name])
    return grids, targets


def _cmd_scan(cfg: ScanConfig) -> Outcome:
    coll, spec, report = cfg.resolve()
    if cfg.report is not None:
        report = RelationReport.from_dict(cfg.report)
    grids, targets = _scan_inputs(cfg, spec)
    result = scan_density(
        coll,
        spec,
        targets,
        grids,
        cfg.epsilon,
        cfg.N,
        report=report,
        override=cfg.override,
        method=cfg.method,
        n_smooth=cfg.n_smooth,
        workers=cfg.workers,
    )
    counts, edges = scan_profile(result, cfg.histogram_bins)
    summary = result.summary(cfg.epsilons)
    summary["histogram"] = {"counts": counts, "edges": edges}
    summary["grid_points"] = {n: len(g) for n, g in grids.items()}
    out_dumps = {}
    if cfg.dump_per_k:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "max_sup", *result.component_names])
        for k in range(result.N + 1):
            w.writerow([k, *(f"{v:.{SIG_DIGITS}g}" for v in (result.per_k_max_sup[k], *result.per_component_sup[k]))])
        out_dumps["per_k"] = buf.getvalue()
    plots = {
        "density_vs_eps": (result, {"epsilons": cfg.epsilons}),
        "supnorm_histogram": (result, {"bins": cfg.histogram_bins}),
    }
    return Outcome(summary, plots, out_dumps)


HANDLERS = {
    "eval": _cmd_eval,
    "smooth": _cmd_smooth,
    "admissibility": _cmd_admissibility,
    "torus": _cmd_torus,
    "meanvalue": _cmd_meanvalue,
    "scan": _cmd_scan,
}


# --------------------------------------------------------------------------
# manifest and entry point
# --------------------------------------------------------------------------


@dataclass
class RunManifest:
    command: str
    config_path: str | None = None
    out_path: str | None = None
    seed: int | None = None
    workers: int | None = None
    dump_default_config: bool = False

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.config_path is not None and not Path(self.config_path).is_file():
            raise ConfigError(f"config file {self.config_path} does not exist")
        if self.out_path is not None:
            parent = Path(self.out_path).resolve().parent
            if not parent.is_dir() or not os.access(parent, os.W_OK):
                raise ConfigError(f"output directory {parent} is not writable")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("--workers must be at least 1")


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, (ConfigError, GridError)):
        return EXIT_CONFIG
    if isinstance(exc, InadmissibleError):
        return EXIT_INADMISSIBLE
    return EXIT_EVALUATOR


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def run(manifest: RunManifest, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    try:
        manifest.validate()
        if manifest.dump_default_config:
            text = json.dumps(default_config(manifest.command), indent=2, sort_keys=True) + "\n"
            if manifest.out_path:
                Path(manifest.out_path).write_text(text)
            else:
                stdout.write(text)
            return EXIT_OK
        cfg = load_config(manifest.command, manifest.config_path)
        updates = {}
        if manifest.seed is not None:
            updates["seed"] = manifest.seed
        if manifest.workers is not None:
            updates["workers"] = manifest.workers
        cfg = cfg.model_copy(update=updates)
        outcome = HANDLERS[manifest.command](cfg)
    except ZetaLabError as exc:
        code = _exit_code(exc)
        stderr.write(json.dumps({"status": "error", "error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
        return code

    record = {
        "command": manifest.command,
        "seed": cfg.seed,
        "status": "ok" if outcome.exit_code == EXIT_OK else "inadmissible",
        "config": cfg.model_dump(mode="json", exclude={"workers"}),
        "result": outcome.summary,
    }
    text = dumps(record)
    if manifest.out_path is None:
        stdout.write(text)
    else:
        out = Path(manifest.out_path)
        out.write_text(text)
        stem = out.with_suffix("")
        for kind, (res, opts) in outcome.plots.items():
            emit_plot_data(res, kind, f"{stem}.{kind}.csv", **opts)
        for suffix, body in outcome.dumps.items():
            Path(f"{stem}.{suffix}.csv").write_text(body)
        meta = {
            "started": started.isoformat(),
            "finished": datetime.now(timezone.utc).isoformat(),
            "elapsed_seconds": time.perf_counter() - t0,
            "version": _version(),
            "workers": cfg.workers or default_workers(),
            "argv": sys.argv,
        }
        Path(f"{out}.meta.json").write_text(json.dumps(meta, indent=2) + "\n")
    return outcome.exit_code


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (defaults are used when omitted)")
    common.add_argument("--out", help="summary path; plot tables and .meta.json go beside it")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--workers", type=int, help="worker processes (default: $ZETALAB_WORKERS or 1)")
    common.add_argument("--dump-default-config", action="store_true", help="print the default config and exit")
    parser = argparse.ArgumentParser(prog="zetalab", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=f"{name} experiment")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    manifest = RunManifest(args.command, args.config, args.out, args.seed, args.workers, args.dump_default_config)
    return run(manifest)


if __name__ == "__main__":
    sys.exit(main())
