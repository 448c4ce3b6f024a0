"""Experiment orchestration and command-line interface.

Configurations are flat key=value text files (CLI flags override file
values).  Results are written as CSV with a fixed, sorted schema so that
reruns with the same config and seed produce byte-identical output.

Exit codes: 0 success, 2 configuration error, 3 budget exceeded.
The environment variable NBL_SEED provides the default master seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import bounds as bounds_mod
from . import coupling as coupling_mod
from . import grid as grid_mod
from . import sigma as sigma_mod
from . import xorcode as xorcode_mod
from .model import AND2, IDENTITY, NAND2, OR2, XOR2, BudgetExceededError, Gate, LayerSchedule

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "run",
    "threshold_bisect",
    "main",
]

MODELS = (
    "random-dag-maj3",
    "random-dag-andor2",
    "grid-and",
    "grid-xor",
    "percolation",
    "bounds",
)

METRICS = (
    "tv_exact",
    "tv_mc",
    "ml_error",
    "mi_bits",
    "coalesce_prob",
    "erasure_fail",
    "bound_value",
)

CSV_HEADER = [
    "model",
    "delta",
    "k",
    "L_k",
    "metric",
    "value",
    "ci_low",
    "ci_high",
    "seed",
    "trials",
]

GRID_GATES = {"and": AND2, "or": OR2, "xor": XOR2, "nand": NAND2}


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: model, parameter sweep, sizes, seed, output path.

    For the ``percolation`` model the delta fields carry the edge-open
    probability p (and may therefore exceed 1/2).
    """

    model: str = "random-dag-maj3"
    delta_start: float = 0.1
    delta_stop: float = 0.1
    delta_count: int = 1
    depth: int = 50
    schedule: str = "const:64"
    trials: int = 0
    seed: int = 0
    out: str = ""
    budget: int = 4096
    tv_epsilon: float = 0.01
    d: int = 3

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ConfigError(f"field model: unknown model {self.model!r}")
        if self.delta_count < 1:
            raise ConfigError("field delta_count: must be >= 1")
        for name in ("delta_start", "delta_stop"):
            v = getattr(self, name)
            if self.model == "percolation":
                ok = 0.0 <= v <= 1.0
            else:
                ok = 0.0 < v < 0.5
            if not ok:
                raise ConfigError(f"field {name}: {v} out of range")
        if self.depth < 1:
            raise ConfigError("field depth: must be >= 1")
        if self.trials < 0:
            raise ConfigError("field trials: must be >= 0")
        if self.budget < 1:
            raise ConfigError("field budget: must be >= 1")
        if self.d < 1:
            raise ConfigError("field d: must be >= 1")
        try:
            LayerSchedule.parse(self.schedule)
        except ValueError as exc:
            raise ConfigError(f"field schedule: {exc}") from exc

    def deltas(self) -> np.ndarray:
        if self.delta_count == 1:
            return np.array([self.delta_start])
        return np.linspace(self.delta_start, self.delta_stop, self.delta_count)

    def to_text(self) -> str:
        lines = [f"{f.name}={getattr(self, f.name)}" for f in fields(self)]
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "ExperimentConfig":
        kwargs = {}
        types = {
            f.name: (f.type if isinstance(f.type, str) else f.type.__name__)
            for f in fields(ExperimentConfig)
        }
        casts = {"float": float, "int": int, "str": str}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in types:
                raise ConfigError(f"line {lineno}: unknown field {key!r}")
            try:
                kwargs[key] = casts[types[key]](value.strip())
            except ValueError as exc:
                raise ConfigError(f"line {lineno}: field {key}: {exc}") from exc
        cfg = ExperimentConfig(**kwargs)
        cfg.validate()
        return cfg

    @staticmethod
    def from_file(path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return ExperimentConfig.from_text(fh.read())


@dataclass(frozen=True)
class ResultRow:
    model: str
    delta: float
    k: int
    L_k: int
    metric: str
    value: float
    ci_low: float
    ci_high: float
    seed: int
    trials: int

    def __post_init__(self) -> None:
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if not (self.ci_low <= self.value <= self.ci_high) and not math.isnan(self.value):
            raise ValueError("value must lie inside its confidence interval")


def _exact_row(model, delta, k, L_k, metric, value, seed):
    return ResultRow(model, float(delta), k, L_k, metric, float(value), float(value), float(value), seed, 0)


def rows_to_csv(rows: list[ResultRow]) -> str:
    """Serialize rows deterministically (sorted, LF endings, repr floats)."""
    ordered = sorted(rows, key=lambda r: (r.model, r.delta, r.k, r.metric))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in ordered:
        writer.writerow(
            [r.model, repr(r.delta), r.k, r.L_k, r.metric, repr(r.value), repr(r.ci_low), repr(r.ci_high), r.seed, r.trials]
        )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# Experiment drivers


def _run_dag_model(config: ExperimentConfig) -> tuple[list[ResultRow], list[str]]:
    model = "maj3" if config.model == "random-dag-maj3" else "andor2"
    schedule = LayerSchedule.parse(config.schedule)
    rows: list[ResultRow] = []
    finals: list[tuple[float, float]] = []
    for delta in config.deltas():
        chain = sigma_mod.exact_chain(model, float(delta), schedule, config.depth, config.budget)
        report_levels = [
            d for d in chain[1:] if model == "maj3" or d.level % 2 == 0
        ]
        for dist in report_levels:
            t = sigma_mod.tv(dist)
            rows.append(_exact_row(config.model, delta, dist.level, dist.L, "tv_exact", t, config.seed))
            rows.append(_exact_row(config.model, delta, dist.level, dist.L, "ml_error", sigma_mod.ml_error(dist), config.seed))
            rows.append(
                _exact_row(config.model, delta, dist.level, dist.L, "mi_bits", sigma_mod.mutual_information(dist), config.seed)
            )
        finals.append((float(delta), sigma_mod.tv(report_levels[-1])))
    summary = [f"{config.model}: exact chain to depth {config.depth}, schedule {config.schedule}"]
    crossing = next((d for d, t in finals if t < config.tv_epsilon), None)
    if crossing is not None:
        below = [d for d, t in finals if t >= config.tv_epsilon and d < crossing]
        lo = max(below) if below else None
        if lo is not None:
            summary.append(
                f"threshold crossing: final-level TV drops below {config.tv_epsilon} "
                f"between delta={lo:g} and delta={crossing:g}"
            )
        else:
            summary.append(f"final-level TV already below {config.tv_epsilon} at delta={crossing:g}")
    else:
        summary.append(f"no crossing: final-level TV stays >= {config.tv_epsilon} on the sweep")
    return rows, summary


def _run_grid_model(config: ExperimentConfig) -> tuple[list[ResultRow], list[str]]:
    f1 = XOR2 if config.model == "grid-xor" else AND2
    rows: list[ResultRow] = []
    summary = [f"{config.model}: exact DP to depth {min(config.depth, grid_mod.DEFAULT_DEPTH_CAP)}"]
    for delta in config.deltas():
        dp_depth = min(config.depth, grid_mod.DEFAULT_DEPTH_CAP)
        dists = grid_mod.grid_exact_distribution(f1, IDENTITY, float(delta), dp_depth)
        for dist in dists:
            rows.append(_exact_row(config.model, delta, dist.level, dist.level + 1, "tv_exact", dist.tv(), config.seed))
            rows.append(_exact_row(config.model, delta, dist.level, dist.level + 1, "ml_error", dist.ml_error(), config.seed))
        if config.trials > 0:
            for est in grid_mod.grid_mc_tv_estimate(f1, IDENTITY, float(delta), dp_depth, config.trials, config.seed):
                rows.append(
                    ResultRow(
                        config.model,
                        float(delta),
                        est.level,
                        est.level + 1,
                        "tv_mc",
                        est.tv,
                        max(0.0, est.tv - 3 * est.dev),
                        min(1.0, est.tv + 3 * est.dev),
                        config.seed,
                        config.trials,
                    )
                )
        if config.model == "grid-xor" and config.trials > 0:
            est = xorcode_mod.erasure_mc_error_bound(config.depth, float(delta), config.trials, config.seed)
            rows.append(
                ResultRow(
                    config.model,
                    float(delta),
                    config.depth,
                    config.depth + 1,
                    "erasure_fail",
                    est.failure_freq,
                    2 * est.ci_low,
                    2 * est.ci_high,
                    config.seed,
                    config.trials,
                )
            )
            summary.append(
                f"delta={float(delta):g}: erasure failure frequency {est.failure_freq:.4f} at k={config.depth} "
                f"(ML error lower bound {est.error_bound:.4f})"
            )
    return rows, summary


def _run_coupling_model(config: ExperimentConfig) -> tuple[list[ResultRow], list[str]]:
    rows: list[ResultRow] = []
    summary: list[str] = []
    trials = config.trials or 1000
    for delta in config.deltas():
        bound = coupling_mod.coupling_tv_bound(float(delta), config.depth, trials, config.seed)
        for k in bound.levels:
            rows.append(
                ResultRow(
                    "grid-and",
                    float(delta),
                    int(k),
                    int(k) + 1,
                    "coalesce_prob",
                    float(bound.bound[k]),
                    float(bound.ci_low[k]),
                    float(bound.ci_high[k]),
                    config.seed,
                    trials,
                )
            )
        frac = float(bound.bound[-1])
        summary.append(
            f"delta={float(delta):g}: P(T > {config.depth}) = {frac:.4f} over {trials} coupled runs"
        )
    return rows, summary


def _run_percolation(config: ExperimentConfig) -> tuple[list[ResultRow], list[str]]:
    rows: list[ResultRow] = []
    summary: list[str] = []
    trials = config.trials or 500
    for p in config.deltas():
        est = coupling_mod.estimate_alpha(float(p), config.depth, trials, config.seed)
        surv = est.surviving / trials
        from .stats import wilson_interval

        lo, hi = wilson_interval(est.surviving, trials)
        rows.append(
            ResultRow("percolation", float(p), config.depth, config.depth + 1, "bound_value", surv, lo, hi, config.seed, trials)
        )
        if est.surviving:
            summary.append(
                f"p={float(p):g}: survival {surv:.3f}, alpha estimate {est.alpha:.4f} "
                f"(+/- {est.std:.4f} across {est.surviving} surviving runs)"
            )
        else:
            summary.append(f"p={float(p):g}: no run survived to depth {config.depth}")
    return rows, summary


def _run_bounds(config: ExperimentConfig) -> tuple[list[ResultRow], list[str]]:
    schedule = LayerSchedule.parse(config.schedule)
    rows: list[ResultRow] = []
    for delta in config.deltas():
        for k in range(config.depth + 1):
            val = bounds_mod.evans_schulman(schedule.size(k), float(delta), config.d, k)
            rows.append(_exact_row("bounds", delta, k, schedule.size(k), "bound_value", val, config.seed))
    summary = [
        f"bounds: d={config.d}, delta_es={bounds_mod.delta_es(config.d):.5f}, "
        f"bond_bound={bounds_mod.bond_bound(config.d):.5f}"
    ]
    return rows, summary


def run(config: ExperimentConfig) -> tuple[list[ResultRow], str]:
    """Execute a config, write CSV if requested, return rows and summary."""
    config.validate()
    driver = {
        "random-dag-maj3": _run_dag_model,
        "random-dag-andor2": _run_dag_model,
        "grid-and": _run_grid_model,
        "grid-xor": _run_grid_model,
        "percolation": _run_percolation,
        "bounds": _run_bounds,
    }[config.model]
    rows, summary_lines = driver(config)
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(rows_to_csv(rows))
        summary_lines.append(f"wrote {len(rows)} rows to {config.out}")
    return rows, "\n".join(summary_lines)


# ---------------------------------------------------------------------------
# Threshold bisection


def threshold_bisect(
    model: str,
    schedule: LayerSchedule,
    depth: int,
    tol: float = 2e-3,
    cutoff: float = 0.01,
    delta_lo: float = 0.05,
    delta_hi: float = 0.45,
    budget: int = 4096,
) -> tuple[float, float]:
    """Bisect delta on the criterion "final-level exact TV < cutoff".

    The exact chain's deep-level TV is (weakly) decreasing in delta, so
    the criterion is monotone and bisection brackets the crossing.  For
    the andor2 model the TV is read at the last even level.  Returns
    (lo, hi) with criterion False at lo and True at hi; if the criterion
    holds nowhere the bracket collapses to the upper end, and if it holds
    everywhere to the lower end.
    """

    def criterion(delta: float) -> bool:
        chain = sigma_mod.exact_chain(model, delta, schedule, depth, budget)
        dist = chain[-1]
        if model == sigma_mod.MODEL_ANDOR2 and dist.level % 2 == 1:
            dist = chain[-2]
        return sigma_mod.tv(dist) < cutoff

    if criterion(delta_lo):
        return (delta_lo, delta_lo)
    if not criterion(delta_hi):
        return (delta_hi, delta_hi)
    lo, hi = delta_lo, delta_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if criterion(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


# ---------------------------------------------------------------------------
# Command-line interface


def _default_seed() -> int:
    try:
        return int(os.environ.get("NBL_SEED", "0"))
    except ValueError:
        return 0


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="master seed (default: NBL_SEED or 0)")
    parser.add_argument("--out", default="", help="CSV output path")
    parser.add_argument("--threads", type=int, default=1, help="accepted for compatibility; results are thread-count independent")
    parser.add_argument("--budget", type=int, default=4096, help="max layer size for exact kernels")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dagbroadcast", description="Noisy broadcast on DAGs and grids: exact analysis and Monte Carlo.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixed-points", help="closed-form fixed points of the g-curve")
    _add_common(p)
    p.add_argument("--model", choices=["maj3", "andor2"], required=True)
    p.add_argument("--delta", type=float, required=True)

    p = sub.add_parser("exact-chain", help="exact conditional chain for one delta")
    _add_common(p)
    p.add_argument("--model", choices=["maj3", "andor2"], required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--schedule", default="const:64")
    p.add_argument("--depth", type=int, default=50)

    p = sub.add_parser("mc-chain", help="coupled Monte Carlo of the annealed chain")
    _add_common(p)
    p.add_argument("--model", choices=["maj3", "andor2"], required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--schedule", default="const:64")
    p.add_argument("--depth", type=int, default=30)
    p.add_argument("--trials", type=int, default=1000)

    p = sub.add_parser("grid-exact", help="exact 2D grid DP for a gate")
    _add_common(p)
    p.add_argument("--gate", choices=sorted(GRID_GATES), required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--trials", type=int, default=0, help="also run the MC cross-check with this many trials")

    p = sub.add_parser("grid-and-couple", help="coupled AND-grid coalescence bound")
    _add_common(p)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--depth", type=int, default=200)
    p.add_argument("--trials", type=int, default=1000)

    p = sub.add_parser("grid-xor", help="XOR-grid parity-check certificates and erasure MC")
    _add_common(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--export-h", default="", help="write the parity-check matrix to this path")

    p = sub.add_parser("percolation", help="oriented bond percolation diagnostics")
    _add_common(p)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--depth", type=int, default=300)
    p.add_argument("--trials", type=int, default=500)

    p = sub.add_parser("bounds", help="closed-form impossibility bounds")
    _add_common(p)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--depth", type=int, default=20)
    p.add_argument("--schedule", default="const:16")

    p = sub.add_parser("sweep", help="run a config file (flags override fields)")
    _add_common(p)
    p.add_argument("--config", default="")
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--delta-start", type=float)
    p.add_argument("--delta-stop", type=float)
    p.add_argument("--delta-count", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--schedule")
    p.add_argument("--trials", type=int)

    p = sub.add_parser("bisect", help="bisect the reconstruction threshold")
    _add_common(p)
    p.add_argument("--model", choices=["maj3", "andor2"], required=True)
    p.add_argument("--schedule", default="const:128")
    p.add_argument("--depth", type=int, default=150)
    p.add_argument("--tol", type=float, default=2e-3)
    p.add_argument("--cutoff", type=float, default=0.01)
    p.add_argument("--delta-lo", type=float, default=0.05)
    p.add_argument("--delta-hi", type=float, default=0.45)

    return parser


def _seed_of(args: argparse.Namespace) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _cmd_fixed_points(args) -> int:
    report = sigma_mod.fixed_points(args.model, args.delta)
    print(f"model={report.model} delta={report.delta:g} lipschitz={report.lipschitz:.6f}")
    for pt in report.points:
        kind = "stable" if pt.stable else "unstable"
        print(f"  fixed point {pt.value:.10f} ({kind})")
    return 0


def _cmd_single_delta(args, model_name: str) -> int:
    config = ExperimentConfig(
        model=model_name,
        delta_start=args.delta,
        delta_stop=args.delta,
        depth=args.depth,
        schedule=args.schedule,
        seed=_seed_of(args),
        out=args.out,
        budget=args.budget,
    )
    _, summary = run(config)
    print(summary)
    return 0


def _cmd_mc_chain(args) -> int:
    schedule = LayerSchedule.parse(args.schedule)
    stats = sigma_mod.coupled_mc(args.model, args.delta, schedule, args.depth, args.trials, _seed_of(args))
    print(
        f"coupled chains: model={args.model} delta={args.delta:g} trials={args.trials} "
        f"monotone_fraction={stats.monotone_fraction:.6f}"
    )
    rows = []
    for i, k in enumerate(stats.levels):
        print(
            f"  k={int(k):3d} P(unequal)={stats.prob_unequal[i]:.4f} "
            f"E[gap]={stats.mean_gap[i]:.6f} (sem {stats.sem_gap[i]:.2g})"
        )
        model_name = "random-dag-maj3" if args.model == "maj3" else "random-dag-andor2"
        rows.append(
            ResultRow(
                model_name,
                args.delta,
                int(k),
                schedule.size(int(k)),
                "tv_mc",
                float(stats.prob_unequal[i]),
                max(0.0, float(stats.prob_unequal[i]) - 3 / math.sqrt(args.trials)),
                min(1.0, float(stats.prob_unequal[i]) + 3 / math.sqrt(args.trials)),
                _seed_of(args),
                args.trials,
            )
        )
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(rows_to_csv(rows))
    return 0


def _cmd_grid_exact(args) -> int:
    model = "grid-xor" if args.gate == "xor" else "grid-and"
    f1 = GRID_GATES[args.gate]
    dists = grid_mod.grid_exact_distribution(f1, IDENTITY, args.delta, args.depth)
    rows = []
    for dist in dists:
        print(f"  k={dist.level:2d} tv={dist.tv():.8f} ml_error={dist.ml_error():.8f}")
        rows.append(_exact_row(model, args.delta, dist.level, dist.level + 1, "tv_exact", dist.tv(), _seed_of(args)))
    if args.trials > 0:
        for est in grid_mod.grid_mc_tv_estimate(f1, IDENTITY, args.delta, args.depth, args.trials, _seed_of(args)):
            print(f"  k={est.level:2d} tv_mc={est.tv:.6f} (+/- 3*{est.dev:.6f})")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(rows_to_csv(rows))
    return 0


def _cmd_grid_and_couple(args) -> int:
    config = ExperimentConfig(
        model="grid-and",
        delta_start=args.delta,
        delta_stop=args.delta,
        depth=args.depth,
        trials=args.trials,
        seed=_seed_of(args),
        out=args.out,
    )
    rows, summary = _run_coupling_model(config)
    print("\n".join(summary))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(rows_to_csv(rows))
    return 0


def _cmd_grid_xor(args) -> int:
    h, idx = xorcode_mod.build_Hk(args.k)
    lucas = [xorcode_mod.binom_parity(args.k, j) for j in range(args.k + 1)]
    col_ok = all(h.get(j, 0) == lucas[j] for j in range(args.k + 1))
    print(f"H_{args.k}: {h.nrows} rows x {h.ncols} cols; root column matches Lucas parities: {col_ok}")
    if args.k >= 2 and args.k & (args.k - 1) == 0:
        print(f"weight-3 certificate annihilated: {xorcode_mod.check_omega(args.k)}")
    if args.trials > 0:
        est = xorcode_mod.erasure_mc_error_bound(args.k, args.delta, args.trials, _seed_of(args))
        print(
            f"erasure failure frequency {est.failure_freq:.4f} "
            f"(ML error lower bound {est.error_bound:.4f}, CI [{est.ci_low:.4f}, {est.ci_high:.4f}])"
        )
    if args.export_h:
        with open(args.export_h, "w", encoding="utf-8", newline="") as fh:
            fh.write(xorcode_mod.export_parity_check(h))
        print(f"wrote parity-check matrix to {args.export_h}")
    return 0


def _cmd_percolation(args) -> int:
    config = ExperimentConfig(
        model="percolation",
        delta_start=args.p,
        delta_stop=args.p,
        depth=args.depth,
        trials=args.trials,
        seed=_seed_of(args),
        out=args.out,
    )
    _, summary = run(config)
    print(summary)
    return 0


def _cmd_bounds(args) -> int:
    config = ExperimentConfig(
        model="bounds",
        delta_start=args.delta,
        delta_stop=args.delta,
        depth=args.depth,
        schedule=args.schedule,
        seed=_seed_of(args),
        out=args.out,
        d=args.d,
    )
    _, summary = run(config)
    print(summary)
    schedule = LayerSchedule.parse(args.schedule)
    if args.depth >= 2:
        thr = bounds_mod.slow_growth_threshold(args.depth, args.d, args.delta)
        print(f"slow-growth threshold at k={args.depth}: {thr:.4f} (L_k={schedule.size(args.depth)})")
    return 0


def _cmd_sweep(args) -> int:
    config = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    overrides = {}
    for field_name, arg_name in [
        ("model", "model"),
        ("delta_start", "delta_start"),
        ("delta_stop", "delta_stop"),
        ("delta_count", "delta_count"),
        ("depth", "depth"),
        ("schedule", "schedule"),
        ("trials", "trials"),
    ]:
        value = getattr(args, arg_name)
        if value is not None:
            overrides[field_name] = value
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out:
        overrides["out"] = args.out
    overrides["budget"] = args.budget
    config = replace(config, **overrides)
    if config.seed == 0 and args.seed is None:
        config = replace(config, seed=_default_seed())
    _, summary = run(config)
    print(summary)
    return 0


def _cmd_bisect(args) -> int:
    schedule = LayerSchedule.parse(args.schedule)
    lo, hi = threshold_bisect(
        args.model,
        schedule,
        args.depth,
        tol=args.tol,
        cutoff=args.cutoff,
        delta_lo=args.delta_lo,
        delta_hi=args.delta_hi,
        budget=args.budget,
    )
    print(f"bracket: [{lo:.6f}, {hi:.6f}] (width {hi - lo:.2g})")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "fixed-points":
            return _cmd_fixed_points(args)
        if args.command == "exact-chain":
            model_name = "random-dag-maj3" if args.model == "maj3" else "random-dag-andor2"
            return _cmd_single_delta(args, model_name)
        if args.command == "mc-chain":
            return _cmd_mc_chain(args)
        if args.command == "grid-exact":
            return _cmd_grid_exact(args)
        if args.command == "grid-and-couple":
            return _cmd_grid_and_couple(args)
        if args.command == "grid-xor":
            return _cmd_grid_xor(args)
        if args.command == "percolation":
            return _cmd_percolation(args)
        if args.command == "bounds":
            return _cmd_bounds(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "bisect":
            return _cmd_bisect(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
