"""Experiment runner: deterministic CSV/JSON artifacts from a single config.

Commands and their artifacts (all written into --out DIR, plus manifest.json):

* localize       series.csv (replica, n, log_w, j, i, cesaro_j, cesaro_i,
                 argmax_x1..argmax_xd) and summary.json (gap estimate,
                 criterion verdict, fractional moment, Doob diagnostics).
* sweep          sweep.csv (epsilon, n, replicas, mean_gap, stderr,
                 localized_flag) and sweep.json (eps_bar bracket,
                 monotonicity report).
* second-moment  l2.csv (n, ew2, log_increment, classification).
* rates          rates.csv (y_1..y_d, ia, iq_mean, iq_stderr) and rates.json
                 (free-energy criterion verdict, per-point detail).
* example-d4     example_d4.json (certificate arithmetic and last-passage
                 statistics at y = (0.97, 0.01, 0.01, 0.01)).

Config is a JSON object with keys exactly matching RunConfig (all optional
except what the command needs): dim, n, replicas, seed, epsilon,
epsilon_grid, alpha, xi, out, memory_budget, common_noise, theta, resamples.
CLI flags override file keys.  `alpha` is the 2d-vector of step weights in
order e_1..e_d, -e_1..-e_d; `xi` is "shared_sign" or {"table": [[...], ...],
"probs": [...]} (probs optional, default uniform over rows).  Example:

    {"dim": 2, "epsilon": 0.9, "n": 100, "replicas": 200, "seed": 7}

Every command is a pure function of the resolved config: reruns produce
byte-identical data files (fixed column order, repr float formatting, sorted
JSON keys, no wall-clock seeding; the manifest's wall_time_seconds is the
one field that varies).  Exit codes: 0 success, 2 config error, 3 memory
budget exceeded, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__, rng
from .diagnostics import (
    classify_growth,
    doob_decompose,
    fractional_moment,
    second_moment_exact,
)
from .env import FiniteTable, PerturbedFamily, SharedSign, uniform_alpha
from .errors import InvariantViolation, ModelValidationError, ResourceBudgetError
from .rates import criterion_report, quenched_rate_estimate
from .sweep import epsilon_sweep, example_d4_verify
from .transfer import DEFAULT_MEMORY_BUDGET, batch_series_arrays, run_walk

SCHEMA_VERSION = "1"
EXAMPLE_D4_Y = (0.97, 0.01, 0.01, 0.01)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_INVARIANT = 4


class ConfigError(Exception):
    """Invalid or inconsistent run configuration (exit code 2)."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run parameters; the manifest records this verbatim.

    seed has a fixed default of 0 and is never taken from the wall clock.
    """

    command: str
    dim: int
    n: int
    replicas: int
    seed: int
    epsilon: float | None
    epsilon_grid: tuple[float, ...] | None
    alpha: tuple[float, ...] | None
    xi: object
    out: str
    memory_budget: int
    common_noise: bool
    theta: float
    resamples: int


_BASE_DEFAULTS = {
    "dim": None,
    "n": 100,
    "replicas": 200,
    "seed": 0,
    "epsilon": None,
    "epsilon_grid": None,
    "alpha": None,
    "xi": "shared_sign",
    "out": None,
    "memory_budget": DEFAULT_MEMORY_BUDGET,
    "common_noise": True,
    "theta": 0.5,
    "resamples": 256,
}
_COMMAND_DEFAULTS = {
    "example-d4": {"n": 400, "replicas": 50},
}
_CONFIG_KEYS = frozenset(_BASE_DEFAULTS)


def _parse_grid(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"epsilon_grid must be 'A:B:STEP', got {text!r}")
    try:
        a, b, step = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"epsilon_grid components must be numbers: {exc}") from exc
    if step <= 0:
        raise ConfigError(f"epsilon_grid step must be positive, got {step!r}")
    if b < a:
        raise ConfigError(f"epsilon_grid end {b!r} is below start {a!r}")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    if count > 10_000:
        raise ConfigError(f"epsilon_grid would have {count} points; cap is 10000")
    return tuple(round(a + k * step, 12) for k in range(count))


def _xi_object(spec):
    if spec == "shared_sign":
        return SharedSign()
    if isinstance(spec, dict) and "table" in spec:
        extra = set(spec) - {"table", "probs"}
        if extra:
            raise ConfigError(f"unknown xi table keys: {sorted(extra)}")
        vectors = np.asarray(spec["table"], dtype=np.float64)
        if "probs" in spec:
            probs = np.asarray(spec["probs"], dtype=np.float64)
        else:
            probs = np.full(vectors.shape[0], 1.0 / vectors.shape[0])
        return FiniteTable(vectors, probs)
    raise ConfigError(
        f'xi must be "shared_sign" or {{"table": [...], "probs": [...]}}, got {spec!r}'
    )


def _resolve(args: argparse.Namespace) -> RunConfig:
    merged = dict(_BASE_DEFAULTS)
    merged.update(_COMMAND_DEFAULTS.get(args.command, {}))

    if args.config is not None:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(file_cfg) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key, val in file_cfg.items():
            if val is not None:
                merged[key] = val

    for key in (
        "dim", "n", "replicas", "seed", "epsilon", "epsilon_grid",
        "out", "memory_budget", "common_noise", "theta", "resamples",
    ):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val

    if isinstance(merged["epsilon_grid"], str):
        merged["epsilon_grid"] = _parse_grid(merged["epsilon_grid"])
    elif merged["epsilon_grid"] is not None:
        try:
            merged["epsilon_grid"] = tuple(float(e) for e in merged["epsilon_grid"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"epsilon_grid must be a list of numbers: {exc}") from exc

    alpha = merged["alpha"]
    if alpha is not None:
        try:
            alpha = tuple(float(a) for a in alpha)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"alpha must be a list of numbers: {exc}") from exc
        if len(alpha) % 2 != 0 or len(alpha) < 2:
            raise ConfigError(f"alpha must have 2*dim entries, got {len(alpha)}")
        merged["alpha"] = alpha

    dim = merged["dim"]
    if dim is None:
        if alpha is not None:
            dim = len(alpha) // 2
        elif args.command == "example-d4":
            dim = 4
        else:
            dim = 2
    dim = int(dim)
    if dim < 1:
        raise ConfigError(f"dim must be >= 1, got {dim}")
    if alpha is not None and len(alpha) != 2 * dim:
        raise ConfigError(f"alpha has {len(alpha)} entries but dim={dim} needs {2 * dim}")
    merged["dim"] = dim

    for key, lo in (("n", 1), ("replicas", 1), ("memory_budget", 1), ("resamples", 1)):
        try:
            merged[key] = int(merged[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key} must be an integer: {exc}") from exc
        if merged[key] < lo:
            raise ConfigError(f"{key} must be >= {lo}, got {merged[key]}")
    merged["seed"] = int(merged["seed"])
    merged["theta"] = float(merged["theta"])
    if not 0.0 < merged["theta"] <= 1.0:
        raise ConfigError(f"theta must lie in (0, 1], got {merged['theta']!r}")
    if merged["epsilon"] is not None:
        merged["epsilon"] = float(merged["epsilon"])
    merged["common_noise"] = bool(merged["common_noise"])

    if merged["out"] is None:
        raise ConfigError("out directory is required (--out DIR or config key 'out')")
    merged["out"] = str(merged["out"])
    merged["command"] = args.command

    if merged["xi"] != "shared_sign" and not isinstance(merged["xi"], dict):
        raise ConfigError(f"xi must be \"shared_sign\" or a table object, got {merged['xi']!r}")

    return RunConfig(**merged)


def _require_epsilon(cfg: RunConfig) -> float:
    if cfg.epsilon is None:
        raise ConfigError(f"epsilon is required for {cfg.command} (--eps or config key 'epsilon')")
    return cfg.epsilon


def _family(cfg: RunConfig) -> PerturbedFamily:
    alpha = np.asarray(cfg.alpha, dtype=np.float64) if cfg.alpha is not None else uniform_alpha(cfg.dim)
    return PerturbedFamily(alpha=alpha, xi=_xi_object(cfg.xi))


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv_bytes(header: list[str], rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue().encode("utf-8")


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else None
    if isinstance(v, (int, np.integer)):
        return int(v)
    return v


def _json_bytes(obj) -> bytes:
    return (json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n").encode(
        "utf-8"
    )


def cmd_localize(cfg: RunConfig) -> dict[str, bytes]:
    eps = _require_epsilon(cfg)
    family = _family(cfg)
    model = family.model(eps, cfg.seed)
    keys = rng.replica_env_keys(cfg.seed, cfg.replicas)
    arrs = batch_series_arrays(model, keys, cfg.n, cfg.memory_budget)

    d = cfg.dim
    header = ["replica", "n", "log_w", "j", "i", "cesaro_j", "cesaro_i"] + [
        f"argmax_x{k + 1}" for k in range(d)
    ]
    rows = []
    for r in range(cfg.replicas):
        for k in range(cfg.n):
            rows.append(
                (r, k + 1, arrs["log_w"][r, k], arrs["j"][r, k], arrs["i"][r, k],
                 arrs["cesaro_j"][r, k], arrs["cesaro_i"][r, k], *arrs["argmax"][r, k])
            )

    crit = criterion_report(family, eps, cfg.n, cfg.replicas, cfg.seed, cfg.memory_budget)
    frac = fractional_moment(
        family, eps, cfg.n, cfg.theta, cfg.replicas, cfg.seed, cfg.memory_budget
    )
    series = run_walk(model, cfg.n, cfg.memory_budget)
    doob = doob_decompose(series, model, resamples=cfg.resamples, memory_budget=cfg.memory_budget)
    split_err = float(np.abs(doob.m + doob.a + series.log_w).max())
    summary = {
        "gap": asdict(crit.gap),
        "criterion": {
            "inf_ia": crit.inf_ia,
            "inf_iq_est": crit.inf_iq_est,
            "inf_iq_stderr": crit.inf_iq_stderr,
            "verdict": crit.verdict,
            "confidence_sigmas": crit.confidence_sigmas,
            "exact": crit.exact,
        },
        "fractional_moment": {"theta": cfg.theta, "value": frac},
        "doob": {
            "resamples": doob.resamples,
            "split_residual_max": split_err,
            "ratio_applicable": doob.ratio_applicable,
            "ratio_bound": doob.ratio_bound,
            "ratio_range": [float(doob.ratio.min()), float(doob.ratio.max())],
            "ratio_ok_fraction": float(doob.ratio_ok.mean()),
            "neglogw_over_cumi_range": [
                float(doob.neglogw_over_cumi.min()),
                float(doob.neglogw_over_cumi.max()),
            ],
        },
    }
    return {"series.csv": _csv_bytes(header, rows), "summary.json": _json_bytes(summary)}


def cmd_sweep(cfg: RunConfig) -> dict[str, bytes]:
    if cfg.epsilon_grid is None:
        raise ConfigError("sweep needs an epsilon grid (--eps-grid A:B:STEP or config key)")
    family = _family(cfg)
    table = epsilon_sweep(
        family,
        cfg.epsilon_grid,
        cfg.n,
        cfg.replicas,
        cfg.seed,
        common_noise=cfg.common_noise,
        memory_budget=cfg.memory_budget,
    )
    header = ["epsilon", "n", "replicas", "mean_gap", "stderr", "localized_flag"]
    rows = [
        (row.epsilon, row.gap.n, row.gap.replicas, row.gap.mean_gap, row.gap.stderr, row.localized)
        for row in table.rows
    ]
    report = {
        "eps_bar_est": table.eps_bar_est,
        "eps_bar_bracket": list(table.eps_bar_bracket) if table.eps_bar_bracket else None,
        "threshold": table.threshold,
        "monotonicity_violations": [
            {"eps_lo": a, "eps_hi": b, "excess": ex} for a, b, ex in table.monotonicity_violations
        ],
        "common_noise": table.common_noise,
        "grid": list(cfg.epsilon_grid),
        "n": cfg.n,
        "replicas": cfg.replicas,
        "seed": cfg.seed,
    }
    return {"sweep.csv": _csv_bytes(header, rows), "sweep.json": _json_bytes(report)}


def cmd_second_moment(cfg: RunConfig) -> dict[str, bytes]:
    eps = _require_epsilon(cfg)
    family = _family(cfg)
    model = family.model(eps, cfg.seed)
    curve = second_moment_exact(model, cfg.n, cfg.memory_budget)
    tag = classify_growth(curve).tag if cfg.n >= 20 else "unclassified"
    increments = np.diff(np.concatenate([[0.0], curve.log_ew2]))
    header = ["n", "ew2", "log_increment", "classification"]
    rows = [
        (int(curve.n[k]), curve.ew2[k], increments[k], tag) for k in range(cfg.n)
    ]
    return {"l2.csv": _csv_bytes(header, rows)}


def cmd_rates(cfg: RunConfig) -> dict[str, bytes]:
    eps = _require_epsilon(cfg)
    family = _family(cfg)
    model = family.model(eps, cfg.seed)
    q_hat = model.stats.q_plus / model.stats.c
    e1 = np.zeros(cfg.dim)
    e1[0] = 1.0
    ts = np.linspace(0.0, 1.0, 9)
    ys = [(1.0 - t) * q_hat + t * e1 for t in ts]

    header = [f"y_{k + 1}" for k in range(cfg.dim)] + ["ia", "iq_mean", "iq_stderr"]
    rows = []
    detail = []
    for y in ys:
        rep = quenched_rate_estimate(
            y, family, eps, cfg.n, cfg.replicas, cfg.seed, cfg.memory_budget
        )
        rows.append((*rep.y, rep.ia, rep.iq_mean, rep.iq_stderr))
        detail.append(
            {
                "y": list(rep.y),
                "x_used": list(rep.x_used),
                "ia": rep.ia,
                "iq_mean": rep.iq_mean,
                "iq_stderr": rep.iq_stderr,
                "ia_finite_n": rep.ia_finite_n,
                "correction": rep.correction,
            }
        )
    crit = criterion_report(family, eps, cfg.n, cfg.replicas, cfg.seed, cfg.memory_budget)
    report = {
        "criterion": {
            "inf_ia": crit.inf_ia,
            "inf_iq_est": crit.inf_iq_est,
            "inf_iq_stderr": crit.inf_iq_stderr,
            "verdict": crit.verdict,
            "confidence_sigmas": crit.confidence_sigmas,
            "exact": crit.exact,
        },
        "points": detail,
        "n": cfg.n,
        "replicas": cfg.replicas,
        "seed": cfg.seed,
    }
    return {"rates.csv": _csv_bytes(header, rows), "rates.json": _json_bytes(report)}


def cmd_example_d4(cfg: RunConfig) -> dict[str, bytes]:
    eps = _require_epsilon(cfg)
    if cfg.dim != 4:
        raise ConfigError(f"example-d4 runs the 4-dimensional certificate; got dim={cfg.dim}")
    report = example_d4_verify(
        EXAMPLE_D4_Y,
        eps,
        cfg.n,
        cfg.replicas,
        seed=cfg.seed,
        alpha=cfg.alpha,
        memory_budget=cfg.memory_budget,
    )
    payload = {
        "y": list(report.y),
        "epsilon": report.epsilon,
        "n": report.n_steps,
        "seeds": cfg.replicas,
        "f_y": report.f_y,
        "ia_y": report.ia_y,
        "a_star": report.a_star,
        "mu": report.mu,
        "bound_margin": report.bound_margin,
        "lpp": {
            "values": list(report.lpp_values),
            "mean": report.lpp_mean,
            "max": max(report.lpp_values),
            "threshold": report.lpp_threshold,
            "frac_within": report.frac_within,
        },
        "verdict": report.verdict,
    }
    return {"example_d4.json": _json_bytes(payload)}


_COMMANDS = {
    "localize": cmd_localize,
    "sweep": cmd_sweep,
    "second-moment": cmd_second_moment,
    "rates": cmd_rates,
    "example-d4": cmd_example_d4,
}


def _write_outputs(cfg: RunConfig, files: dict[str, bytes], wall_time: float) -> list[Path]:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    outputs = []
    for name in sorted(files):
        data = files[name]
        path = out / name
        path.write_bytes(data)
        written.append(path)
        outputs.append(
            {"name": name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}
        )
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "command": cfg.command,
        "config": asdict(cfg),
        "outputs": outputs,
        "wall_time_seconds": wall_time,
    }
    mpath = out / "manifest.json"
    mpath.write_bytes(_json_bytes(manifest))
    written.append(mpath)
    return written


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config file; flags override it")
    common.add_argument("--dim", type=int, help="lattice dimension d")
    common.add_argument("--n", type=int, help="number of steps")
    common.add_argument("--replicas", type=int, help="independent environment count")
    common.add_argument("--seed", type=int, help="master seed (fixed default 0)")
    common.add_argument("--eps", type=float, dest="epsilon", help="disorder strength in [0, 1)")
    common.add_argument(
        "--eps-grid", dest="epsilon_grid", metavar="A:B:STEP", help="inclusive epsilon grid"
    )
    common.add_argument("--out", help="output directory (created if missing)")
    common.add_argument("--theta", type=float, help="fractional moment order in (0, 1]")
    common.add_argument("--resamples", type=int, help="conditional-moment resample count")
    common.add_argument(
        "--common-noise",
        action=argparse.BooleanOptionalAction,
        default=None,
        dest="common_noise",
        help="reuse replica noise across sweep grid points",
    )
    common.add_argument(
        "--memory-budget", type=int, dest="memory_budget", metavar="BYTES",
        help="refuse allocations beyond this many bytes",
    )

    parser = argparse.ArgumentParser(
        prog="rwre-boundary",
        description="Deterministic localization experiments for directed walks in random environments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("localize", parents=[common], help="per-replica W_n / J_n / I_n series and verdict")
    sub.add_parser("sweep", parents=[common], help="gap vs epsilon over a grid, threshold bracket")
    sub.add_parser("second-moment", parents=[common], help="exact E[W_n^2] growth curve")
    sub.add_parser("rates", parents=[common], help="annealed vs quenched rate profiles")
    sub.add_parser("example-d4", parents=[common], help="strong-disorder certificate at d=4")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        cfg = _resolve(args)
        files = _COMMANDS[cfg.command](cfg)
        written = _write_outputs(cfg, files, wall_time=time.perf_counter() - start)
    except (ConfigError, ModelValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceBudgetError as exc:
        print(f"resource budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
