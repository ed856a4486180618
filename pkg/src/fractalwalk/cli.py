"""Command-line front end: generation, analysis, sweeps, and the acceptance battery.

Every command resolves its configuration, writes its outputs plus a
``<command>-manifest.json`` echoing the resolved configuration into the output
directory, and prints a short human summary.  Outputs are deterministic
functions of the configuration (no timestamps, atomic writes), so re-running a
command — directly or via ``--from-manifest`` — reproduces the bytes exactly.

Exit codes: 0 success, 1 analysis failure (failed criteria or sweep cells),
2 configuration error.  ``FRACTALWALK_OUTPUT_DIR`` sets the default output
directory; no other environment variables are read.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import enum
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, analysis, fbm, fractal, predictors, verify
from .errors import ConfigurationError, SamplingBudgetError
from .generators import Family, FlipMode, GeneratorSpec, generate, generate_batch
from .seeding import derive_seed
from .seqio import atomic_write_bytes, read_binary, read_csv, write_binary, write_csv
from .sequences import BitSequence, Interval, IntSequence

__all__ = ["run", "main", "build_parser"]


# ---------------------------------------------------------------------------
# Serialization helpers


def _jsonable(obj):
    if isinstance(obj, GeneratorSpec):
        return obj.to_json_dict()
    if isinstance(obj, enum.Enum):
        return obj.value
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and math.isnan(obj):
        return None
    return obj


def _write_json(path: Path, payload) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    atomic_write_bytes(path, text.encode("utf-8"))


def _write_manifest(args: argparse.Namespace, out_dir: Path, outputs: list[str]) -> None:
    config = {
        k: v for k, v in vars(args).items() if k not in ("func", "from_manifest") and not callable(v)
    }
    manifest = {
        "tool": "fractalwalk",
        "version": __version__,
        "command": args.command,
        "config": _jsonable(config),
        "outputs": sorted(outputs),
    }
    _write_json(out_dir / f"{args.command}-manifest.json", manifest)


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Spec flags shared by the sampling commands


def _add_spec_flags(p: argparse.ArgumentParser, families=tuple(f.value for f in Family)) -> None:
    p.add_argument("--family", required=True, choices=families)
    p.add_argument("--T", "--total-len", dest="total_len", type=int, required=True,
                   help="sequence length (power of two)")
    p.add_argument("--delta", type=float, default=0.0, help="flip-budget coefficient in [0, 1)")
    p.add_argument("--base-len", dest="base_len", type=int, default=None,
                   help="merge-base block length (power of two; family default if omitted)")
    p.add_argument("--flip-mode", dest="flip_mode", choices=[m.value for m in FlipMode],
                   default=FlipMode.EXACT_COUNT.value)
    p.add_argument("--k", type=float, default=None,
                   help="height threshold coefficient (entropy_conditioned only)")
    p.add_argument("--seed", type=int, default=0)


def _spec_from_args(args: argparse.Namespace) -> GeneratorSpec:
    return GeneratorSpec(
        family=args.family,
        total_len=args.total_len,
        delta=args.delta,
        base_len=args.base_len,
        flip_mode=args.flip_mode,
        k=args.k,
        seed=args.seed,
    )


def _parse_int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in str(text).replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigurationError(f"expected a comma-separated integer list, got {text!r}") from exc
    if not values:
        raise ConfigurationError("empty integer list")
    return values


# ---------------------------------------------------------------------------
# Commands


def cmd_generate(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    result = generate(spec)
    out = _out_dir(args)
    stem = f"{spec.family.value}-T{spec.total_len}-seed{spec.seed}"
    if args.format == "csv":
        seq_file = f"{stem}.csv"
        write_csv(result.sequence, out / seq_file)
    else:
        seq_file = f"{stem}.fwsq"
        write_binary(result.sequence, out / seq_file)
    summary = {
        "spec": spec,
        "height": int(result.sequence.values.sum()),
        "length": int(result.sequence.values.shape[0]),
        "flip_records": len(result.records),
        "acceptance_rate": result.acceptance_rate,
        "file": seq_file,
    }
    _write_json(out / f"{stem}.json", summary)
    _write_manifest(args, out, [seq_file, f"{stem}.json"])
    print(f"wrote {out / seq_file} (height {summary['height']})")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    T_list = _parse_int_list(args.T_list)
    report = analysis.deviation_stats(spec, T_list, args.trials)
    out = _out_dir(args)
    rows = io.StringIO()
    writer = csv.writer(rows, lineterminator="\n")
    writer.writerow(["family", "delta", "T", "metric", "value", "stderr", "trials", "seed"])
    for r in report.rows:
        for metric, value in (
            ("mean_dev", r.mean_dev), ("median_dev", r.median_dev), ("rms_dev", r.rms_dev),
        ):
            writer.writerow([spec.family.value, spec.delta, r.total_len, metric,
                             f"{value:.10g}", "", r.trials, spec.seed])
    atomic_write_bytes(out / "stats.csv", rows.getvalue().encode())
    _write_json(out / "stats.json", report)
    _write_manifest(args, out, ["stats.csv", "stats.json"])
    if report.fitted_exponent is not None:
        print(f"fitted exponent {report.fitted_exponent:.4f} +- {report.exponent_stderr:.4f}")
    else:
        print("single length; no exponent fit")
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    T = spec.total_len
    payoffs: list[float] = []
    extra: dict[str, float] = {}
    stop_causes: dict[str, int] = {}
    rng = np.random.default_rng(derive_seed(spec.seed, "predict", args.predictor))
    mat = generate_batch(spec, args.trials, rng)
    wrap = BitSequence if mat.dtype == np.int8 else IntSequence
    for row in mat:
        seq = wrap(row)
        if args.predictor == "weighted_majority":
            payoffs.append(predictors.weighted_majority_expected_payoff(seq))
        elif args.predictor == "sign_of_prefix":
            if args.window is None or args.x is None:
                raise ConfigurationError("sign_of_prefix requires --window and --x")
            target = Interval(T - args.x, T, T)
            plan = predictors.sign_of_prefix_plan(seq, args.window, target)
            payoffs.append(predictors.run_plan(seq, plan).payoff)
        elif args.predictor == "block_momentum":
            if args.block_len is None:
                raise ConfigurationError("block_momentum requires --block-len")
            payoffs.append(predictors.block_momentum_payoff(seq, args.block_len))
        else:  # adaptive_bettor
            if args.theta is None:
                raise ConfigurationError("adaptive_bettor requires --theta")
            ledger = predictors.adaptive_inversion_bettor(
                seq, Interval(0, T, T), args.theta, args.alpha
            )
            payoffs.append(ledger.payoff)
            cause = ledger.stop_cause.name if ledger.stop_cause else "EXHAUSTED"
            stop_causes[cause] = stop_causes.get(cause, 0) + 1
    arr = np.asarray(payoffs, dtype=np.float64)
    extra["mean_payoff"] = float(arr.mean())
    extra["stderr"] = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    result = {
        "spec": spec,
        "predictor": args.predictor,
        "trials": args.trials,
        **extra,
        "normalized_by_sqrt_T": extra["mean_payoff"] / math.sqrt(T),
        "stop_causes": stop_causes or None,
    }
    out = _out_dir(args)
    _write_json(out / "predict.json", result)
    _write_manifest(args, out, ["predict.json"])
    print(f"{args.predictor}: mean payoff {extra['mean_payoff']:.3f} +- {extra['stderr']:.3f}")
    return 0


def cmd_inversion(args: argparse.Namespace) -> int:
    if args.input:
        path = Path(args.input)
        seq = read_csv(path) if path.suffix == ".csv" else read_binary(path)
    else:
        if args.family is None or args.total_len is None:
            raise ConfigurationError("provide --input FILE or a full generator spec")
        seq = generate(_spec_from_args(args)).sequence
    report = analysis.inversion_ratio(seq, min_len=args.min_len, dyadic_only=args.dyadic_only)
    out = _out_dir(args)
    _write_json(out / "inversion.json", report)
    _write_manifest(args, out, ["inversion.json"])
    wit = ""
    if report.y_interval is not None:
        wit = (f"; X=[{report.x_interval.lo},{report.x_interval.hi}) h={report.x_height}, "
               f"Y=[{report.y_interval.lo},{report.y_interval.hi}) h={report.y_height}")
    print(f"overall ratio {report.overall_ratio:.6f} over {report.n_intervals} intervals{wit}")
    return 0


def cmd_alphaq(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    x = args.x
    if x > spec.total_len:
        raise ConfigurationError("--x cannot exceed --T")
    window = Interval(spec.total_len - x, spec.total_len, spec.total_len)
    q_hat = analysis.alpha_q_estimate(spec, window, args.alpha, args.trials)
    result = {
        "spec": spec, "alpha": args.alpha, "x": x, "trials": args.trials,
        "q_hat": q_hat, "stderr": math.sqrt(max(q_hat * (1 - q_hat), 1e-12) / args.trials),
    }
    out = _out_dir(args)
    _write_json(out / "alphaq.json", result)
    _write_manifest(args, out, ["alphaq.json"])
    print(f"q_hat({args.alpha}) = {q_hat:.4f}")
    return 0


def cmd_theta(args: argparse.Namespace) -> int:
    theta = fractal.solve_theta(args.alpha)
    result = {"alpha": args.alpha, "theta": theta,
              "residual": fractal.theta_residual(args.alpha, theta)}
    out = _out_dir(args)
    _write_json(out / "theta.json", result)
    _write_manifest(args, out, ["theta.json"])
    print(f"theta({args.alpha}) = {theta:.12f}")
    return 0


def cmd_fractal(args: argparse.Namespace) -> int:
    params = fractal.FractalParams(args.alpha, args.height)
    seq = fractal.build_fractal(params)
    out = _out_dir(args)
    stem = f"fractal-a{args.alpha:g}-h{args.height}"
    seq_file = f"{stem}.fwsq" if args.format == "binary" else f"{stem}.csv"
    (write_binary if args.format == "binary" else write_csv)(seq, out / seq_file)
    result = {
        "alpha": params.alpha, "target_height": params.target_height, "theta": params.theta,
        "length": int(seq.values.shape[0]), "height": int(seq.values.sum()),
        "measured_exponent": fractal.measured_exponent(params),
        "split_points": fractal.split_points(params), "file": seq_file,
    }
    _write_json(out / f"{stem}.json", result)
    _write_manifest(args, out, [seq_file, f"{stem}.json"])
    print(f"length {result['length']}, height {result['height']}, "
          f"exponent {result['measured_exponent']:.4f} (1/theta = {1 / params.theta:.4f})")
    return 0


def cmd_fbm(args: argparse.Namespace) -> int:
    params = fbm.FbmParams(args.hurst, args.grid_len, seed=args.seed)
    out = _out_dir(args)
    outputs = []
    result = {"params": params}
    if args.sample > 0:
        paths = fbm.fbm_sample_batch(params, args.sample)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"t{t}" for t in range(1, params.grid_len + 1)])
        for row in paths:
            writer.writerow([f"{v:.10g}" for v in row])
        atomic_write_bytes(out / "fbm-paths.csv", buf.getvalue().encode())
        outputs.append("fbm-paths.csv")
        result["sampled_paths"] = args.sample
    closed = fbm.sign_predictor_closed_form(params.hurst, args.window, args.lag_ratio)
    mc = fbm.fbm_sign_predictor_payoff(params, args.window, args.lag_ratio, args.trials)
    result.update({
        "window": args.window, "lag_ratio": args.lag_ratio, "trials": args.trials,
        "sign_predictor_closed_form": closed, "sign_predictor_monte_carlo": mc,
    })
    _write_json(out / "fbm.json", result)
    outputs.append("fbm.json")
    _write_manifest(args, out, outputs)
    print(f"sign predictor: closed form {closed:.4f}, monte carlo {mc:.4f}")
    return 0


# --- sweep -------------------------------------------------------------------


def _sweep_cell(payload: dict) -> dict:
    """One (family, delta, T) cell; returns rows or an error record (never raises)."""
    try:
        spec = GeneratorSpec.from_json_dict(payload["spec"])
        trials = payload["trials"]
        rows = []

        def add(metric: str, value: float, stderr: float | None) -> None:
            rows.append({
                "family": spec.family.value, "delta": spec.delta, "T": spec.total_len,
                "metric": metric, "value": f"{value:.10g}",
                "stderr": "" if stderr is None else f"{stderr:.10g}",
                "trials": trials, "seed": spec.seed,
            })

        if "deviation" in payload["metrics"]:
            rep = analysis.deviation_stats(spec, [spec.total_len], trials)
            row = rep.rows[0]
            add("mean_dev", row.mean_dev, None)
            add("median_dev", row.median_dev, None)
            add("rms_dev", row.rms_dev, None)
        if "delta_hat" in payload["metrics"]:
            rep = analysis.estimate_delta(spec, payload["mode"], trials)
            add("delta_hat", rep.delta_hat, (rep.ci_high - rep.ci_low) / 2.0)
        if "alpha_q" in payload["metrics"]:
            x = min(256, spec.total_len // 4)
            iv = Interval(spec.total_len - x, spec.total_len, spec.total_len)
            q = analysis.alpha_q_estimate(spec, iv, payload["alpha"], trials)
            add("alpha_q", q, math.sqrt(max(q * (1 - q), 1e-12) / trials))
        return {"ok": True, "rows": rows}
    except Exception as exc:  # noqa: BLE001 - per-cell isolation is the contract
        return {"ok": False, "error": f"{type(exc).__name__}: {exc}", "spec": payload["spec"]}


def cmd_sweep(args: argparse.Namespace) -> int:
    families = [Family(f) for f in str(args.families).replace(",", " ").split()]
    deltas = [float(v) for v in str(args.deltas).replace(",", " ").split()]
    T_list = _parse_int_list(args.T_list)
    metrics = str(args.metrics).replace(",", " ").split()
    known = {"deviation", "delta_hat", "alpha_q"}
    if not metrics or not set(metrics) <= known:
        raise ConfigurationError(f"metrics must be a subset of {sorted(known)}, got {metrics}")

    cells = []
    for family in families:
        for delta in deltas:
            for T in T_list:
                # The spec itself is built inside the worker so that invalid
                # cells fail in isolation like any other per-cell error.
                flat = family in (Family.UNIFORM, Family.ENTROPY_CONDITIONED)
                spec_dict = {
                    "family": family.value,
                    "total_len": T,
                    "delta": 0.0 if flat else delta,
                    "k": args.k if family is Family.ENTROPY_CONDITIONED else None,
                    "seed": derive_seed(args.master_seed, family.value, delta, T),
                }
                cells.append({
                    "spec": spec_dict, "trials": args.trials, "metrics": metrics,
                    "mode": args.mode, "alpha": args.alpha,
                })

    if args.parallelism > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=args.parallelism) as pool:
            outcomes = list(pool.map(_sweep_cell, cells))
    else:
        outcomes = [_sweep_cell(c) for c in cells]

    out = _out_dir(args)
    buf = io.StringIO()
    writer = csv.DictWriter(
        buf, fieldnames=["family", "delta", "T", "metric", "value", "stderr", "trials", "seed"],
        lineterminator="\n",
    )
    writer.writeheader()
    failures = []
    for cell, outcome in zip(cells, outcomes):
        if outcome["ok"]:
            writer.writerows(outcome["rows"])
        else:
            failures.append({"spec": cell["spec"], "error": outcome["error"]})
    atomic_write_bytes(out / "sweep.csv", buf.getvalue().encode())
    _write_json(out / "sweep-failures.json", failures)
    _write_manifest(args, out, ["sweep.csv", "sweep-failures.json"])
    print(f"{len(cells) - len(failures)}/{len(cells)} cells ok -> {out / 'sweep.csv'}")
    for failure in failures:
        print(f"cell failed: {failure['spec']} -> {failure['error']}", file=sys.stderr)
    return 1 if failures else 0


def cmd_verify(args: argparse.Namespace) -> int:
    names = str(args.only).replace(",", " ").split() if args.only else None
    results = verify.run_all(quick=args.quick, names=names)
    out = _out_dir(args)
    payload = {
        "quick": args.quick,
        "all_passed": all(r.passed for r in results),
        "results": results,
    }
    _write_json(out / "verify.json", payload)
    _write_manifest(args, out, ["verify.json"])
    n_pass = sum(r.passed for r in results)
    print(f"{n_pass}/{len(results)} criteria passed")
    return 0 if payload["all_passed"] else 1


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractalwalk",
        description="Generate, predict, and analyze hard-to-predict +-1 walk distributions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    default_out = os.environ.get("FRACTALWALK_OUTPUT_DIR", ".")

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--output-dir", default=default_out)
        p.add_argument("--from-manifest", dest="from_manifest", default=None,
                       help="re-run with the configuration recorded in a manifest file")

    p = sub.add_parser("generate", help="sample one sequence and write it to disk")
    _add_spec_flags(p)
    p.add_argument("--format", choices=["binary", "csv"], default="binary")
    common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("stats", help="deviation statistics across lengths")
    _add_spec_flags(p)
    p.add_argument("--T-list", dest="T_list", required=True,
                   help="comma-separated lengths for the sweep rows")
    p.add_argument("--trials", type=int, default=10_000)
    common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("predict", help="run a prediction strategy over sampled sequences")
    _add_spec_flags(p)
    p.add_argument("--predictor", required=True,
                   choices=["weighted_majority", "sign_of_prefix", "block_momentum", "adaptive_bettor"])
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--x", type=int, default=None, help="target interval length (at the sequence end)")
    p.add_argument("--block-len", dest="block_len", type=int, default=None)
    p.add_argument("--theta", type=int, default=None)
    p.add_argument("--alpha", type=float, default=0.5)
    common(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("inversion", help="worst opposite-excursion ratio of a sequence")
    _add_spec_flags_optional(p)
    p.add_argument("--input", default=None, help="sequence file (.fwsq or .csv) instead of a spec")
    p.add_argument("--min-len", dest="min_len", type=int, default=analysis.DEFAULT_MIN_LEN)
    p.add_argument("--dyadic-only", dest="dyadic_only", action="store_true")
    common(p)
    p.set_defaults(func=cmd_inversion)

    p = sub.add_parser("alphaq", help="opposite-excursion probability estimate")
    _add_spec_flags(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--x", type=int, default=256, help="window length (placed at the sequence end)")
    p.add_argument("--trials", type=int, default=10_000)
    common(p)
    p.set_defaults(func=cmd_alphaq)

    p = sub.add_parser("theta", help="solve the self-similarity exponent equation")
    p.add_argument("--alpha", type=float, required=True)
    common(p)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("fractal", help="build the deterministic inverting profile")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--format", choices=["binary", "csv"], default="binary")
    common(p)
    p.set_defaults(func=cmd_fractal)

    p = sub.add_parser("fbm", help="fractional Brownian paths and the sign-predictor payoff")
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--grid-len", dest="grid_len", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window", type=int, default=16)
    p.add_argument("--lag-ratio", dest="lag_ratio", type=int, default=1)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--sample", type=int, default=0, help="also write this many raw paths as CSV")
    common(p)
    p.set_defaults(func=cmd_fbm)

    p = sub.add_parser("sweep", help="grid of analysis cells -> one long-format CSV")
    p.add_argument("--families", required=True, help="comma-separated family names")
    p.add_argument("--deltas", default="0.0", help="comma-separated delta values")
    p.add_argument("--T-list", dest="T_list", required=True)
    p.add_argument("--metrics", default="deviation", help="subset of deviation,delta_hat,alpha_q")
    p.add_argument("--mode", choices=["strict", "weak_averaged"], default="weak_averaged")
    p.add_argument("--alpha", type=float, default=0.2, help="alpha for the alpha_q metric")
    p.add_argument("--k", type=float, default=1.0, help="k for entropy_conditioned cells")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--parallelism", type=int, default=os.cpu_count() or 1)
    p.add_argument("--master-seed", dest="master_seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the acceptance battery")
    p.add_argument("--quick", action="store_true",
                   help="~10x fewer trials, doubled statistical tolerances (smoke test)")
    p.add_argument("--only", default=None, help="comma-separated criterion names")
    common(p)
    p.set_defaults(func=cmd_verify)

    return parser


def _add_spec_flags_optional(p: argparse.ArgumentParser) -> None:
    """Spec flags with nothing required (for commands that can read --input instead)."""
    p.add_argument("--family", default=None, choices=[f.value for f in Family])
    p.add_argument("--T", "--total-len", dest="total_len", type=int, default=None)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--base-len", dest="base_len", type=int, default=None)
    p.add_argument("--flip-mode", dest="flip_mode", choices=[m.value for m in FlipMode],
                   default=FlipMode.EXACT_COUNT.value)
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)


_COMMANDS = {
    "generate": cmd_generate,
    "stats": cmd_stats,
    "predict": cmd_predict,
    "inversion": cmd_inversion,
    "alphaq": cmd_alphaq,
    "theta": cmd_theta,
    "fractal": cmd_fractal,
    "fbm": cmd_fbm,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def _namespace_from_manifest(argv: list[str]) -> argparse.Namespace:
    """Rebuild a full command namespace from a recorded manifest.

    Replay is verbatim; the only flag honored alongside ``--from-manifest`` is
    ``--output-dir`` (so replays can land next to, not on top of, the original).
    """
    rest = list(argv)
    i = rest.index("--from-manifest")
    if i + 1 >= len(rest):
        raise ConfigurationError("--from-manifest needs a path")
    path = Path(rest[i + 1])
    del rest[i : i + 2]
    try:
        manifest = json.loads(path.read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read manifest {path}: {exc}") from exc
    command = manifest.get("command")
    if command not in _COMMANDS:
        raise ConfigurationError(f"manifest names unknown command {command!r}")
    if rest and not rest[0].startswith("-"):
        if rest[0] != command:
            raise ConfigurationError(f"manifest records command {command!r}, not {rest[0]!r}")
        rest = rest[1:]
    args = argparse.Namespace(**manifest.get("config", {}))
    args.command = command
    args.func = _COMMANDS[command]
    while rest:
        flag = rest.pop(0)
        if flag == "--output-dir" and rest:
            args.output_dir = rest.pop(0)
        else:
            raise ConfigurationError(
                f"only --output-dir may accompany --from-manifest, got {flag!r}"
            )
    return args


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if "--from-manifest" in argv:
            args = _namespace_from_manifest(argv)
        else:
            args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except SamplingBudgetError as exc:
        print(f"analysis failure: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
