"""Command-line entry point: ``qres run | plotdata | gie | gen-states``."""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import QresError, ValidationError
from .experiments import OUTPUT_ROOT_ENV, emit_plotdata, load_scenario, run_scenario
from .gie import GieConfig, direct_measurement_baseline, run_gie_experiment
from .io import read_json, save_ensemble, write_csv, write_json
from .states import KINDS, generate_ensemble

EXIT_INVALID = 2
EXIT_FAILED = 3


def _output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "results"))


def _cmd_run(args) -> int:
    sc = load_scenario(args.config, seed=args.seed)
    out = Path(args.out) if args.out else _output_root() / sc.name
    start = time.perf_counter()
    result = run_scenario(sc, out, jobs=args.jobs)
    elapsed = time.perf_counter() - start
    means = result.values.mean(axis=2)
    print(f"{sc.name}: {len(sc.series)} series x {len(sc.sweep)} points x {sc.n_realizations} "
          f"realizations in {elapsed:.1f} s -> {out}")
    for s, label in enumerate(sc.series):
        print(f"[{label}] {sc.sweep_axis:>12}  mean {sc.metric}")
        for v, m in zip(sc.sweep, means[s]):
            print(f"[{label}] {v!s:>12}  {m:.3e}")
    slope_file = out / "slope.json"
    if slope_file.exists():
        for label, rep in read_json(slope_file).items():
            print(f"[{label}] slope {rep['slope']:.3f} ± {rep['stderr']:.3f} "
                  f"(from {sc.sweep_axis} >= {rep['fit_from']})")
    return 0


def _cmd_plotdata(args) -> int:
    for path in emit_plotdata(args.results, args.out):
        print(path)
    return 0


def load_gie_file(path, seed: int | None = None) -> tuple[GieConfig, dict]:
    """
    JSON file of :class:`GieConfig` keys plus optional run keys ``tau0_values``,
    ``direct_zeta`` and ``seed``.
    """
    data = read_json(path)
    run = {k: data.pop(k) for k in ("tau0_values", "direct_zeta", "seed") if k in data}
    if seed is not None:
        run["seed"] = seed
    run.setdefault("seed", 2024)
    try:
        config = GieConfig.from_dict(data)
    except (ValidationError, TypeError) as exc:
        raise ValidationError(f"{path}: {exc}") from None
    run.setdefault("tau0_values", [config.tau0])
    return config, run


def _flags_text(flags: dict) -> str:
    return ";".join(f"{k}={v}" for k, v in sorted(flags.items()) if k in ("rejected", "ridge_lambda",
                                                                          "unphysical_estimates"))


def _cmd_gie(args) -> int:
    config, run = load_gie_file(args.config, args.seed)
    out = Path(args.out) if args.out else _output_root() / "gie"
    out.mkdir(parents=True, exist_ok=True)
    rows, summary = [], []
    for i, tau0 in enumerate(run["tau0_values"]):
        cfg = dataclasses.replace(config, tau0=float(tau0))
        res = run_gie_experiment(cfg, np.random.default_rng([run["seed"], 4, 0, i, 0]))
        flags = _flags_text(res.flags)
        rows += [[float(tau0), k, res.E_in, float(e), flags] for k, e in enumerate(res.E_est)]
        line = [float(tau0), res.E_in, float(np.mean(res.E_est)), res.delta_E]
        if "direct_zeta" in run:
            line.append(direct_measurement_baseline(
                cfg, float(run["direct_zeta"]), np.random.default_rng([run["seed"], 5, 0, i, 0])))
        summary.append(line)
        print(f"tau0 = {tau0:g} s: E_in = {res.E_in:.6e}, delta_E = {res.delta_E:.3e}"
              + (f", direct delta_E = {line[-1]:.3e}" if "direct_zeta" in run else ""))
    write_csv(out / "gie_estimates.csv", ["tau0_s", "test_index", "E_in", "E_est", "flags"], rows)
    header = ["tau0_s", "E_in", "E_est_mean", "delta_E"] + (["direct_delta_E"] if "direct_zeta" in run else [])
    write_csv(out / "gie_summary.csv", header, summary)
    write_json(out / "manifest.json", {"config": config.to_dict(), "run": run, "version": __version__})
    return 0


def _cmd_gen_states(args) -> int:
    ens = generate_ensemble(args.kind, args.n, args.seed, stream=args.stream)
    out = Path(args.out) if args.out else _output_root() / f"states_{args.kind}_{args.n}_{args.seed}"
    save_ensemble(out, ens)
    e = ens.true_entanglement
    print(f"{len(ens)} {args.kind} states -> {out} (entanglement min {e.min():.4g}, "
          f"max {e.max():.4g}, mean {e.mean():.4g})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qres",
        description="Entanglement estimation with quantum reservoir networks.",
        epilog=f"Default output root: ${OUTPUT_ROOT_ENV} or ./results.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario config (INI)")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None, help="override the master seed")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (results do not depend on it)")
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("plotdata", help="write gnuplot data from a results directory")
    p.add_argument("results")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_plotdata)

    p = sub.add_parser("gie", help="run the gravity-induced entanglement protocol (JSON config)")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_gie)

    p = sub.add_parser("gen-states", help="generate and save a random input ensemble")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("n", type=int)
    p.add_argument("seed", type=int)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_gen_states)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (QresError, MemoryError, FloatingPointError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
