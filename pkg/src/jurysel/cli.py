"""Command-line entry point: ``jurysel {solve,simulate,analytic,oracle,replicate}``.

Exit codes: 0 success, 2 configuration error, 3 oracle pre-flight failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path

from .distributions import DomainError, MixtureDistribution
from .metrics import analytic_T_ran, analytic_T_str
from .oracle import oracle_report_csv, oracle_report_text, preflight_checks, sec3_quantities
from .presets import DEFAULT_SIMS, PRESETS, run_preset
from .simulate import DEFAULT_SEED, ConfigError, ExperimentConfig, result_rows, run_experiment, write_csv, \
    write_trace
from .solver import solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ORACLE = 3

log = logging.getLogger("jurysel")


def _emit(text: str, out_dir, name: str):
    if out_dir is None:
        sys.stdout.write(text)
        return
    path = Path(out_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    log.info("wrote %s", path)


def cmd_solve(args) -> int:
    try:
        dist = MixtureDistribution.from_literal(args.dist)
    except (json.JSONDecodeError, DomainError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError("--dist", str(exc)) from exc
    table = solve(dist, args.j, args.d, args.p)
    _emit(table.to_csv(), args.out, "solve.csv")
    return EXIT_OK


def _load_config(args) -> ExperimentConfig:
    if args.config is None:
        raise ConfigError("--config", "a config file is required")
    try:
        raw = json.loads(Path(args.config).read_text())
    except OSError as exc:
        raise ConfigError("--config", str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from exc
    if isinstance(raw, dict):
        for key, flag in (("seed", args.seed), ("n_sims", args.sims), ("workers", args.workers)):
            if flag is not None:
                raw[key] = flag
    return ExperimentConfig.from_dict(raw)


def cmd_simulate(args) -> int:
    config = _load_config(args)
    out = args.out if args.out is not None else config.out
    result = run_experiment(config, trace_limit=args.trace)
    _emit(write_csv(result_rows(result, "simulate")), out, "simulate.csv")
    if args.trace:
        if out is None:
            raise ConfigError("--trace", "requires an output directory")
        write_trace(result.trace, Path(out) / "trace.csv")
    return EXIT_OK


def cmd_analytic(args) -> int:
    if args.median:
        fc = 0.5
    elif args.fc is not None:
        fc = args.fc
    else:
        raise ConfigError("--fc", "give --median or --fc F(c)")
    if not 0.0 <= fc <= 1.0:
        raise ConfigError("--fc", f"{fc} outside [0, 1]")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "F_c", "T_STR", "T_RAN", "STR_minus_RAN"])
    for x in range(args.j + 1):
        ts = analytic_T_str(args.j, args.d, args.p, fc, x)
        tr = analytic_T_ran(args.j, fc, x)
        w.writerow([x, f"{fc:.10g}", f"{ts:.10g}", f"{tr:.10g}", f"{ts - tr:.10g}"])
    _emit(buf.getvalue(), args.out, "analytic.csv")
    return EXIT_OK


def cmd_oracle(args) -> int:
    rows = sec3_quantities()
    checks = preflight_checks()
    sys.stdout.write(oracle_report_text(rows))
    for name, ok, detail in checks:
        sys.stdout.write(f"{'PASS' if ok else 'FAIL'} {name}: {detail}\n")
    if args.out is not None:
        _emit(oracle_report_csv(rows), args.out, "oracle_sec3.csv")
    return EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_ORACLE


def cmd_replicate(args) -> int:
    if args.preset not in PRESETS:
        raise ConfigError("preset", f"unknown preset {args.preset!r}; choose from {', '.join(PRESETS)}")
    if not args.skip_oracle:
        failed = [(name, detail) for name, ok, detail in preflight_checks() if not ok]
        for name, detail in failed:
            sys.stderr.write(f"oracle check failed: {name}: {detail}\n")
        if failed:
            return EXIT_ORACLE
    start = time.perf_counter()
    files = run_preset(args.preset, n_sims=args.sims or DEFAULT_SIMS,
                       seed=DEFAULT_SEED if args.seed is None else args.seed, workers=args.workers or 1)
    out = Path(args.out or f"results/{args.preset}")
    for name, text in files.items():
        _emit(text, out, name)
    log.info("%s done in %.1fs", args.preset, time.perf_counter() - start)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jurysel", description="Jury selection procedure experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def sizes(p, defaults=(12, 6, 6)):
        p.add_argument("--j", type=int, default=defaults[0])
        p.add_argument("--d", type=int, default=defaults[1])
        p.add_argument("--p", type=int, default=defaults[2])

    def run_flags(p):
        p.add_argument("--seed", type=int)
        p.add_argument("--sims", type=int)
        p.add_argument("--workers", type=int)

    p = sub.add_parser("solve", help="equilibrium thresholds and values for every subgame")
    p.add_argument("--dist", required=True, help='distribution literal, e.g. \'{"uniform":[0,1]}\'')
    sizes(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="Monte Carlo comparison from a JSON config")
    p.add_argument("--config")
    run_flags(p)
    p.add_argument("--out")
    p.add_argument("--trace", type=int, default=0, metavar="N", help="write per-seat trace for the first N juries")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analytic", help="closed-form STR and RAN tail probabilities")
    p.add_argument("--median", action="store_true", help="evaluate at F(c) = 1/2")
    p.add_argument("--fc", type=float, help="evaluate at this value of F(c)")
    sizes(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("oracle", help="exact cross-checks of the worked example")
    p.add_argument("--preset", choices=["sec3"], default="sec3")
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("replicate", help="run a named replication preset")
    p.add_argument("preset", help=", ".join(PRESETS))
    run_flags(p)
    p.add_argument("--out")
    p.add_argument("--skip-oracle", action="store_true")
    p.set_defaults(func=cmd_replicate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    for name in ("sims", "workers"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            sys.stderr.write(f"config error: --{name}: must be >= 1\n")
            return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
