"""Command-line driver: run, sweep, verify, replay."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from evomatch.harness import (
    RunConfig,
    config_from_dict,
    replay_run,
    run,
    sweep,
    sweep_configs,
)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with RunConfig fields")
    p.add_argument("--n", type=int)
    p.add_argument("--alpha", type=int)
    p.add_argument("--mode", choices=("two_sided", "one_sided_b"))
    p.add_argument("--matcher", choices=("simple", "one_sided", "interleaved", "static_gs"))
    p.add_argument("--seed", type=int)
    p.add_argument("--max-t", type=int, dest="max_t")
    p.add_argument("--sample-every", type=int, dest="sample_every")
    p.add_argument("--c-window", type=float, dest="c_window")
    p.add_argument("--warmup-t", type=int, dest="warmup_t")
    p.add_argument("--record-events", action="store_true", default=None)
    p.add_argument("--classify-critical", action="store_true", default=None)


_CONFIG_KEYS = (
    "n", "alpha", "mode", "matcher", "seed", "max_t", "sample_every",
    "c_window", "warmup_t", "record_events", "classify_critical",
)


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    """Merge config file (if any) with explicit flags; flags win."""
    data: dict = {}
    if args.config is not None:
        data.update(json.loads(args.config.read_text()))
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if "n" not in data:
        raise SystemExit("error: --n is required (flag or config file)")
    return config_from_dict(data)


def _cmd_run(args: argparse.Namespace) -> int:
    config = _config_from_args(args).resolved()
    result = run(config, out_dir=args.out)
    last = result.record.samples[-1]
    print(
        f"run matcher={config.matcher} n={config.n} alpha={config.alpha} "
        f"seed={config.seed} t={last.t} blocking={last.blocking_pairs} "
        f"queries={last.queries} proposals={last.proposals} "
        f"runs_completed={last.runs_completed} critical={last.critical_events}"
    )
    if args.out is not None:
        print(f"wrote {Path(args.out) / 'run.csv'}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.config is not None:
        payload = json.loads(args.config.read_text())
        configs = [config_from_dict(c) for c in payload["configs"]]
    else:
        if args.matcher is None or args.ns is None:
            raise SystemExit("error: sweep needs --matcher and --ns (or --config)")
        ns = [int(x) for x in args.ns.split(",")]
        configs = sweep_configs(
            args.matcher,
            ns,
            args.seeds,
            alpha=args.alpha if args.alpha is not None else 1,
            seed0=args.seed0,
            budget_factor=args.budget_factor,
            warmup_factor=args.warmup_factor,
            c_window=args.c_window if args.c_window is not None else 4.0,
        )
    summary = sweep(configs, parallelism=args.parallelism)
    text = summary.to_json()
    if args.out is not None:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    for name, fit in sorted(summary.slopes.items()):
        lo, hi = fit.ci95
        print(f"slope {name}: {fit.slope:.3f} (ci95 {lo:.3f}..{hi:.3f})")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    from evomatch.acceptance import run_criteria

    numbers = None
    if args.criteria is not None:
        numbers = [int(x) for x in args.criteria.split(",")]
    results = run_criteria(numbers)
    return 0 if all(r.passed for r in results) else 1


def _cmd_replay(args: argparse.Namespace) -> int:
    report = replay_run(args.dir)
    print(f"csv: {'identical' if report.csv_identical else 'MISMATCH'}")
    if report.events_identical is not None:
        print(f"events: {'identical' if report.events_identical else 'MISMATCH'}")
    print("replay ok" if report.ok else "replay FAILED")
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evomatch",
        description="Stable matching under evolving preferences: simulate, sweep, verify.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one configuration")
    _add_config_flags(p_run)
    p_run.add_argument("--out", type=Path, help="directory for run.csv / manifest.json")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="seed sweep with slope fits")
    p_sweep.add_argument("--config", type=Path, help='JSON file: {"configs": [...]}')
    p_sweep.add_argument("--matcher", choices=("simple", "one_sided", "interleaved", "static_gs"))
    p_sweep.add_argument("--ns", help="comma-separated n values")
    p_sweep.add_argument("--seeds", type=int, default=10)
    p_sweep.add_argument("--seed0", type=int, default=0)
    p_sweep.add_argument("--alpha", type=int)
    p_sweep.add_argument("--c-window", type=float, dest="c_window")
    p_sweep.add_argument("--budget-factor", type=float, dest="budget_factor")
    p_sweep.add_argument("--warmup-factor", type=float, dest="warmup_factor")
    p_sweep.add_argument("--parallelism", type=int, default=1)
    p_sweep.add_argument("--out", type=Path, help="summary JSON path")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the acceptance suite")
    p_verify.add_argument("--criteria", help="comma-separated subset, e.g. 1,2,4")
    p_verify.set_defaults(func=_cmd_verify)

    p_replay = sub.add_parser("replay", help="re-run from a manifest and compare bytes")
    p_replay.add_argument("dir", type=Path, help="directory containing manifest.json")
    p_replay.set_defaults(func=_cmd_replay)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
