#!/usr/bin/env python3
"""Run the headline growth-rate experiment at configurable size.

Sweeps the interleaved and simple matchers over a doubling ladder of n,
fits log2(median post-warmup blocking pairs) against log2(n), and writes a
JSON summary. The defaults mirror the acceptance criterion budgets; use
--seeds to trade runtime against tighter medians.
"""

import argparse
import json
import math
import time
from pathlib import Path

from evomatch.acceptance import (
    HEADLINE_BUDGET_FACTOR,
    HEADLINE_NS,
    HEADLINE_WARMUP_FACTOR,
)
from evomatch.harness import RunConfig, sweep


def build_configs(matcher, ns, seeds, alpha, c_window):
    configs = []
    for n in ns:
        unit = n * n * math.ceil(math.log2(n))
        warmup = math.ceil(HEADLINE_WARMUP_FACTOR * unit)
        max_t = math.ceil(HEADLINE_BUDGET_FACTOR * unit)
        for seed in range(seeds):
            configs.append(RunConfig(
                n=n, alpha=alpha, matcher=matcher, seed=seed,
                warmup_t=warmup, max_t=max_t,
                sample_every=max(1, max_t // 256), c_window=c_window,
            ))
    return configs


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--ns", default=",".join(str(n) for n in HEADLINE_NS),
                        help="comma-separated ladder of n (need >= 3 for a fit)")
    parser.add_argument("--seeds", type=int, default=10)
    parser.add_argument("--alpha", type=int, default=1)
    parser.add_argument("--c-window", type=float, default=4.0)
    parser.add_argument("--parallelism", type=int, default=1)
    parser.add_argument("--out", type=Path, default=Path("headline_summary.json"))
    args = parser.parse_args()

    ns = [int(x) for x in args.ns.split(",")]
    report = {}
    for matcher in ("interleaved", "simple"):
        t0 = time.perf_counter()
        summary = sweep(build_configs(matcher, ns, args.seeds, args.alpha,
                                      args.c_window),
                        parallelism=args.parallelism)
        elapsed = time.perf_counter() - t0
        fit = summary.slopes.get(matcher)
        report[matcher] = json.loads(summary.to_json())
        for g in summary.groups:
            print(f"{matcher} n={g.n}: median {g.median_blocking:g} "
                  f"(mean {g.mean_blocking:.1f}, p95 {g.p95_blocking:.1f})")
        if fit is not None:
            lo, hi = fit.ci95
            print(f"{matcher} slope: {fit.slope:.3f} (ci95 {lo:.3f}..{hi:.3f}) "
                  f"[{elapsed:.0f}s]")
        else:
            print(f"{matcher}: fewer than 3 distinct n, no fit [{elapsed:.0f}s]")
    if "interleaved" in report and "simple" in report:
        si = report["interleaved"]["slopes"].get("interleaved")
        ss = report["simple"]["slopes"].get("simple")
        if si and ss:
            print(f"separation: {ss['slope'] - si['slope']:.3f}")
    args.out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
