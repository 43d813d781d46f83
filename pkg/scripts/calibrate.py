#!/usr/bin/env python3
"""Reproduce the measurements behind the frozen acceptance constants.

Prints the observed distributions next to the frozen ceilings so drift is
obvious: sequential-sort disagreement (SEQSORT_DISAGREEMENT_C), interleaved
critical-event rate (CRITICAL_RATE_C), quicksort comparison counts, and the
publish/sort-pass cycle ratios that justify the headline warmup window.
"""

import argparse
import math
import random
import statistics

import numpy as np

from evomatch.acceptance import CRITICAL_RATE_C, SEQSORT_DISAGREEMENT_C
from evomatch.engine import EvolutionMode, EvolvingInstance
from evomatch.harness import RunConfig, run
from evomatch.metrics import max_disagreement
from evomatch.model import random_profile
from evomatch.sorting import evolving_quicksort, sequential_sort


def fresh_instance(n, alpha, seed):
    profile = random_profile(n, np.random.default_rng(seed))
    return EvolvingInstance(
        profile, alpha, EvolutionMode.TWO_SIDED,
        np.random.default_rng(10_000 + seed), record_events=False,
    )


def sequential_sort_disagreement(seeds):
    n = 128
    worst = []
    for seed in range(seeds):
        inst = fresh_instance(n, 1, seed)
        outcomes = sequential_sort(inst, range(2 * n), random.Random(seed))
        approx = np.array([outcomes[z].approx.rank_of for z in range(2 * n)])
        ra, rb = inst.rank_matrices()
        worst.append(max_disagreement(np.concatenate([ra, rb]), approx))
    ceiling = math.ceil(SEQSORT_DISAGREEMENT_C * math.log2(n))
    print(f"sequential sort, n={n}, alpha=1, {seeds} seeds:")
    print(f"  per-element disagreement max: median {statistics.median(worst)}, "
          f"p95 {np.percentile(worst, 95):.0f}, worst {max(worst)}")
    print(f"  frozen ceiling ceil({SEQSORT_DISAGREEMENT_C}*log2(n)) = {ceiling}")


def critical_rate(seeds):
    n = 128
    cycle = n * n * 7
    rates = []
    for seed in range(seeds):
        res = run(RunConfig(n=n, alpha=1, matcher="interleaved", seed=seed,
                            max_t=4 * cycle, warmup_t=0,
                            sample_every=cycle, classify_critical=True))
        last = res.record.samples[-1]
        rates.append(last.critical_events / last.t * n)
    print(f"interleaved critical events, n={n}, alpha=1, {seeds} seeds:")
    print(f"  rate * n / alpha: median {statistics.median(rates):.2f}, "
          f"worst {max(rates):.2f}; frozen c = {CRITICAL_RATE_C}")


def quicksort_comparisons(seeds):
    n = 256
    comps = []
    for seed in range(seeds):
        inst = fresh_instance(n, 1, seed)
        comps.append(evolving_quicksort(inst, 0, random.Random(seed)).comparisons)
    limit = 4 * n * math.ceil(math.log2(n))
    print(f"evolving quicksort, n={n}, alpha=1, {seeds} seeds:")
    print(f"  comparisons: median {statistics.median(comps)}, worst {max(comps)}, "
          f"4n*log2(n) = {limit}")


def cycle_ratios(seeds):
    print("first-publish time in units of n^2*ceil(log2 n):")
    for matcher in ("simple", "interleaved"):
        for n in (64, 128):
            unit = n * n * math.ceil(math.log2(n))
            ratios = []
            for seed in range(seeds):
                res = run(RunConfig(n=n, alpha=1, matcher=matcher, seed=seed,
                                    max_t=5 * unit, warmup_t=0,
                                    sample_every=max(1, unit // 64)))
                first = next(s for s in res.record.samples if s.runs_completed >= 1)
                ratios.append(first.t / unit)
            print(f"  {matcher} n={n}: median {statistics.median(ratios):.2f}, "
                  f"max {max(ratios):.2f}")
    print("  (one full pass of the perpetual sorter is ~2.8 units, hence the")
    print("   headline warmup of 3.2 units before measurement)")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=20,
                        help="seeds per measurement (default 20)")
    parser.add_argument("--skip-cycles", action="store_true",
                        help="skip the slower cycle-ratio measurement")
    args = parser.parse_args()
    sequential_sort_disagreement(args.seeds)
    critical_rate(min(args.seeds, 10))
    quicksort_comparisons(args.seeds)
    if not args.skip_cycles:
        cycle_ratios(min(args.seeds, 5))


if __name__ == "__main__":
    main()
