"""Experiment driver: single runs, seed sweeps, growth-rate fits.

A run is fully determined by its RunConfig; the manifest written next to
the CSV is enough to reproduce both byte-identically. Sweeps reduce each
run to post-warmup statistics and fit log2(blocking) against log2(n) per
matcher family, which is how the asymptotic bounds are checked without
knowing the constants.
"""

from __future__ import annotations

import json
import math
import random
import statistics
from dataclasses import asdict, dataclass, replace
from multiprocessing import Pool
from pathlib import Path

import numpy as np
from scipy import stats

from evomatch import __version__
from evomatch.engine import (
    EvolutionMode,
    EvolvingInstance,
    events_from_jsonl,
    events_to_jsonl,
)
from evomatch.matchers import (
    InterleavedMatcher,
    OneSidedMatcher,
    SimpleDynamicMatcher,
    StaticGSMatcher,
)
from evomatch.metrics import CriticalityTracker, TimeSeriesRecord, sample_blocking
from evomatch.model import random_profile

MATCHERS = ("simple", "one_sided", "interleaved", "static_gs")
MODES = ("two_sided", "one_sided_b")

CSV_NAME = "run.csv"
MANIFEST_NAME = "manifest.json"
EVENTS_NAME = "events.jsonl"


def default_warmup(matcher: str, n: int) -> int:
    log = math.ceil(math.log2(n)) if n > 1 else 1
    if matcher in ("simple", "interleaved"):
        return 2 * n * n * log
    if matcher == "one_sided":
        return 4 * n * log
    return 0


@dataclass(frozen=True, slots=True)
class RunConfig:
    n: int
    alpha: int = 1
    mode: str = "two_sided"
    matcher: str = "simple"
    seed: int = 0
    max_t: int | None = None
    sample_every: int | None = None
    c_window: float = 4.0
    warmup_t: int | None = None
    record_events: bool = False
    classify_critical: bool = False

    def resolved(self) -> RunConfig:
        """Fill defaults and validate; returns a config with concrete values."""
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.matcher not in MATCHERS:
            raise ValueError(f"unknown matcher {self.matcher!r}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.matcher == "one_sided" and self.mode != "one_sided_b":
            raise ValueError("the one_sided matcher requires one_sided_b mode")
        if self.matcher in ("simple", "interleaved") and self.mode != "two_sided":
            raise ValueError(f"the {self.matcher} matcher requires two_sided mode")
        warmup = self.warmup_t if self.warmup_t is not None else default_warmup(self.matcher, self.n)
        if self.max_t is not None:
            max_t = self.max_t
        elif warmup > 0:
            max_t = 2 * warmup
        else:
            max_t = max(4, self.n)
        sample_every = self.sample_every if self.sample_every is not None else max(1, math.ceil(self.n / 4))
        if warmup < 0 or max_t < warmup:
            raise ValueError("need max_t >= warmup_t >= 0")
        if sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        if self.c_window <= 0:
            raise ValueError("c_window must be positive")
        return replace(self, max_t=max_t, sample_every=sample_every, warmup_t=warmup)


@dataclass(slots=True)
class RunResult:
    config: RunConfig
    record: TimeSeriesRecord
    manifest: dict
    events: list | None
    runs_completed: int
    proposals: int
    first_targets: list[int]
    audit_records: list


def config_from_dict(data: dict) -> RunConfig:
    unknown = set(data) - {f for f in RunConfig.__dataclass_fields__}
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    return RunConfig(**data)


def _build_matcher(config: RunConfig, instance: EvolvingInstance, alg_rng: random.Random, tracker):
    if config.matcher == "simple":
        return SimpleDynamicMatcher(instance, alg_rng)
    if config.matcher == "one_sided":
        return OneSidedMatcher(instance, alg_rng, tracker=tracker)
    if config.matcher == "interleaved":
        return InterleavedMatcher(instance, alg_rng, c_window=config.c_window, tracker=tracker)
    return StaticGSMatcher(instance, alg_rng)


def run(config: RunConfig, out_dir: str | Path | None = None) -> RunResult:
    """Execute one simulation deterministically; optionally write artifacts."""
    config = config.resolved()
    nature_ss, alg_ss, init_ss = np.random.SeedSequence(config.seed).spawn(3)
    profile = random_profile(config.n, np.random.default_rng(init_ss))
    alg_rng = random.Random(int(alg_ss.generate_state(1, dtype=np.uint64)[0]))
    instance = EvolvingInstance(
        profile,
        config.alpha,
        EvolutionMode(config.mode),
        np.random.default_rng(nature_ss),
        record_events=config.record_events,
    )
    tracker = None
    if config.classify_critical and config.matcher in ("one_sided", "interleaved"):
        tracker = CriticalityTracker(instance)
        instance.set_classifier(tracker)
    matcher = _build_matcher(config, instance, alg_rng, tracker)

    proc = matcher.process()
    req = next(proc)
    record = TimeSeriesRecord()
    sample_blocking(instance, matcher, record)
    sample_every = config.sample_every
    next_cadence = sample_every
    last_runs = matcher.runs_completed
    max_t = config.max_t
    while instance.t < max_t:
        req = proc.send(instance.query(*req) if req is not None else instance.idle_step())
        t = instance.t
        runs = matcher.runs_completed
        if t >= next_cadence or runs != last_runs:
            sample_blocking(instance, matcher, record)
            last_runs = runs
            while next_cadence <= t:
                next_cadence += sample_every
    if record.samples[-1].t < instance.t:
        sample_blocking(instance, matcher, record)

    manifest = {
        "format": 1,
        "package": "evomatch",
        "version": __version__,
        "config": asdict(config),
    }
    result = RunResult(
        config=config,
        record=record,
        manifest=manifest,
        events=instance.event_log if config.record_events else None,
        runs_completed=matcher.runs_completed,
        proposals=matcher.proposals,
        first_targets=list(getattr(matcher, "first_targets", [])),
        audit_records=list(tracker.records) if tracker is not None else [],
    )
    if out_dir is not None:
        write_run(result, out_dir)
    return result


def write_run(result: RunResult, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / CSV_NAME).write_text(result.record.to_csv())
    (out / MANIFEST_NAME).write_text(json.dumps(result.manifest, indent=2, sort_keys=True) + "\n")
    if result.events is not None:
        (out / EVENTS_NAME).write_text(events_to_jsonl(result.events, result.config.n))
    return out


@dataclass(frozen=True, slots=True)
class ReplayReport:
    csv_identical: bool
    events_identical: bool | None

    @property
    def ok(self) -> bool:
        return self.csv_identical and self.events_identical is not False


def replay_run(run_dir: str | Path) -> ReplayReport:
    """Re-execute a written run from its manifest and byte-compare outputs."""
    run_dir = Path(run_dir)
    manifest = json.loads((run_dir / MANIFEST_NAME).read_text())
    config = config_from_dict(manifest["config"])
    result = run(config)
    csv_ok = result.record.to_csv() == (run_dir / CSV_NAME).read_text()
    events_ok = None
    events_path = run_dir / EVENTS_NAME
    if result.events is not None or events_path.exists():
        stored = events_path.read_text() if events_path.exists() else None
        fresh = events_to_jsonl(result.events or [], result.config.n)
        events_ok = stored == fresh
    return ReplayReport(csv_ok, events_ok)


def load_events(run_dir: str | Path, n: int):
    return events_from_jsonl((Path(run_dir) / EVENTS_NAME).read_text(), n)


# ------------------------------------------------------------------ sweeps


@dataclass(frozen=True, slots=True)
class RunStats:
    matcher: str
    n: int
    seed: int
    samples_used: int
    median_blocking: float
    mean_blocking: float
    p95_blocking: float
    queries: int
    proposals: int
    runs_completed: int
    critical_events: int
    final_t: int


def reduce_run(config: RunConfig) -> RunStats:
    """Run one config and keep only post-warmup statistics."""
    config = config.resolved()
    result = run(config)
    tail = result.record.post_warmup(config.warmup_t)
    if not tail:
        raise RuntimeError("no post-warmup samples; check max_t vs warmup_t")
    blocking = [s.blocking_pairs for s in tail]
    last = result.record.samples[-1]
    return RunStats(
        matcher=config.matcher,
        n=config.n,
        seed=config.seed,
        samples_used=len(blocking),
        median_blocking=float(statistics.median(blocking)),
        mean_blocking=float(statistics.fmean(blocking)),
        p95_blocking=float(np.percentile(blocking, 95)),
        queries=last.queries,
        proposals=last.proposals,
        runs_completed=last.runs_completed,
        critical_events=last.critical_events,
        final_t=last.t,
    )


@dataclass(frozen=True, slots=True)
class GroupStats:
    matcher: str
    n: int
    runs: int
    median_blocking: float
    mean_blocking: float
    p95_blocking: float


@dataclass(frozen=True, slots=True)
class SlopeFit:
    matcher: str
    ns: tuple[int, ...]
    values: tuple[float, ...]
    slope: float
    intercept: float
    stderr: float

    @property
    def ci95(self) -> tuple[float, float]:
        return (self.slope - 2 * self.stderr, self.slope + 2 * self.stderr)


def fit_loglog(ns, values) -> tuple[float, float, float]:
    """Least-squares slope of log2(value) vs log2(n); needs >= 3 distinct n."""
    ns = list(ns)
    values = list(values)
    if len(set(ns)) < 3:
        raise ValueError("log-log fit requires at least 3 distinct n values")
    xs = np.log2(ns)
    ys = np.log2(np.maximum(values, 0.5))
    fit = stats.linregress(xs, ys)
    stderr = 0.0 if math.isnan(fit.stderr) else float(fit.stderr)
    return float(fit.slope), float(fit.intercept), stderr


@dataclass(frozen=True, slots=True)
class SweepSummary:
    runs: tuple[RunStats, ...]
    groups: tuple[GroupStats, ...]
    slopes: dict[str, SlopeFit]

    def group(self, matcher: str, n: int) -> GroupStats:
        for g in self.groups:
            if g.matcher == matcher and g.n == n:
                return g
        raise KeyError((matcher, n))

    def to_json(self) -> str:
        payload = {
            "groups": [asdict(g) for g in self.groups],
            "slopes": {
                name: {**asdict(fit), "ci95": fit.ci95} for name, fit in self.slopes.items()
            },
            "runs": [asdict(r) for r in self.runs],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def summarize(all_stats) -> SweepSummary:
    """Order-independent aggregation of per-run statistics."""
    all_stats = sorted(all_stats, key=lambda s: (s.matcher, s.n, s.seed))
    grouped: dict[tuple[str, int], list[RunStats]] = {}
    for s in all_stats:
        grouped.setdefault((s.matcher, s.n), []).append(s)
    groups = []
    for (matcher, n), members in sorted(grouped.items()):
        medians = [m.median_blocking for m in members]
        groups.append(
            GroupStats(
                matcher=matcher,
                n=n,
                runs=len(members),
                median_blocking=float(statistics.median(medians)),
                mean_blocking=float(statistics.fmean(m.mean_blocking for m in members)),
                p95_blocking=float(np.percentile(medians, 95)),
            )
        )
    slopes: dict[str, SlopeFit] = {}
    by_matcher: dict[str, list[GroupStats]] = {}
    for g in groups:
        by_matcher.setdefault(g.matcher, []).append(g)
    for matcher, gs in sorted(by_matcher.items()):
        if len({g.n for g in gs}) < 3:
            continue
        ns = tuple(g.n for g in gs)
        values = tuple(g.median_blocking for g in gs)
        slope, intercept, stderr = fit_loglog(ns, values)
        slopes[matcher] = SlopeFit(matcher, ns, values, slope, intercept, stderr)
    return SweepSummary(tuple(all_stats), tuple(groups), slopes)


def sweep(configs, parallelism: int = 1) -> SweepSummary:
    """Run independent replications, serially or across processes.

    Per-run determinism plus order-independent aggregation make the result
    identical for any parallelism level.
    """
    configs = [c.resolved() for c in configs]
    if not configs:
        raise ValueError("sweep needs at least one config")
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    if parallelism == 1:
        stats_list = [reduce_run(c) for c in configs]
    else:
        with Pool(parallelism) as pool:
            stats_list = pool.map(reduce_run, configs)
    return summarize(stats_list)


def sweep_configs(
    matcher: str,
    ns,
    seeds: int,
    *,
    alpha: int = 1,
    seed0: int = 0,
    budget_factor: float | None = None,
    warmup_factor: float | None = None,
    sample_every_rule=None,
    c_window: float = 4.0,
) -> list[RunConfig]:
    """Build a seed-sweep config grid with per-n step budgets.

    budget_factor and warmup_factor scale the matcher's natural cycle size
    (n^2*ceil(log2 n) for the sorting matchers, n*ceil(log2 n) one-sided);
    None keeps the RunConfig defaults.
    """
    mode = "one_sided_b" if matcher == "one_sided" else "two_sided"
    out = []
    for n in ns:
        log = math.ceil(math.log2(n)) if n > 1 else 1
        cycle = n * n * log if matcher in ("simple", "interleaved") else n * log
        max_t = math.ceil(budget_factor * cycle) if budget_factor is not None else None
        warmup = math.ceil(warmup_factor * cycle) if warmup_factor is not None else None
        sample_every = sample_every_rule(n) if sample_every_rule is not None else None
        for k in range(seeds):
            out.append(
                RunConfig(
                    n=n,
                    alpha=alpha,
                    mode=mode,
                    matcher=matcher,
                    seed=seed0 + k,
                    max_t=max_t,
                    sample_every=sample_every,
                    warmup_t=warmup,
                    c_window=c_window,
                )
            )
    return out
