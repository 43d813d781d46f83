"""Measurement: time series, fast blocking-pair counts, critical events.

The exhaustive oracle in model.blocking_pairs stays authoritative; the
numpy counters here exist so that sampling large runs is cheap, and the
test suite pins them to the oracle. Criticality follows the two-part
definition: an evolution event is critical when it swaps the owner's
current match, or (for a proposer's list) the owner's live best
not-yet-proposed candidate.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Protocol, Sequence

import numpy as np

from evomatch.engine import EvolutionEvent, EvolvingInstance
from evomatch.model import Matching, Permutation

MATCH_SWAP = "match_swap"
BEST_UNPROPOSED_SWAP = "best_unproposed_swap"

CSV_HEADER = "t,blocking_pairs,queries,proposals,runs_completed,critical_events"


# ------------------------------------------------------------- time series


@dataclass(frozen=True, slots=True)
class Sample:
    t: int
    blocking_pairs: int
    queries: int
    proposals: int
    runs_completed: int
    critical_events: int


class TimeSeriesRecord:
    """Sampled measurements; t strictly increasing, counters non-decreasing."""

    def __init__(self) -> None:
        self.samples: list[Sample] = []

    def append(self, sample: Sample) -> None:
        if self.samples:
            last = self.samples[-1]
            if sample.t <= last.t:
                raise ValueError("sample times must be strictly increasing")
            if (
                sample.queries < last.queries
                or sample.proposals < last.proposals
                or sample.runs_completed < last.runs_completed
                or sample.critical_events < last.critical_events
            ):
                raise ValueError("counters must be non-decreasing")
        self.samples.append(sample)

    def post_warmup(self, warmup_t: int) -> list[Sample]:
        return [s for s in self.samples if s.t >= warmup_t]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER.split(","))
        for s in self.samples:
            writer.writerow(
                [s.t, s.blocking_pairs, s.queries, s.proposals, s.runs_completed, s.critical_events]
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> TimeSeriesRecord:
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if header != CSV_HEADER.split(","):
            raise ValueError(f"unexpected CSV header {header!r}")
        record = cls()
        for row in reader:
            record.append(Sample(*(int(x) for x in row)))
        return record

    def __len__(self) -> int:
        return len(self.samples)


# ----------------------------------------------------- fast blocking counts


def count_blocking(ra: np.ndarray, rb: np.ndarray, m: Matching) -> int:
    """Blocking-pair count from rank matrices; equals the exhaustive oracle."""
    n = ra.shape[0]
    idx = np.arange(n)
    partner_a = ra[idx, list(m.a_to_b)]
    partner_b = rb[idx, list(m.b_to_a)]
    blocked = (ra < partner_a[:, None]) & (rb < partner_b[:, None]).T
    return int(blocked.sum())


def blocking_pair_set(ra: np.ndarray, rb: np.ndarray, m: Matching) -> set[tuple[int, int]]:
    """Identities of the blocking pairs, same route as count_blocking."""
    n = ra.shape[0]
    idx = np.arange(n)
    partner_a = ra[idx, list(m.a_to_b)]
    partner_b = rb[idx, list(m.b_to_a)]
    blocked = (ra < partner_a[:, None]) & (rb < partner_b[:, None]).T
    return {(int(x), int(y)) for x, y in np.argwhere(blocked)}


class MatcherView(Protocol):
    published: Matching
    proposals: int
    runs_completed: int


def sample_blocking(instance: EvolvingInstance, state: MatcherView, record: TimeSeriesRecord) -> Sample:
    """Measure the published matching against the live truth; free of queries."""
    ra, rb = instance.rank_matrices()
    sample = Sample(
        t=instance.t,
        blocking_pairs=count_blocking(ra, rb, state.published),
        queries=instance.query_count,
        proposals=state.proposals,
        runs_completed=state.runs_completed,
        critical_events=instance.critical_count,
    )
    record.append(sample)
    return sample


# ------------------------------------------------------------ disagreement


def element_disagreement_counts(p: Permutation | Sequence[int], q: Permutation | Sequence[int]) -> np.ndarray:
    """Per-element pairwise disagreement counts between two rank views.

    Entry u counts the agents v that sit on different sides of u in the
    two orders; vectorized twin of model.element_disagreements.
    """
    pr = np.asarray(p.rank_of if isinstance(p, Permutation) else p)
    qr = np.asarray(q.rank_of if isinstance(q, Permutation) else q)
    if pr.shape != qr.shape:
        raise ValueError("rank views must have equal length")
    above_p = pr[:, None] > pr[None, :]
    above_q = qr[:, None] > qr[None, :]
    return (above_p != above_q).sum(axis=1)


def max_disagreement(live_ranks: Iterable[Sequence[int]], approx_ranks: Iterable[Sequence[int]]) -> int:
    """Max per-element disagreement across a family of list pairs."""
    worst = 0
    for lp, ap in zip(live_ranks, approx_ranks):
        pr = np.asarray(lp)
        qr = np.asarray(ap)
        d = ((pr[:, None] > pr[None, :]) != (qr[:, None] > qr[None, :])).sum(axis=1).max()
        worst = max(worst, int(d))
    return worst


def ranks_from_order(order: Sequence[int]) -> list[int]:
    ranks = [0] * len(order)
    for r, agent in enumerate(order):
        ranks[agent] = r
    return ranks


# -------------------------------------------------------------- criticality


class CriticalityContext(Protocol):
    n: int

    def match_of(self, z: int) -> int: ...

    def best_unproposed(self, x: int) -> int: ...


def classify_event(event: EvolutionEvent, ctx: CriticalityContext) -> tuple[str, ...]:
    """Pure two-part classification of one pre-swap event against a context."""
    flags = []
    m = ctx.match_of(event.z)
    if m >= 0 and (event.u == m or event.v == m):
        flags.append(MATCH_SWAP)
    if event.z < ctx.n:
        b = ctx.best_unproposed(event.z)
        if b >= 0 and (event.u == b or event.v == b):
            flags.append(BEST_UNPROPOSED_SWAP)
    return tuple(flags)


@dataclass(frozen=True, slots=True)
class RunAuditRecord:
    """Everything the blocking-pair audit needs about one completed run."""

    n: int
    started_at: int
    published_at: int
    start_max_disagreement: int
    critical_owners: frozenset[int]
    blocking: frozenset[tuple[int, int]]


class CriticalityTracker:
    """Live criticality classifier wired between a matcher and the engine.

    The matcher binds its per-run working state (match arrays, proposed
    flags, the approximation snapshot); the engine invokes the tracker on
    every evolution event before the swap is applied. The tracker keeps a
    coherent cache of each proposer's live best unproposed candidate:
    adjacent swaps can change that candidate only by crossing it, which
    the event itself reveals, and proposals advance it via on_propose.
    """

    def __init__(self, instance: EvolvingInstance) -> None:
        self._instance = instance
        self.n = instance.n
        self._match_a: list[int] | None = None
        self._match_b: list[int] | None = None
        self._proposed: list[bytearray] | None = None
        self._bu: list[int] | None = None
        self._crit_owners: set[int] = set()
        self.records: list[RunAuditRecord] = []
        self._started_at = 0
        self._start_max_disagreement = 0

    # engine callback, invoked pre-swap
    def __call__(self, z: int, pos: int, u: int, v: int) -> tuple[str, ...]:
        flags: tuple[str, ...] = ()
        m = self.match_of(z)
        if m >= 0 and (u == m or v == m):
            flags = (MATCH_SWAP,)
        if z < self.n and self._bu is not None:
            b = self._bu[z]
            if b >= 0 and (u == b or v == b):
                flags = flags + (BEST_UNPROPOSED_SWAP,)
            # Maintain the cache: if the best candidate moves down one
            # rank, the promoted neighbour takes over when unproposed.
            if b == u and not self._proposed[z][v]:
                self._bu[z] = v
        if flags:
            self._crit_owners.add(z)
        return flags

    # CriticalityContext interface
    def match_of(self, z: int) -> int:
        if z < self.n:
            return self._match_a[z] if self._match_a is not None else -1
        return self._match_b[z - self.n] if self._match_b is not None else -1

    def best_unproposed(self, x: int) -> int:
        return self._bu[x] if self._bu is not None else -1

    # matcher hooks
    def bind_run(
        self,
        match_a: list[int],
        match_b: list[int],
        proposed: list[bytearray] | None,
        approx_orders: list[list[int]] | None,
    ) -> None:
        """Attach a fresh run's working state; called at run start."""
        self._match_a = match_a
        self._match_b = match_b
        self._proposed = proposed
        self._crit_owners = set()
        self._started_at = self._instance.t
        if proposed is not None:
            self._bu = [self._instance.inv_view(x)[0] for x in range(self.n)]
        else:
            self._bu = None
        if approx_orders is not None:
            live = [self._instance.rank_view(x) for x in range(self.n)]
            approx = [ranks_from_order(o) for o in approx_orders]
            self._start_max_disagreement = max_disagreement(live, approx)
        else:
            self._start_max_disagreement = 0

    def on_propose(self, x: int, y: int) -> None:
        """Advance the best-unproposed cache after x proposes to y."""
        if self._bu is None or self._bu[x] != y:
            return
        inv = self._instance.inv_view(x)
        start = self._instance.rank_view(x)[y] + 1
        proposed = self._proposed[x]
        for r in range(start, self.n):
            c = inv[r]
            if not proposed[c]:
                self._bu[x] = c
                return
        self._bu[x] = -1

    def run_published(self, matching: Matching) -> RunAuditRecord:
        """Seal the finished run into an audit record."""
        ra, rb = self._instance.rank_matrices()
        record = RunAuditRecord(
            n=self.n,
            started_at=self._started_at,
            published_at=self._instance.t,
            start_max_disagreement=self._start_max_disagreement,
            critical_owners=frozenset(self._crit_owners),
            blocking=frozenset(blocking_pair_set(ra, rb, matching)),
        )
        self.records.append(record)
        return record


@dataclass(frozen=True, slots=True)
class AuditResult:
    runs_audited: int
    runs_skipped: int
    pairs_total: int
    violations: tuple[tuple[int, int], ...]

    @property
    def violation_rate(self) -> float:
        return len(self.violations) / self.pairs_total if self.pairs_total else 0.0


def claim1_audit(records: Iterable[RunAuditRecord], max_start_disagreement: int) -> AuditResult:
    """Check that each blocking pair had a critical event on one of its lists.

    Runs whose approximation was not verifiably close to the live truth at
    run start are skipped: the property is only expected to hold when the
    lists were approximately sorted, so those runs carry no evidence.
    Violations are reported, not asserted; the precondition itself only
    holds with high probability.
    """
    audited = 0
    skipped = 0
    pairs = 0
    violations: list[tuple[int, int]] = []
    for rec in records:
        if rec.start_max_disagreement > max_start_disagreement:
            skipped += 1
            continue
        audited += 1
        for x, y in rec.blocking:
            pairs += 1
            if x not in rec.critical_owners and (rec.n + y) not in rec.critical_owners:
                violations.append((x, y))
    return AuditResult(audited, skipped, pairs, tuple(violations))
