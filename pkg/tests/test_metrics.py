"""Tests for measurement: counters, disagreement, criticality, the audit."""

from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evomatch.engine import EvolutionEvent, EvolutionMode, EvolvingInstance
from evomatch.matchers import InterleavedMatcher
from evomatch.metrics import (
    BEST_UNPROPOSED_SWAP,
    CSV_HEADER,
    AuditResult,
    CriticalityTracker,
    MATCH_SWAP,
    RunAuditRecord,
    Sample,
    TimeSeriesRecord,
    blocking_pair_set,
    claim1_audit,
    classify_event,
    count_blocking,
    element_disagreement_counts,
    max_disagreement,
    ranks_from_order,
    sample_blocking,
)
from evomatch.model import (
    Matching,
    Permutation,
    blocking_pairs,
    element_disagreements,
    random_profile,
)


def rank_mats(profile):
    ra = np.array([p.rank_of for p in profile.a_lists])
    rb = np.array([p.rank_of for p in profile.b_lists])
    return ra, rb


# ------------------------------------------------------- fast counters


@given(st.integers(1, 8), st.integers(0, 2**16))
@settings(max_examples=80, deadline=None)
def test_fast_blocking_matches_oracle(n, seed):
    rng = np.random.default_rng(seed)
    profile = random_profile(n, rng)
    m = Matching.from_a_to_b(rng.permutation(n).tolist())
    ra, rb = rank_mats(profile)
    oracle = blocking_pairs(profile, m)
    assert count_blocking(ra, rb, m) == len(oracle)
    assert blocking_pair_set(ra, rb, m) == oracle


@given(st.integers(2, 8).flatmap(lambda n: st.tuples(st.permutations(range(n)), st.permutations(range(n)))))
def test_disagreement_counts_match_scalar_oracle(pair):
    p = Permutation.from_order(pair[0])
    q = Permutation.from_order(pair[1])
    counts = element_disagreement_counts(p, q)
    assert [int(c) for c in counts] == [element_disagreements(p, q, u) for u in range(len(p))]


def test_max_disagreement_over_families():
    ident = list(range(6))
    rev = ranks_from_order(list(reversed(ident)))
    assert max_disagreement([ident], [ident]) == 0
    assert max_disagreement([ident, ident], [ident, rev]) == 5
    assert ranks_from_order([2, 0, 1]) == [1, 2, 0]


# ------------------------------------------------------- time series


def test_record_csv_round_trip():
    record = TimeSeriesRecord()
    record.append(Sample(0, 12, 0, 0, 0, 0))
    record.append(Sample(5, 9, 5, 3, 1, 2))
    text = record.to_csv()
    assert text.splitlines()[0] == CSV_HEADER
    back = TimeSeriesRecord.from_csv(text)
    assert back.samples == record.samples


def test_record_validates_monotonicity():
    record = TimeSeriesRecord()
    record.append(Sample(3, 1, 4, 2, 1, 0))
    with pytest.raises(ValueError):
        record.append(Sample(3, 1, 5, 2, 1, 0))
    with pytest.raises(ValueError):
        record.append(Sample(4, 1, 3, 2, 1, 0))
    with pytest.raises(ValueError):
        TimeSeriesRecord.from_csv("a,b\n1,2\n")


def test_post_warmup_filter():
    record = TimeSeriesRecord()
    for t in (0, 10, 20, 30):
        record.append(Sample(t, 1, t, 0, 0, 0))
    assert [s.t for s in record.post_warmup(15)] == [20, 30]
    assert [s.t for s in record.post_warmup(20)] == [20, 30]


def test_sample_blocking_against_oracle():
    profile = random_profile(9, np.random.default_rng(3))
    inst = EvolvingInstance(profile, 2, EvolutionMode.TWO_SIDED, np.random.default_rng(4))

    class State:
        published = Matching.from_a_to_b(np.random.default_rng(5).permutation(9).tolist())
        proposals = 7
        runs_completed = 1

    record = TimeSeriesRecord()
    for stop in (6, 13):
        while inst.t < stop:
            inst.query(0, 1, 2)
        s = sample_blocking(inst, State, record)
        assert s.blocking_pairs == len(blocking_pairs(inst.snapshot(), State.published))
        assert s.queries == inst.query_count
    assert len(record) == 2


# ------------------------------------------------------- classification


class StubCtx:
    def __init__(self, n, matches=None, best=None):
        self.n = n
        self._matches = matches or {}
        self._best = best or {}

    def match_of(self, z):
        return self._matches.get(z, -1)

    def best_unproposed(self, x):
        return self._best.get(x, -1)


def test_classify_event_cases():
    n = 6
    ev = EvolutionEvent(t=4, z=2, pos=1, u=3, v=5)
    assert classify_event(ev, StubCtx(n)) == ()
    assert classify_event(ev, StubCtx(n, matches={2: 5})) == (MATCH_SWAP,)
    assert classify_event(ev, StubCtx(n, best={2: 3})) == (BEST_UNPROPOSED_SWAP,)
    assert classify_event(ev, StubCtx(n, matches={2: 3}, best={2: 5})) == (
        MATCH_SWAP,
        BEST_UNPROPOSED_SWAP,
    )
    # B-side lists never carry the proposer flag.
    bev = EvolutionEvent(t=4, z=n + 1, pos=0, u=2, v=4)
    assert classify_event(bev, StubCtx(n, matches={n + 1: 4}, best={n + 1: 2})) == (MATCH_SWAP,)


def test_tracker_best_unproposed_cache_stays_coherent():
    # Drive a real interleaved run and recompute every proposer's true best
    # unproposed candidate from scratch after each step.
    n = 8
    profile = random_profile(n, np.random.default_rng(21))
    inst = EvolvingInstance(profile, 2, EvolutionMode.TWO_SIDED, np.random.default_rng(22), record_events=False)
    tracker = CriticalityTracker(inst)
    inst._classifier = tracker
    matcher = InterleavedMatcher(inst, random.Random(23), tracker=tracker)
    proc = matcher.process()
    req = next(proc)
    checked = 0
    while inst.t < 3000:
        req = proc.send(inst.query(*req) if req is not None else inst.idle_step())
        if tracker._bu is None:
            continue
        for x in range(n):
            inv = inst.inv_view(x)
            expect = next((c for c in inv if not tracker._proposed[x][c]), -1)
            assert tracker._bu[x] == expect
            checked += 1
    assert checked > 0


def test_tracker_counts_match_swaps():
    # With a bound matching, an event adjacent to the partner must flag.
    n = 5
    profile = random_profile(n, np.random.default_rng(31))
    inst = EvolvingInstance(profile, 0, EvolutionMode.TWO_SIDED, np.random.default_rng(32))
    tracker = CriticalityTracker(inst)
    inst._classifier = tracker
    match_a = list(range(n))
    match_b = list(range(n))
    tracker.bind_run(match_a, match_b, None, None)
    hits = 0
    for _ in range(200):
        ev = inst.apply_evolution_event()
        m = match_a[ev.z] if ev.z < n else match_b[ev.z - n]
        if ev.u == m or ev.v == m:
            hits += 1
            assert MATCH_SWAP in ev.critical
            assert ev.z in tracker._crit_owners
        else:
            assert MATCH_SWAP not in ev.critical
    assert hits > 0
    assert inst.critical_count == hits


# ------------------------------------------------------- audit


def test_claim1_audit_synthetic():
    n = 4
    records = [
        # Both pairs explained: one through the A list, one through the B list.
        RunAuditRecord(n, 0, 10, 2, frozenset({1, n + 2}), frozenset({(1, 3), (0, 2)})),
        # One unexplained pair.
        RunAuditRecord(n, 10, 20, 2, frozenset({0}), frozenset({(0, 1), (3, 2)})),
        # Too stale to audit; its violations must not count.
        RunAuditRecord(n, 20, 30, 99, frozenset(), frozenset({(2, 2)})),
    ]
    result = claim1_audit(records, max_start_disagreement=10)
    assert result.runs_audited == 2
    assert result.runs_skipped == 1
    assert result.pairs_total == 4
    assert result.violations == ((3, 2),)
    assert result.violation_rate == 0.25
    empty = claim1_audit([], 10)
    assert isinstance(empty, AuditResult)
    assert empty.violation_rate == 0.0
