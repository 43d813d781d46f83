"""Tests for the evolving-instance engine: stepping, logging, replay, modes."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from evomatch.engine import (
    EvolutionEvent,
    EvolutionMode,
    EvolvingInstance,
    apply_swap,
    events_from_jsonl,
    events_to_jsonl,
    replay_events,
)
from evomatch.model import kendall_tau, random_profile


def make_instance(n, alpha, mode=EvolutionMode.TWO_SIDED, seed=7, **kw):
    profile = random_profile(n, np.random.default_rng(seed))
    return EvolvingInstance(profile, alpha, mode, np.random.default_rng(seed + 1), **kw)


def random_queries(inst, count, seed=0):
    rng = np.random.default_rng(seed)
    n = inst.n
    answers = []
    for _ in range(count):
        z = int(rng.integers(0, 2 * n))
        u = int(rng.integers(0, n))
        v = (u + 1 + int(rng.integers(0, n - 1))) % n
        answers.append(inst.query(z, u, v))
    return answers


def test_determinism_same_seed():
    a = make_instance(8, 2, seed=11)
    b = make_instance(8, 2, seed=11)
    assert random_queries(a, 500, seed=3) == random_queries(b, 500, seed=3)
    assert a.event_log == b.event_log
    assert a.snapshot() == b.snapshot()


def test_clock_and_log_lengths():
    inst = make_instance(6, 3)
    random_queries(inst, 40)
    inst.idle_step()
    inst.idle_step()
    assert inst.t == 42
    assert inst.query_count == 40
    assert inst.events_applied == 3 * 42
    assert len(inst.event_log) == 3 * 42
    ts = [ev.t for ev in inst.event_log]
    assert ts == sorted(ts)


def test_alpha_zero_is_static():
    inst = make_instance(5, 0)
    before = inst.snapshot()
    random_queries(inst, 200)
    assert inst.snapshot() == before
    assert inst.event_log == []
    # Answers match the frozen profile.
    rank = before.a_lists[2].rank_of
    assert inst.query(2, 0, 1) == (rank[0] < rank[1])


def test_query_answers_preevolution_state():
    # The answer must reflect the state before this step's swaps.
    inst = make_instance(4, 5, seed=23)
    snap = inst.snapshot()
    rank = snap.a_lists[1].rank_of
    assert inst.query(1, 2, 3) == (rank[2] < rank[3])


def test_malformed_query_rejected_without_clock_advance():
    inst = make_instance(4, 1)
    for bad in [(0, 1, 1), (0, -1, 2), (0, 1, 4), (8, 0, 1), (-1, 0, 1)]:
        with pytest.raises(ValueError):
            inst.query(*bad)
    assert inst.t == 0
    assert inst.event_log == []


def test_one_sided_a_lists_frozen():
    inst = make_instance(6, 4, mode=EvolutionMode.ONE_SIDED_B)
    a_before = inst.read_a_lists()
    random_queries(inst, 300)
    assert inst.snapshot().a_lists == a_before
    assert all(ev.z >= inst.n for ev in inst.event_log)


def test_read_a_lists_gated_by_mode():
    inst = make_instance(4, 1, mode=EvolutionMode.TWO_SIDED)
    with pytest.raises(ValueError):
        inst.read_a_lists()


def test_n1_degenerate():
    inst = make_instance(1, 3)
    before = inst.snapshot()
    for _ in range(5):
        inst.idle_step()
    assert inst.snapshot() == before
    assert inst.events_applied == 0
    with pytest.raises(ValueError):
        inst.apply_evolution_event()


def test_apply_swap_involution():
    rank = [2, 0, 1, 3]
    inv = [1, 2, 0, 3]
    apply_swap(rank, inv, 1)
    apply_swap(rank, inv, 1)
    assert rank == [2, 0, 1, 3]
    assert inv == [1, 2, 0, 3]


def test_apply_evolution_event_returns_preswap_occupants():
    inst = make_instance(5, 0)
    before = inst.snapshot()
    ev = inst.apply_evolution_event()
    lists = before.a_lists + before.b_lists
    assert lists[ev.z].inverse[ev.pos] == ev.u
    assert lists[ev.z].inverse[ev.pos + 1] == ev.v
    after = inst.snapshot()
    assert (after.a_lists + after.b_lists)[ev.z].inverse[ev.pos] == ev.v


@given(
    st.integers(2, 6),
    st.integers(0, 3),
    st.integers(0, 2**16),
    st.sampled_from(list(EvolutionMode)),
)
@settings(max_examples=40, deadline=None)
def test_replay_reconstructs_snapshot(n, alpha, seed, mode):
    inst = make_instance(n, alpha, mode=mode, seed=seed)
    random_queries(inst, 60, seed=seed)
    inst.idle_step()
    replayed = replay_events(inst.initial_profile, inst.event_log)
    assert replayed == inst.snapshot()


def test_replay_rejects_inconsistent_log():
    inst = make_instance(4, 1, seed=5)
    random_queries(inst, 10)
    bad = list(inst.event_log)
    ev = bad[3]
    bad[3] = EvolutionEvent(ev.t, ev.z, ev.pos, ev.v, ev.u, ev.critical)
    with pytest.raises(ValueError):
        replay_events(inst.initial_profile, bad)


def test_snapshot_divergence_bounded_by_event_count():
    inst = make_instance(8, 1, seed=9)
    first = inst.snapshot()
    k = 50
    random_queries(inst, k, seed=2)
    second = inst.snapshot()
    moved = sum(
        kendall_tau(p, q)
        for p, q in zip(first.a_lists + first.b_lists, second.a_lists + second.b_lists)
    )
    assert moved <= k * inst.alpha


def test_event_distribution_uniform():
    # (z, i) should be uniform over lists x positions under two-sided evolution.
    n = 16
    inst = make_instance(n, 2, seed=31)
    random_queries(inst, 50_000, seed=4)
    counts = np.zeros((2 * n, n - 1), dtype=int)
    for ev in inst.event_log:
        counts[ev.z, ev.pos] += 1
    assert stats.chisquare(counts.ravel()).pvalue > 0.01


def test_events_jsonl_round_trip():
    inst = make_instance(5, 2, seed=13)
    random_queries(inst, 30)
    text = events_to_jsonl(inst.event_log, inst.n)
    assert events_from_jsonl(text, inst.n) == inst.event_log
    first = text.splitlines()[0]
    assert first.startswith('{"t":1,"side":')


def test_record_events_switch():
    inst = make_instance(6, 2, record_events=False)
    random_queries(inst, 100)
    assert inst.event_log == []
    assert inst.events_applied == 200
