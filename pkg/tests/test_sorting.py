"""Tests for quicksort over the live oracle and the sequential driver."""

from __future__ import annotations

import math
import random
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evomatch.engine import EvolutionMode, EvolvingInstance
from evomatch.metrics import element_disagreement_counts
from evomatch.model import random_profile
from evomatch.sorting import evolving_quicksort, sequential_sort

# Frozen: observed median max-disagreement after one n=256 sort is ~1, so a
# full log2(n) of slack makes this stable across seeds.
SINGLE_SORT_DISAGREEMENT_C = 1.0


def make_instance(n, alpha, seed=0):
    profile = random_profile(n, np.random.default_rng(seed))
    return EvolvingInstance(
        profile, alpha, EvolutionMode.TWO_SIDED, np.random.default_rng(seed + 1), record_events=False
    )


@given(st.integers(1, 12), st.integers(0, 2**16))
@settings(max_examples=60, deadline=None)
def test_static_sort_equals_truth(n, seed):
    inst = make_instance(n, 0, seed)
    owner = seed % (2 * n)
    out = evolving_quicksort(inst, owner, random.Random(seed))
    lists = inst.initial_profile.a_lists + inst.initial_profile.b_lists
    assert out.approx == lists[owner]
    if n >= 2:
        assert n - 1 <= out.comparisons <= math.comb(n, 2)
    else:
        assert out.comparisons == 0
    assert out.finished_at - out.started_at == out.comparisons


@given(st.integers(2, 10), st.integers(1, 4), st.integers(0, 2**16))
@settings(max_examples=60, deadline=None)
def test_evolving_sort_output_is_permutation(n, alpha, seed):
    inst = make_instance(n, alpha, seed)
    out = evolving_quicksort(inst, 0, random.Random(seed))
    assert sorted(out.approx.inverse) == list(range(n))
    assert out.comparisons <= math.comb(n, 2)


def test_sort_determinism():
    a = evolving_quicksort(make_instance(16, 2, 42), 5, random.Random(7))
    b = evolving_quicksort(make_instance(16, 2, 42), 5, random.Random(7))
    assert a == b


def test_sequential_sort_single_owner_matches_quicksort():
    single = evolving_quicksort(make_instance(12, 1, 3), 4, random.Random(9))
    via_driver = sequential_sort(make_instance(12, 1, 3), [4], random.Random(9))
    assert via_driver == {4: single}


def test_sequential_sort_static_all_lists():
    inst = make_instance(8, 0, 17)
    outcomes = sequential_sort(inst, range(16), random.Random(1))
    lists = inst.initial_profile.a_lists + inst.initial_profile.b_lists
    assert all(outcomes[z].approx == lists[z] for z in range(16))
    # One shared clock: outcomes finish in order.
    finishes = [outcomes[z].finished_at for z in range(16)]
    assert finishes == sorted(finishes)


def test_sequential_sort_validation():
    inst = make_instance(4, 0)
    with pytest.raises(ValueError):
        sequential_sort(inst, [], random.Random(0))
    with pytest.raises(ValueError):
        sequential_sort(inst, [1, 1], random.Random(0))
    with pytest.raises(ValueError):
        evolving_quicksort(inst, 8, random.Random(0))


def test_sort_cost_stays_near_nlogn_under_evolution():
    n = 256
    comps = []
    for seed in range(100):
        inst = make_instance(n, 1, seed)
        comps.append(evolving_quicksort(inst, 0, random.Random(seed + 500)).comparisons)
    assert statistics.median(comps) <= 4 * n * math.log2(n)


def test_single_sort_disagreement_stays_logarithmic():
    # Compare the finished approximation against the live truth at finish.
    n = 256
    worst = []
    for seed in range(100):
        inst = make_instance(n, 1, seed)
        out = evolving_quicksort(inst, 0, random.Random(seed + 900))
        live = inst.snapshot().a_lists[0]
        worst.append(int(element_disagreement_counts(live, out.approx).max()))
    limit = math.ceil(SINGLE_SORT_DISAGREEMENT_C * math.log2(n))
    assert statistics.median(worst) <= limit
