"""Sorting against the live comparison oracle.

Randomized quicksort is written as a pausable process: a generator that
yields one (list, u, v) comparison per step and receives the oracle's
answer. Because the underlying list keeps evolving while the sort runs,
answers can be mutually inconsistent; the sort accepts them as-is and
always returns some total order over the items.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Generator, Iterable, Sequence

from evomatch.engine import EvolvingInstance, drive
from evomatch.model import Permutation

QueryGen = Generator[tuple[int, int, int], bool, list[int]]


@dataclass(frozen=True, slots=True)
class SortOutcome:
    owner: int
    approx: Permutation
    started_at: int
    finished_at: int
    comparisons: int


def quicksort_process(owner: int, items: Sequence[int], rng: random.Random) -> QueryGen:
    """Quicksort the items by the live preferences of list `owner`.

    Uniform random pivots; the pivot is moved to the front of its range
    and the remaining elements are scanned left to right, one query each,
    so a run is fully determined by the pivot stream and the answers.
    Returns the items most-preferred-first.
    """
    arr = list(items)
    # Stack of half-open ranges; the right half is pushed first so the
    # left half is fully sorted before the right one starts.
    stack = [(0, len(arr))]
    while stack:
        lo, hi = stack.pop()
        if hi - lo <= 1:
            continue
        p = rng.randrange(lo, hi)
        arr[lo], arr[p] = arr[p], arr[lo]
        pivot = arr[lo]
        before: list[int] = []
        after: list[int] = []
        for idx in range(lo + 1, hi):
            item = arr[idx]
            preferred = yield (owner, item, pivot)
            if preferred:
                before.append(item)
            else:
                after.append(item)
        arr[lo : lo + len(before)] = before
        mid = lo + len(before)
        arr[mid] = pivot
        arr[mid + 1 : hi] = after
        stack.append((mid + 1, hi))
        stack.append((lo, mid))
    return arr


def evolving_quicksort(instance: EvolvingInstance, owner: int, alg_rng: random.Random) -> SortOutcome:
    """Sort one list to completion, one time-step per comparison."""
    if not 0 <= owner < 2 * instance.n:
        raise ValueError(f"owner {owner} out of range")
    started = instance.t
    queries_before = instance.query_count
    order = drive(instance, quicksort_process(owner, range(instance.n), alg_rng))
    return SortOutcome(
        owner=owner,
        approx=Permutation.from_order(order),
        started_at=started,
        finished_at=instance.t,
        comparisons=instance.query_count - queries_before,
    )


def sequential_sort(
    instance: EvolvingInstance, owners: Iterable[int], alg_rng: random.Random
) -> dict[int, SortOutcome]:
    """Sort each owner's list in the given order on one shared clock."""
    owners = list(owners)
    if not owners:
        raise ValueError("owners must be non-empty")
    if len(set(owners)) != len(owners):
        raise ValueError("duplicate owners")
    return {owner: evolving_quicksort(instance, owner, alg_rng) for owner in owners}
