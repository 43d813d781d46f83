"""The four matching procedures.

Every dynamic matcher exposes process(), a generator speaking the drive
protocol: it yields (list, u, v) comparison triples answered by one live
query each, or None to consume an idle step when it has nothing to ask.
Matchers publish only completed runs; published is a perfect matching at
every time-step, starting from the identity placeholder, which is garbage
until the first run completes.
"""

from __future__ import annotations

import math
import random

from evomatch.engine import EvolutionMode, EvolvingInstance
from evomatch.metrics import CriticalityTracker
from evomatch.model import Matching, Permutation, PreferenceProfile, identity_matching
from evomatch.sorting import quicksort_process


def gale_shapley_static(profile: PreferenceProfile) -> tuple[Matching, int]:
    """A-proposing deferred acceptance on a frozen profile; no oracle.

    Returns the A-optimal stable matching and the proposal count; both are
    independent of the order free agents are processed in.
    """
    n = profile.n
    pref_a = [p.inverse for p in profile.a_lists]
    rank_b = [p.rank_of for p in profile.b_lists]
    next_idx = [0] * n
    match_a = [-1] * n
    match_b = [-1] * n
    free = list(range(n - 1, -1, -1))
    proposals = 0
    while free:
        x = free.pop()
        y = pref_a[x][next_idx[x]]
        next_idx[x] += 1
        proposals += 1
        cur = match_b[y]
        if cur < 0:
            match_b[y] = x
            match_a[x] = y
        elif rank_b[y][x] < rank_b[y][cur]:
            match_b[y] = x
            match_a[x] = y
            match_a[cur] = -1
            free.append(cur)
        else:
            free.append(x)
    return Matching.from_a_to_b(match_a), proposals


def best_of_window(instance: EvolvingInstance, x: int, candidates) -> int:
    """Find the live-best candidate by a left-to-right scan of live queries.

    len(candidates) - 1 queries; candidates must be agents x has not yet
    proposed to. The matching process below inlines the same scan.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("candidate window must be non-empty")
    best = candidates[0]
    for c in candidates[1:]:
        if instance.query(x, c, best):
            best = c
    return best


class StaticGSMatcher:
    """Offline control: one deferred-acceptance run on the t=0 snapshot."""

    def __init__(self, instance: EvolvingInstance, alg_rng: random.Random | None = None) -> None:
        self._instance = instance
        self.published = identity_matching(instance.n)
        self.proposals = 0
        self.runs_completed = 0

    def process(self):
        matching, proposals = gale_shapley_static(self._instance.snapshot())
        self.published = matching
        self.proposals = proposals
        self.runs_completed = 1
        while True:
            yield None


class SimpleDynamicMatcher:
    """Sort every list, match offline on the result, publish, repeat.

    Each cycle runs the sequential sorter over all 2n lists (one query per
    comparison) and then deferred acceptance on the assembled approximation,
    which costs no queries.
    """

    def __init__(self, instance: EvolvingInstance, alg_rng: random.Random) -> None:
        if instance.mode is not EvolutionMode.TWO_SIDED:
            raise ValueError("this matcher requires two-sided evolution")
        self._instance = instance
        self._rng = alg_rng
        self.published = identity_matching(instance.n)
        self.proposals = 0
        self.runs_completed = 0
        self.sort_passes = 0
        self.approx_profile: PreferenceProfile | None = None

    def process(self):
        instance = self._instance
        n = instance.n
        while True:
            queries_before = instance.query_count
            orders = []
            for owner in range(2 * n):
                order = yield from quicksort_process(owner, range(n), self._rng)
                orders.append(order)
            self.sort_passes += 1
            approx = PreferenceProfile(
                n,
                tuple(Permutation.from_order(o) for o in orders[:n]),
                tuple(Permutation.from_order(o) for o in orders[n:]),
            )
            matching, proposals = gale_shapley_static(approx)
            self.approx_profile = approx
            self.proposals += proposals
            self.published = matching
            self.runs_completed += 1
            if instance.query_count == queries_before:
                # Degenerate sizes sort with zero comparisons; let time pass.
                yield None


class OneSidedMatcher:
    """Deferred acceptance with known static A-lists and live acceptance tests.

    Only legal under one-sided evolution: the A-side truth is read once for
    free, proposals walk those static lists, and the single query per
    contested proposal asks the live B-list whether the newcomer beats the
    incumbent. Restarts from scratch forever, publishing each completed run.
    """

    def __init__(
        self,
        instance: EvolvingInstance,
        alg_rng: random.Random | None = None,
        tracker: CriticalityTracker | None = None,
    ) -> None:
        self._instance = instance
        self._pref_a = [list(p.inverse) for p in instance.read_a_lists()]
        self._tracker = tracker
        self.published = identity_matching(instance.n)
        self.proposals = 0
        self.runs_completed = 0
        self.proposal_log: list[tuple[int, int, int]] | None = None

    def process(self):
        instance = self._instance
        n = instance.n
        pref_a = self._pref_a
        tracker = self._tracker
        while True:
            queries_before = instance.query_count
            match_a = [-1] * n
            match_b = [-1] * n
            next_idx = [0] * n
            if tracker is not None:
                tracker.bind_run(match_a, match_b, None, None)
            free = list(range(n - 1, -1, -1))
            while free:
                x = free.pop()
                y = pref_a[x][next_idx[x]]
                next_idx[x] += 1
                self.proposals += 1
                if self.proposal_log is not None:
                    self.proposal_log.append((self.runs_completed, x, y))
                cur = match_b[y]
                if cur < 0:
                    match_b[y] = x
                    match_a[x] = y
                else:
                    accepted = yield (n + y, x, cur)
                    if accepted:
                        match_b[y] = x
                        match_a[x] = y
                        match_a[cur] = -1
                        free.append(cur)
                    else:
                        free.append(x)
            matching = Matching.from_a_to_b(match_a)
            self.published = matching
            self.runs_completed += 1
            if tracker is not None:
                tracker.run_published(matching)
            if instance.query_count == queries_before:
                yield None


class InterleavedMatcher:
    """Alternate a perpetual A-side sorter with a windowed matching process.

    Even time-steps run the next comparison of the sorter (all n A-lists,
    over and over); odd steps run the matching process, which proposes to
    the live-best of a window of the highest-ranked not-yet-proposed
    candidates per its snapshot, then settles contested proposals with one
    live acceptance query. The snapshot is fixed per run from the sorter's
    latest completed lists; before any list completes it is random.
    """

    def __init__(
        self,
        instance: EvolvingInstance,
        alg_rng: random.Random,
        c_window: float = 4.0,
        tracker: CriticalityTracker | None = None,
    ) -> None:
        if instance.mode is not EvolutionMode.TWO_SIDED:
            raise ValueError("this matcher requires two-sided evolution")
        if c_window <= 0:
            raise ValueError("c_window must be positive")
        n = instance.n
        self._instance = instance
        self._rng = alg_rng
        self._tracker = tracker
        self.window = max(1, min(n, math.ceil(c_window * math.log2(n)))) if n > 1 else 1
        latest = []
        for _ in range(n):
            order = list(range(n))
            alg_rng.shuffle(order)
            latest.append(order)
        self._latest = latest
        self.published = identity_matching(n)
        self.proposals = 0
        self.runs_completed = 0
        self.sort_passes = 0
        self.last_run_started_at = 0
        self.first_targets: list[int] = []
        self.approx_a_lists: list[list[int]] | None = None
        self.proposal_log: list[tuple[int, int, int]] | None = None

    def process(self):
        sorter = self._sort_forever()
        matcher = self._match_forever()
        sort_req = next(sorter)
        match_req = next(matcher)
        while True:
            answer = yield sort_req
            sort_req = sorter.send(answer)
            answer = yield match_req
            match_req = matcher.send(answer)

    def _sort_forever(self):
        instance = self._instance
        n = instance.n
        while True:
            for x in range(n):
                order = yield from quicksort_process(x, range(n), self._rng)
                self._latest[x] = order
            self.sort_passes += 1
            if n == 1:
                yield None

    def _match_forever(self):
        instance = self._instance
        n = instance.n
        window = self.window
        tracker = self._tracker
        while True:
            snapshot = [list(order) for order in self._latest]
            self.approx_a_lists = snapshot
            self.last_run_started_at = instance.t
            proposed = [bytearray(n) for _ in range(n)]
            scan_from = [0] * n
            match_a = [-1] * n
            match_b = [-1] * n
            if tracker is not None:
                tracker.bind_run(match_a, match_b, proposed, snapshot)
            queries_this_run = 0
            first_recorded = False
            free = list(range(n - 1, -1, -1))
            while free:
                x = free.pop()
                order = snapshot[x]
                flags = proposed[x]
                i = scan_from[x]
                while i < n and flags[order[i]]:
                    i += 1
                scan_from[x] = i
                # Window of the highest-ranked unproposed candidates per the
                # snapshot; non-empty because a free agent never exhausts its
                # list (n women cannot all be held by the n-1 other men).
                candidates = []
                j = i
                while j < n and len(candidates) < window:
                    c = order[j]
                    if not flags[c]:
                        candidates.append(c)
                    j += 1
                best = candidates[0]
                for c in candidates[1:]:
                    preferred = yield (x, c, best)
                    queries_this_run += 1
                    if preferred:
                        best = c
                y = best
                flags[y] = 1
                self.proposals += 1
                if self.proposal_log is not None:
                    self.proposal_log.append((self.runs_completed, x, y))
                if tracker is not None:
                    tracker.on_propose(x, y)
                if not first_recorded:
                    self.first_targets.append(y)
                    first_recorded = True
                cur = match_b[y]
                if cur < 0:
                    match_b[y] = x
                    match_a[x] = y
                else:
                    accepted = yield (n + y, x, cur)
                    queries_this_run += 1
                    if accepted:
                        match_b[y] = x
                        match_a[x] = y
                        match_a[cur] = -1
                        free.append(cur)
                    else:
                        free.append(x)
            matching = Matching.from_a_to_b(match_a)
            self.published = matching
            self.runs_completed += 1
            if tracker is not None:
                tracker.run_published(matching)
            if queries_this_run == 0:
                yield None


MATCHER_CLASSES = {
    "static_gs": StaticGSMatcher,
    "simple": SimpleDynamicMatcher,
    "one_sided": OneSidedMatcher,
    "interleaved": InterleavedMatcher,
}
