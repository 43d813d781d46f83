"""The evolving world: comparison queries, the clock, and nature's swaps.

One EvolvingInstance owns the mutable truth. Per time-step exactly one
query is answered (or one idle step is consumed) against the current
state, then alpha uniform random adjacent swaps are applied. Preference
lists are addressed by a flat id z in [0, 2n): ids below n are A-side
lists (ranking B-agents), ids n and above are B-side lists.

Clock convention: t counts time-steps. Query-driven clients keep
t == query_count; idle steps (a scheduler with nothing to ask) advance t
and evolution without a query, because nature does not wait.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable

import numpy as np

from evomatch.model import Permutation, PreferenceProfile

_BLOCK = 1 << 14


class EvolutionMode(Enum):
    TWO_SIDED = "two_sided"
    ONE_SIDED_B = "one_sided_b"


@dataclass(frozen=True, slots=True)
class EvolutionEvent:
    """One adjacent swap: pre-swap occupants u at rank pos, v at rank pos+1.

    All indices 0-based internally; JSON export is 1-based.
    """

    t: int
    z: int
    pos: int
    u: int
    v: int
    critical: tuple[str, ...] = ()


# classifier(z, pos, u, v) -> criticality flags, called before the swap
Classifier = Callable[[int, int, int, int], tuple[str, ...]]


class EvolvingInstance:
    def __init__(
        self,
        profile: PreferenceProfile,
        alpha: int,
        mode: EvolutionMode,
        nature_rng: np.random.Generator,
        *,
        record_events: bool = True,
        classifier: Classifier | None = None,
    ) -> None:
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        self.n = profile.n
        self.alpha = alpha
        self.mode = mode
        self.t = 0
        self.query_count = 0
        self.critical_count = 0
        self.event_log: list[EvolutionEvent] = []
        self.initial_profile = profile
        self._record = record_events
        self._classifier = classifier
        self._rng = nature_rng
        # Mutable rank and inverse views per list, indexed by flat list id.
        self._rank = [list(p.rank_of) for p in profile.a_lists + profile.b_lists]
        self._inv = [list(p.inverse) for p in profile.a_lists + profile.b_lists]
        # Numpy mirror of _rank, updated per swap so sampling stays O(1)-ish.
        self._rank_np = np.array(self._rank, dtype=np.int32)
        self._z_lo = self.n if mode is EvolutionMode.ONE_SIDED_B else 0
        self._z_block: list[int] = []
        self._i_block: list[int] = []
        self._block_pos = 0
        self._skip_evolution = alpha == 0 or self.n == 1

    @property
    def events_applied(self) -> int:
        return 0 if self.n == 1 else self.alpha * self.t

    def set_classifier(self, classifier: Classifier | None) -> None:
        self._classifier = classifier

    # ------------------------------------------------------------ stepping

    def query(self, z: int, u: int, v: int) -> bool:
        """Answer whether list z ranks u above v, then advance one step."""
        n = self.n
        if u == v or not 0 <= u < n or not 0 <= v < n or not 0 <= z < 2 * n:
            raise ValueError(f"malformed query triple ({z}, {u}, {v})")
        rz = self._rank[z]
        answer = rz[u] < rz[v]
        self.query_count += 1
        self.t += 1
        if not self._skip_evolution:
            self._evolve()
        return answer

    def idle_step(self) -> None:
        """Consume one time-step without a query; evolution still occurs."""
        self.t += 1
        if not self._skip_evolution:
            self._evolve()

    def _evolve(self) -> None:
        pos = self._block_pos
        zb = self._z_block
        ib = self._i_block
        inv = self._inv
        rank = self._rank
        rnp = self._rank_np
        cb = self._classifier
        rec = self._record
        log = self.event_log
        t = self.t
        for _ in range(self.alpha):
            if pos == len(zb):
                self._refill()
                zb = self._z_block
                ib = self._i_block
                pos = 0
            z = zb[pos]
            i0 = ib[pos]
            pos += 1
            iz = inv[z]
            u = iz[i0]
            v = iz[i0 + 1]
            if cb is not None:
                flags = cb(z, i0, u, v)
                if flags:
                    self.critical_count += 1
            else:
                flags = ()
            iz[i0] = v
            iz[i0 + 1] = u
            rz = rank[z]
            rz[u] = i0 + 1
            rz[v] = i0
            rnp[z, u] = i0 + 1
            rnp[z, v] = i0
            if rec:
                log.append(EvolutionEvent(t, z, i0, u, v, flags))
        self._block_pos = pos

    def _refill(self) -> None:
        self._z_block = self._rng.integers(self._z_lo, 2 * self.n, size=_BLOCK).tolist()
        self._i_block = self._rng.integers(0, self.n - 1, size=_BLOCK).tolist()

    def apply_evolution_event(self) -> EvolutionEvent:
        """Draw and apply a single swap outside the step loop (test support)."""
        if self.n == 1:
            raise ValueError("no adjacent positions exist at n=1")
        if self._block_pos == len(self._z_block):
            self._refill()
            self._block_pos = 0
        z = self._z_block[self._block_pos]
        i0 = self._i_block[self._block_pos]
        self._block_pos += 1
        iz = self._inv[z]
        u = iz[i0]
        v = iz[i0 + 1]
        flags = ()
        if self._classifier is not None:
            flags = self._classifier(z, i0, u, v)
            if flags:
                self.critical_count += 1
        iz[i0] = v
        iz[i0 + 1] = u
        rz = self._rank[z]
        rz[u] = i0 + 1
        rz[v] = i0
        self._rank_np[z, u] = i0 + 1
        self._rank_np[z, v] = i0
        event = EvolutionEvent(self.t, z, i0, u, v, flags)
        if self._record:
            self.event_log.append(event)
        return event

    # ------------------------------------------------------------ free reads

    def snapshot(self) -> PreferenceProfile:
        """Deep copy of the current truth; consumes no time-step."""
        n = self.n
        perms = [
            Permutation(tuple(self._rank[z]), tuple(self._inv[z])) for z in range(2 * n)
        ]
        return PreferenceProfile(n, tuple(perms[:n]), tuple(perms[n:]))

    def read_a_lists(self) -> tuple[Permutation, ...]:
        """Free access to the static A-side truth; only legal one-sided."""
        if self.mode is not EvolutionMode.ONE_SIDED_B:
            raise ValueError("A-side lists are only readable under one-sided evolution")
        return self.initial_profile.a_lists

    def rank_view(self, z: int) -> list[int]:
        """Live rank array of list z. Callers must treat it as read-only."""
        return self._rank[z]

    def inv_view(self, z: int) -> list[int]:
        """Live rank -> agent array of list z. Read-only for callers."""
        return self._inv[z]

    def rank_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """Rank snapshot as (A-side, B-side) n x n matrices; a free read."""
        n = self.n
        return self._rank_np[:n].copy(), self._rank_np[n:].copy()


def drive(instance: EvolvingInstance, proc) -> object:
    """Run a query process to completion against the engine.

    A process is a generator yielding (z, u, v) triples (answered with one
    live query each) or None (consumed as an idle step); its return value
    is passed through.
    """
    try:
        req = next(proc)
        while True:
            if req is None:
                instance.idle_step()
                req = proc.send(None)
            else:
                req = proc.send(instance.query(*req))
    except StopIteration as stop:
        return stop.value


def apply_swap(rank: list[int], inv: list[int], pos: int) -> None:
    """Swap the occupants of ranks pos and pos+1 in one list, in place."""
    u = inv[pos]
    v = inv[pos + 1]
    inv[pos] = v
    inv[pos + 1] = u
    rank[u] = pos + 1
    rank[v] = pos


def replay_events(initial: PreferenceProfile, events: Iterable[EvolutionEvent]) -> PreferenceProfile:
    """Re-apply a recorded event log to its initial profile."""
    n = initial.n
    rank = [list(p.rank_of) for p in initial.a_lists + initial.b_lists]
    inv = [list(p.inverse) for p in initial.a_lists + initial.b_lists]
    for ev in events:
        if inv[ev.z][ev.pos] != ev.u or inv[ev.z][ev.pos + 1] != ev.v:
            raise ValueError(f"event at t={ev.t} does not match the replayed state")
        apply_swap(rank[ev.z], inv[ev.z], ev.pos)
    perms = [Permutation(tuple(rank[z]), tuple(inv[z])) for z in range(2 * n)]
    return PreferenceProfile(n, tuple(perms[:n]), tuple(perms[n:]))


def event_to_json(ev: EvolutionEvent, n: int) -> str:
    """One JSONL record; side plus 1-based list, pos, and agent indices."""
    obj = {
        "t": ev.t,
        "side": "A" if ev.z < n else "B",
        "list": ev.z + 1 if ev.z < n else ev.z - n + 1,
        "pos": ev.pos + 1,
        "u": ev.u + 1,
        "v": ev.v + 1,
        "critical": list(ev.critical),
    }
    return json.dumps(obj, separators=(",", ":"))


def events_to_jsonl(events: Iterable[EvolutionEvent], n: int) -> str:
    return "".join(event_to_json(ev, n) + "\n" for ev in events)


def events_from_jsonl(text: str, n: int) -> list[EvolutionEvent]:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        z = obj["list"] - 1 + (0 if obj["side"] == "A" else n)
        out.append(
            EvolutionEvent(
                t=obj["t"],
                z=z,
                pos=obj["pos"] - 1,
                u=obj["u"] - 1,
                v=obj["v"] - 1,
                critical=tuple(obj["critical"]),
            )
        )
    return out
