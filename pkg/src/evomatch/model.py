"""Static combinatorial objects for two-sided matching markets.

Permutations carry both views (agent -> rank and rank -> agent), with ranks
0-based internally and 1-based in every text format. Profiles and matchings
are immutable values; all mutation lives in the evolution engine. The
blocking-pair counter here is the exhaustive O(n^2) oracle that every faster
counter is checked against.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from enum import Enum

import numpy as np

UNMATCHED = -1


class Side(Enum):
    A = "A"
    B = "B"


@dataclass(frozen=True, slots=True)
class Permutation:
    """A strict total order over n agents.

    rank_of[agent] is the agent's rank (0 = most preferred); inverse[rank]
    is the agent holding that rank. The two arrays are mutually inverse.
    """

    rank_of: tuple[int, ...]
    inverse: tuple[int, ...]

    @classmethod
    def from_order(cls, order) -> Permutation:
        """Build from a preference order, most preferred first."""
        inverse = tuple(order)
        n = len(inverse)
        rank_of = [UNMATCHED] * n
        for r, agent in enumerate(inverse):
            if not 0 <= agent < n or rank_of[agent] != UNMATCHED:
                raise ValueError("order is not a permutation of range(n)")
            rank_of[agent] = r
        return cls(tuple(rank_of), inverse)

    @classmethod
    def from_ranks(cls, ranks) -> Permutation:
        """Build from the agent -> rank view."""
        rank_of = tuple(ranks)
        n = len(rank_of)
        inverse = [UNMATCHED] * n
        for agent, r in enumerate(rank_of):
            if not 0 <= r < n or inverse[r] != UNMATCHED:
                raise ValueError("ranks are not a permutation of range(n)")
            inverse[r] = agent
        return cls(rank_of, tuple(inverse))

    def __len__(self) -> int:
        return len(self.rank_of)


@dataclass(frozen=True, slots=True)
class PreferenceProfile:
    """All 2n preference lists: a_lists over B-agents, b_lists over A-agents."""

    n: int
    a_lists: tuple[Permutation, ...]
    b_lists: tuple[Permutation, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("profile requires n >= 1")
        if len(self.a_lists) != self.n or len(self.b_lists) != self.n:
            raise ValueError("profile requires exactly n lists per side")
        for p in self.a_lists + self.b_lists:
            if len(p) != self.n:
                raise ValueError("every list must rank all n agents")


@dataclass(frozen=True, slots=True)
class Matching:
    """A matching between A and B; UNMATCHED entries mark unmatched agents."""

    a_to_b: tuple[int, ...]
    b_to_a: tuple[int, ...]

    @classmethod
    def from_a_to_b(cls, a_to_b) -> Matching:
        """Build a perfect matching from the A -> B map."""
        a_to_b = tuple(a_to_b)
        n = len(a_to_b)
        b_to_a = [UNMATCHED] * n
        for x, y in enumerate(a_to_b):
            if not 0 <= y < n or b_to_a[y] != UNMATCHED:
                raise ValueError("a_to_b is not a bijection")
            b_to_a[y] = x
        return cls(a_to_b, tuple(b_to_a))

    @classmethod
    def partial(cls, a_to_b, b_to_a) -> Matching:
        """Build a partial matching; inverse consistency checked on the matched subset."""
        a_to_b = tuple(a_to_b)
        b_to_a = tuple(b_to_a)
        for x, y in enumerate(a_to_b):
            if y != UNMATCHED and b_to_a[y] != x:
                raise ValueError("a_to_b and b_to_a disagree")
        for y, x in enumerate(b_to_a):
            if x != UNMATCHED and a_to_b[x] != y:
                raise ValueError("a_to_b and b_to_a disagree")
        return cls(a_to_b, b_to_a)

    @property
    def is_perfect(self) -> bool:
        return UNMATCHED not in self.a_to_b and UNMATCHED not in self.b_to_a

    def __len__(self) -> int:
        return len(self.a_to_b)


def identity_matching(n: int) -> Matching:
    return Matching.from_a_to_b(range(n))


def random_profile(n: int, rng: np.random.Generator) -> PreferenceProfile:
    """2n independent uniform random permutations; deterministic given the stream."""
    if n < 1:
        raise ValueError("n must be >= 1")
    a_lists = tuple(Permutation.from_order(rng.permutation(n).tolist()) for _ in range(n))
    b_lists = tuple(Permutation.from_order(rng.permutation(n).tolist()) for _ in range(n))
    return PreferenceProfile(n, a_lists, b_lists)


def adversarial_profile(n: int, k: int) -> tuple[PreferenceProfile, PreferenceProfile]:
    """Worst-case pair (true_profile, approx_profile) for sort-then-match.

    In approx_profile, A-agent x ranks B-agents in the cyclic order
    x, x+1, ..., and B-agent y ranks A-agents y, y-1, ... (1-based labels).
    true_profile is approx_profile with ranks 1 and k exchanged in every
    list, so the identity matching is stable for approx but carries a
    blocking pair (i, j) for every 0 < j-i < k under the truth.
    """
    if not 2 <= k <= n:
        raise ValueError("k must satisfy 2 <= k <= n")

    def swapped(order: list[int]) -> list[int]:
        out = list(order)
        out[0], out[k - 1] = out[k - 1], out[0]
        return out

    approx_a = [[(x + j) % n for j in range(n)] for x in range(n)]
    approx_b = [[(y - j) % n for j in range(n)] for y in range(n)]
    approx = PreferenceProfile(
        n,
        tuple(Permutation.from_order(o) for o in approx_a),
        tuple(Permutation.from_order(o) for o in approx_b),
    )
    true = PreferenceProfile(
        n,
        tuple(Permutation.from_order(swapped(o)) for o in approx_a),
        tuple(Permutation.from_order(swapped(o)) for o in approx_b),
    )
    return true, approx


def blocking_pairs(profile: PreferenceProfile, m: Matching) -> set[tuple[int, int]]:
    """Exhaustive O(n^2) enumeration of pairs that prefer each other to their matches.

    This is the ground-truth oracle; it rejects partial matchings.
    """
    if len(m) != profile.n:
        raise ValueError("matching size does not match profile")
    if not m.is_perfect:
        raise ValueError("blocking pairs are defined for perfect matchings only")
    n = profile.n
    out = set()
    for x in range(n):
        rx = profile.a_lists[x].rank_of
        cutoff = rx[m.a_to_b[x]]
        for y in range(n):
            if rx[y] < cutoff:
                ry = profile.b_lists[y].rank_of
                if ry[x] < ry[m.b_to_a[y]]:
                    out.add((x, y))
    return out


def is_stable(profile: PreferenceProfile, m: Matching) -> bool:
    return not blocking_pairs(profile, m)


def kendall_tau(p: Permutation, q: Permutation) -> int:
    """Number of agent pairs ordered differently by p and q."""
    if len(p) != len(q):
        raise ValueError("permutations must have equal length")
    # Read q's ranks in p's preference order; discordant pairs are inversions.
    seq = [q.rank_of[u] for u in p.inverse]
    seen: list[int] = []
    inversions = 0
    for r in seq:
        pos = bisect.bisect_right(seen, r)
        inversions += len(seen) - pos
        bisect.insort(seen, r)
    return inversions


def element_disagreements(p: Permutation, q: Permutation, u: int) -> int:
    """How many agents v are on different sides of u in p versus q."""
    if len(p) != len(q):
        raise ValueError("permutations must have equal length")
    if not 0 <= u < len(p):
        raise ValueError("u out of range")
    pu = p.rank_of[u]
    qu = q.rank_of[u]
    pr = p.rank_of
    qr = q.rank_of
    return sum(1 for v in range(len(p)) if v != u and (pr[v] < pu) != (qr[v] < qu))


def profile_to_text(profile: PreferenceProfile) -> str:
    """Line-oriented serialization; agent indices are 1-based in the text."""
    lines = [f"n={profile.n}"]
    for side, lists in (("A", profile.a_lists), ("B", profile.b_lists)):
        for i, p in enumerate(lists):
            prefs = " ".join(str(agent + 1) for agent in p.inverse)
            lines.append(f"{side} {i + 1}: {prefs}")
    return "\n".join(lines) + "\n"


def profile_from_text(text: str) -> PreferenceProfile:
    """Inverse of profile_to_text; exact round-trip."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise ValueError("expected header 'n=<n>'")
    n = int(lines[0][2:])
    if len(lines) != 1 + 2 * n:
        raise ValueError("expected 2n list lines after the header")
    sides: dict[str, list[Permutation | None]] = {"A": [None] * n, "B": [None] * n}
    for ln in lines[1:]:
        head, _, rest = ln.partition(":")
        side, idx_txt = head.split()
        if side not in sides:
            raise ValueError(f"unknown side {side!r}")
        i = int(idx_txt) - 1
        if not 0 <= i < n or sides[side][i] is not None:
            raise ValueError(f"bad or duplicate list index in {head!r}")
        order = [int(tok) - 1 for tok in rest.split()]
        sides[side][i] = Permutation.from_order(order)
    a_lists = sides["A"]
    b_lists = sides["B"]
    if any(p is None for p in a_lists) or any(p is None for p in b_lists):
        raise ValueError("missing list lines")
    return PreferenceProfile(n, tuple(a_lists), tuple(b_lists))
