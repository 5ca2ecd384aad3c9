"""Depth-bounded sequential k-opt search over candidate edges.

The search walks a partial depth-first tree rooted at a starting city:
at odd steps it removes one of the two tour edges at the current city, at
even steps it adds a candidate edge.  Two constraints shape the tree:
closing back to the start must yield a single cycle, and the cumulative
removed-minus-added cost must stay strictly positive.  The first improving
closure is applied.
"""

import random
from dataclasses import dataclass

from .core import Instance, Tour, MoveSequence, apply_move
from .candidates import CandidateSets


@dataclass
class KOptConfig:
    k_max: int = 5
    breadth: int = 5

    def __post_init__(self):
        if self.k_max < 2:
            raise ValueError("k_max must be >= 2")
        if self.breadth < 1:
            raise ValueError("breadth must be >= 1")


def feasibility_check(tour: Tour, seq: list[int]) -> bool:
    """Would closing `seq` (ending at some p_2i) back to p_1 leave one cycle?

    `seq` is the alternating city list p_1..p_2i with i >= 2; its removed
    edges must be tour-adjacent pairs.
    """
    k = len(seq) // 2
    if k < 2:
        return True
    n = tour.n
    pos = tour.pos
    order = tour.order

    # Cut gaps: gap t sits between positions t and t+1 (mod n).
    gaps = []
    for i in range(k):
        a, b = seq[2 * i], seq[2 * i + 1]
        pa, pb = int(pos[a]), int(pos[b])
        if (pa + 1) % n == pb:
            gaps.append(pa)
        elif (pb + 1) % n == pa:
            gaps.append(pb)
        else:
            raise ValueError("removed edge is not tour-adjacent")
    gaps.sort()

    # Segment endpoints in cyclic position order.
    segment_of: dict[int, int] = {}
    other_end: dict[int, int] = {}
    for s in range(k):
        start_city = int(order[(gaps[s] + 1) % n])
        end_city = int(order[gaps[(s + 1) % k]])
        segment_of[start_city] = s
        segment_of[end_city] = s
        other_end[start_city] = end_city
        other_end[end_city] = start_city

    # Added links: y_1..y_{k-1} plus the closing edge (p_2k, p_1).
    link: dict[int, int] = {}
    for i in range(k - 1):
        a, b = seq[2 * i + 1], seq[2 * i + 2]
        link[a] = b
        link[b] = a
    link[seq[-1]] = seq[0]
    link[seq[0]] = seq[-1]

    start = seq[0]
    visited = set()
    entry = start
    while True:
        s = segment_of[entry]
        if s in visited:
            return False
        visited.add(s)
        nxt = link[other_end[entry]]
        if nxt == start:
            return len(visited) == k
        entry = nxt


def gain_check(instance: Instance, seq: list[int], candidate: int) -> bool:
    """Cumulative-gain pruning: appending `candidate` as the next added-edge
    endpoint must keep removed-minus-added strictly positive."""
    total = 0
    for i in range(len(seq) // 2):
        total += instance.cost(seq[2 * i], seq[2 * i + 1])
        if 2 * i + 2 < len(seq):
            total -= instance.cost(seq[2 * i + 1], seq[2 * i + 2])
    total -= instance.cost(seq[-1], candidate)
    return total > 0


class _Search:
    """One k-opt call: bookkeeping shared across the recursion."""

    def __init__(self, instance, tour, cands, config, rng, accept):
        self.instance = instance
        self.tour = tour
        self.cands = cands
        self.config = config
        self.rng = rng
        self.accept = accept

    def run(self, p1: int):
        return self._expand([p1], {p1}, 0, 0, 1)

    def _try_close(self, seq, removed_sum, added_sum):
        """Attempt to close the sequence; returns (tour, MoveSequence) or None."""
        instance, tour = self.instance, self.tour
        close_cost = instance.cost(seq[-1], seq[0])
        if self.accept is None:
            if removed_sum <= added_sum + close_cost:  # strict improvement only
                return None
            if not feasibility_check(tour, seq):
                return None
            move = MoveSequence(list(seq))
            return apply_move(tour, move), move
        if not feasibility_check(tour, seq):
            return None
        move = MoveSequence(list(seq))
        new_tour = apply_move(tour, move)
        return (new_tour, move) if self.accept(new_tour) else None

    def _expand(self, seq, used, removed_sum, added_sum, depth):
        """Choose p_2i from the tour neighbors of p_{2i-1}, then recurse on
        candidate actions.  Returns (tour, MoveSequence) or None."""
        instance, tour, config = self.instance, self.tour, self.config
        last = seq[-1]
        neighbors = list(tour.neighbors(last))
        if self.rng.random() < 0.5:
            neighbors.reverse()

        for p2i in neighbors:
            if p2i in used:
                continue
            trial = seq + [p2i]
            if depth >= 2 and not feasibility_check(tour, trial):
                continue
            removed = removed_sum + instance.cost(last, p2i)
            if depth >= 2:
                closed = self._try_close(trial, removed, added_sum)
                if closed is not None:
                    return closed
            if depth == config.k_max:
                # Search tree exhausted at maximum depth: give up this call.
                return None
            for cand in self.cands.cs[p2i][:config.breadth]:
                if cand in used or cand == p2i:
                    continue
                if cand in tour.neighbors(p2i):
                    continue  # adding an existing tour edge is never useful
                added = added_sum + instance.cost(p2i, cand)
                if removed - added <= 0:
                    continue  # gain pruning
                result = self._expand(trial + [cand], used | {p2i, cand},
                                      removed, added, depth + 1)
                if result is not None:
                    return result
        return None


def k_opt(instance: Instance, tour: Tour, cands: CandidateSets, p1: int,
          config: KOptConfig | None = None, rng: random.Random | None = None,
          accept=None) -> tuple[Tour, MoveSequence | None]:
    """Search for an improving k-opt move starting at city p1.

    Returns the improved tour and its move sequence, or the unchanged tour
    and None.  `accept`, when given, replaces the strict length test at
    each feasible closure: it receives the candidate tour and returns
    whether to take the move (used by the constrained solver).
    """
    if config is None:
        config = KOptConfig()
    if rng is None:
        rng = random.Random()
    result = _Search(instance, tour, cands, config, rng, accept).run(p1)
    if result is None:
        return tour, None
    return result
