"""Per-city candidate lists and the Q-table that orders them.

The Q-value of a directed candidate edge starts as a lower-bound-scaled
inverse of (alpha + distance), so the initial ordering agrees with
alpha-nearness, and is afterwards adapted online by the learning rules.
Learning reorders lists but never changes membership.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import Instance
from .onetree import AlphaTable

DEFAULT_LIST_LEN = 5


@dataclass
class CandidateSets:
    """Ordered candidate lists plus the Q-table over directed pairs.

    `q` stores every directed pair (i, j) with j in cs[i] or i in cs[j].
    Lists are kept in descending Q order (or ascending alpha order for the
    non-learning baseline, which never consults `q`).
    """

    cs: list[list[int]]
    q: dict[tuple[int, int], float] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.cs)

    def max_q(self, state: int) -> float:
        """Largest Q over the candidate actions of `state` (0 if none stored)."""
        best = None
        for a in self.cs[state]:
            v = self.q.get((state, a))
            if v is not None and (best is None or v > best):
                best = v
        return 0.0 if best is None else best

    def edge_count(self) -> int:
        return len({(min(i, j), max(i, j)) for (i, j) in self.q})

    def dump(self) -> str:
        """Debug format: one line per city, candidates with their Q-values."""
        lines = []
        for i, lst in enumerate(self.cs):
            entries = " ".join(f"{j}({self.q.get((i, j), float('nan')):.4g})" for j in lst)
            lines.append(f"{i}: {entries}")
        return "\n".join(lines) + "\n"


def _q_value(scale: int, alpha: int, dist: int) -> float:
    denom = alpha + dist
    if denom <= 0:  # coincident cities; treat as one cost unit
        denom = 1
    return scale / denom


def _store_symmetric(q: dict, cs: list[list[int]], scale, alpha_m, dist_of):
    """Ensure (i, j) and (j, i) are stored for every kept candidate pair."""
    for i, lst in enumerate(cs):
        for j in lst:
            for a, b in ((i, j), (j, i)):
                if (a, b) not in q:
                    q[(a, b)] = _q_value(scale, int(alpha_m[a, b]), dist_of(a, b))


def init_q_alpha(instance: Instance, alpha: AlphaTable, w: int,
                 list_len: int = DEFAULT_LIST_LEN) -> CandidateSets:
    """Candidate sets from alpha-nearness: per city the `list_len` cities of
    largest initial Q = w / (alpha + d), i.e. smallest alpha + d."""
    n = instance.n
    a = alpha.values
    cs: list[list[int]] = []
    for i in range(n):
        key = a[i] + instance.cost_row(i)
        key[i] = np.iinfo(np.int64).max
        # Ties break toward the smaller city index (argsort is stable).
        picked = np.argsort(key, kind="stable")[:list_len]
        cs.append([int(j) for j in picked])
    q: dict[tuple[int, int], float] = {}
    _store_symmetric(q, cs, w, a, instance.cost)
    sets = CandidateSets(cs=cs, q=q)
    resort(sets)
    return sets


def init_q_popmusic(instance: Instance, edges: set[tuple[int, int]],
                    alpha: AlphaTable, tree_len: int,
                    min_len: int = DEFAULT_LIST_LEN) -> CandidateSets:
    """Candidate sets from a sampled edge union.

    Each city keeps max(min_len, union degree) candidates; cities below the
    minimum are padded with their nearest non-candidate cities.  Q uses the
    unpenalized 1-tree length: Q = L(T) / (alpha + d).
    """
    n = instance.n
    a = alpha.values
    linked: list[set[int]] = [set() for _ in range(n)]
    for i, j in edges:
        linked[i].add(j)
        linked[j].add(i)

    cs: list[list[int]] = []
    for i in range(n):
        members = set(linked[i])
        if len(members) < min_len:
            row = instance.cost_row(i).copy()
            row[i] = np.iinfo(np.int64).max
            for j in members:
                row[j] = np.iinfo(np.int64).max
            order = np.argsort(row, kind="stable")
            for j in order:
                if len(members) >= min_len:
                    break
                members.add(int(j))
        cs.append(sorted(members))
    q: dict[tuple[int, int], float] = {}
    _store_symmetric(q, cs, tree_len, a, instance.cost)
    sets = CandidateSets(cs=cs, q=q)
    resort(sets)
    return sets


def alpha_ordered_sets(instance: Instance, alpha: AlphaTable,
                       list_len: int = DEFAULT_LIST_LEN) -> CandidateSets:
    """Baseline candidate sets: smallest-alpha cities, ascending alpha order
    (distance, then index, as tie-breaks).  Q is not populated."""
    n = instance.n
    a = alpha.values
    cs: list[list[int]] = []
    for i in range(n):
        dist = instance.cost_row(i)
        key = a[i].astype(np.float64) + dist / (dist.max() + 1.0) / 2.0
        key[i] = np.inf
        picked = np.argsort(key, kind="stable")[:list_len]
        cs.append([int(j) for j in picked])
    return CandidateSets(cs=cs, q={})


def popmusic_alpha_ordered_sets(instance: Instance, edges: set[tuple[int, int]],
                                alpha: AlphaTable,
                                min_len: int = DEFAULT_LIST_LEN) -> CandidateSets:
    """Baseline candidate sets over a sampled edge union, ascending alpha."""
    sets = init_q_popmusic(instance, edges, alpha, tree_len=1, min_len=min_len)
    a = alpha.values
    for i, lst in enumerate(sets.cs):
        lst.sort(key=lambda j: (int(a[i, j]), instance.cost(i, j), j))
    sets.q = {}
    return sets


def resort(sets: CandidateSets) -> CandidateSets:
    """Stably re-sort every list by current Q, descending; membership fixed."""
    for i, lst in enumerate(sets.cs):
        lst.sort(key=lambda j: -sets.q.get((i, j), 0.0))
    return sets
