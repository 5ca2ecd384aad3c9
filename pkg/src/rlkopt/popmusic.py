"""Candidate edge generation by sub-path optimization of sampled tours.

Several nearest-neighbor tours are improved by exhaustive 2-opt inside
fixed-endpoint sub-paths (consecutive blocks, offset by half a block on
alternating sweeps so improvements can cross boundaries).  The union of
the edges of all sampled tours becomes the candidate edge set.
"""

import random
from dataclasses import dataclass

import numpy as np

from .core import Instance, Tour


@dataclass
class PopmusicConfig:
    tours: int = 10
    subpath_len: int = 32
    sweeps: int = 20           # cap; stops earlier when a sweep improves nothing
    seed: int = 0

    def __post_init__(self):
        if self.tours < 1:
            raise ValueError("tours must be >= 1")
        if self.subpath_len < 4:
            raise ValueError("subpath_len must be >= 4")


def nearest_neighbor_tour(instance: Instance, start: int) -> np.ndarray:
    """Greedy nearest-neighbor order from a start city."""
    n = instance.n
    visited = np.zeros(n, dtype=bool)
    order = np.empty(n, dtype=np.int64)
    order[0] = start
    visited[start] = True
    cur = start
    big = np.iinfo(np.int64).max
    for t in range(1, n):
        row = instance.cost_row(cur)
        masked = np.where(visited, big, row)
        cur = int(np.argmin(masked))
        order[t] = cur
        visited[cur] = True
    return order


def _two_opt_subpath(order: np.ndarray, lo: int, hi: int, matrix: np.ndarray) -> bool:
    """Exhaustive 2-opt on order[lo:hi] with order[lo] and order[hi-1] fixed.

    Returns True when at least one improving reversal was applied.
    """
    improved_any = False
    improved = True
    while improved:
        improved = False
        for i in range(lo + 1, hi - 2):
            a, b = order[i - 1], order[i]
            d_ab = matrix[a, b]
            for j in range(i + 1, hi - 1):
                c, d = order[j], order[j + 1]
                delta = (matrix[a, c] + matrix[b, d]) - (d_ab + matrix[c, d])
                if delta < 0:
                    order[i:j + 1] = order[i:j + 1][::-1]
                    improved = True
                    improved_any = True
                    a, b = order[i - 1], order[i]
                    d_ab = matrix[a, b]
    return improved_any


def popmusic_tour(instance: Instance, config: PopmusicConfig, seed: int) -> Tour:
    """One sampled tour: nearest-neighbor start, then sub-path 2-opt sweeps."""
    rng = random.Random(seed)
    n = instance.n
    order = nearest_neighbor_tour(instance, rng.randrange(n))
    matrix = instance.matrix
    if matrix is None:
        raise ValueError("popmusic needs the precomputed cost table")

    block = min(config.subpath_len, n)
    for sweep in range(config.sweeps):
        improved = False
        offset = 0 if sweep % 2 == 0 else block // 2
        # Rotate so blocks fall at a different phase on alternating sweeps.
        work = np.roll(order, offset)
        for lo in range(0, n, block):
            hi = min(lo + block, n)
            if hi - lo >= 4:
                improved |= _two_opt_subpath(work, lo, hi, matrix)
        order = np.roll(work, -offset)
        if not improved:
            break
    return Tour(order)


def popmusic_candidate_edges(instance: Instance, config: PopmusicConfig
                             ) -> set[tuple[int, int]]:
    """Union of undirected edges over all sampled tours."""
    edges: set[tuple[int, int]] = set()
    for t in range(config.tours):
        tour = popmusic_tour(instance, config, config.seed + t)
        edges |= tour.edges()
    return edges
