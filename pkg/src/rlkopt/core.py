"""Distance evaluation, the Tour structure, and k-opt move application.

Costs are 64-bit integers; a move is improving iff its gain is strictly
positive, so acceptance never depends on floating-point comparisons.
"""

from dataclasses import dataclass

import numpy as np

from .tsplib import RawInstance, cost_matrix, distance

# Above this city count the full n x n table is not materialized.
MATRIX_CAP = 5000


class MoveError(ValueError):
    """Raised when a move sequence would not produce a single cycle."""


class Instance:
    """Immutable symmetric cost oracle over cities 0..n-1.

    The full cost table is precomputed for n <= `matrix_cap`; above that,
    distances are evaluated from coordinates on demand.
    """

    def __init__(self, raw: RawInstance, matrix_cap: int = MATRIX_CAP):
        self.raw = raw
        self.n = raw.dimension
        self.metric = raw.metric
        self.coords = raw.coords
        self.name = raw.name
        if raw.matrix is not None:
            self.matrix = raw.matrix
        elif self.n <= matrix_cap:
            self.matrix = cost_matrix(raw)
        else:
            self.matrix = None

    @classmethod
    def from_matrix(cls, matrix, name: str = "matrix") -> "Instance":
        matrix = np.asarray(matrix, dtype=np.int64)
        raw = RawInstance(name=name, dimension=matrix.shape[0], metric="EXPLICIT",
                          matrix=matrix)
        return cls(raw)

    @classmethod
    def from_coords(cls, coords, metric: str = "EUC_2D", name: str = "coords",
                    matrix_cap: int = MATRIX_CAP) -> "Instance":
        coords = np.asarray(coords, dtype=np.float64)
        raw = RawInstance(name=name, dimension=coords.shape[0], metric=metric,
                          coords=coords)
        return cls(raw, matrix_cap=matrix_cap)

    def cost(self, i: int, j: int) -> int:
        if i == j:
            return 0
        if self.matrix is not None:
            return int(self.matrix[i, j])
        return distance(self.metric, self.coords[i], self.coords[j])

    def cost_row(self, i: int) -> np.ndarray:
        """Distances from city i to every city, as an int64 vector."""
        if self.matrix is not None:
            return self.matrix[i]
        d = self.coords - self.coords[i]
        dist = np.hypot(d[:, 0], d[:, 1])
        if self.metric == "EUC_2D":
            row = np.floor(dist + 0.5).astype(np.int64)
        elif self.metric == "CEIL_2D":
            row = np.ceil(dist - 1e-9).astype(np.int64)
        else:
            row = np.array([self.cost(i, j) for j in range(self.n)], dtype=np.int64)
        row[i] = 0
        return row


class Tour:
    """A Hamiltonian cycle as a permutation array plus its inverse index."""

    __slots__ = ("n", "order", "pos")

    def __init__(self, order):
        self.order = np.asarray(order, dtype=np.int64)
        self.n = len(self.order)
        self.pos = np.empty(self.n, dtype=np.int64)
        self.pos[self.order] = np.arange(self.n)

    def copy(self) -> "Tour":
        return Tour(self.order.copy())

    def next(self, c: int) -> int:
        p = self.pos[c] + 1
        return int(self.order[p if p < self.n else 0])

    def prev(self, c: int) -> int:
        return int(self.order[self.pos[c] - 1])

    def neighbors(self, c: int) -> tuple[int, int]:
        return self.prev(c), self.next(c)

    def is_valid(self) -> bool:
        if sorted(self.order.tolist()) != list(range(self.n)):
            return False
        return bool(np.all(self.order[self.pos] == np.arange(self.n)))

    def edges(self) -> set[tuple[int, int]]:
        """Undirected edge set as (min, max) city pairs."""
        nxt = np.roll(self.order, -1)
        return {(int(min(a, b)), int(max(a, b))) for a, b in zip(self.order, nxt)}

    def __eq__(self, other):
        return isinstance(other, Tour) and np.array_equal(self.order, other.order)

    def __repr__(self):
        return f"Tour({self.order.tolist()})"


@dataclass
class MoveSequence:
    """Alternating city sequence p1..p2k of one k-opt episode.

    Removed edges are (p[2i], p[2i+1]) and added edges (p[2i+1], p[2i+2]),
    0-based, with the closing edge (p[-1], p[0]).
    """

    cities: list[int]

    @property
    def k(self) -> int:
        return len(self.cities) // 2

    def removed_edges(self) -> list[tuple[int, int]]:
        p = self.cities
        return [(p[2 * i], p[2 * i + 1]) for i in range(self.k)]

    def added_edges(self) -> list[tuple[int, int]]:
        """Added edges including the closing edge back to p1."""
        p = self.cities
        out = [(p[2 * i + 1], p[2 * i + 2]) for i in range(self.k - 1)]
        out.append((p[-1], p[0]))
        return out

    def gain(self, instance: Instance) -> int:
        removed = sum(instance.cost(a, b) for a, b in self.removed_edges())
        added = sum(instance.cost(a, b) for a, b in self.added_edges())
        return removed - added


def tour_length(instance: Instance, tour: Tour) -> int:
    """Exact closed-tour cost."""
    order = tour.order
    if instance.matrix is not None:
        return int(instance.matrix[order, np.roll(order, -1)].sum())
    return sum(instance.cost(int(a), int(b)) for a, b in zip(order, np.roll(order, -1)))


def tour_neighbors(tour: Tour, c: int) -> tuple[int, int]:
    """Predecessor and successor of city c in cyclic order."""
    return tour.neighbors(c)


def apply_move(tour: Tour, seq: MoveSequence) -> Tour:
    """Apply a k-opt move, returning a new Tour.

    Raises MoveError when the edge exchange does not leave a single
    Hamiltonian cycle (i.e. the sequence fails closure feasibility).
    """
    removed = {frozenset(e) for e in seq.removed_edges()}
    if len(removed) != seq.k:
        raise MoveError("duplicate removed edge")
    added: dict[int, list[int]] = {}
    for a, b in seq.added_edges():
        if frozenset((a, b)) in removed:
            raise MoveError("added edge duplicates a removed edge")
        added.setdefault(a, []).append(b)
        added.setdefault(b, []).append(a)

    n = tour.n
    start = seq.cities[0]
    new_order = np.empty(n, dtype=np.int64)
    new_order[0] = start
    prev = -1
    cur = start
    for t in range(1, n):
        options = []
        for nb in tour.neighbors(cur):
            if frozenset((cur, nb)) not in removed:
                options.append(nb)
        options.extend(added.get(cur, ()))
        nxt = None
        for cand in options:
            if cand != prev:
                nxt = cand
                break
        if nxt is None or nxt == start:
            raise MoveError("move splits the tour")
        new_order[t] = nxt
        prev, cur = cur, nxt
    # The walk must close back to the start.
    closing_ok = False
    for nb in tour.neighbors(cur):
        if nb == start and frozenset((cur, nb)) not in removed:
            closing_ok = True
    if start in added.get(cur, ()):
        closing_ok = True
    if not closing_ok or len(set(new_order.tolist())) != n:
        raise MoveError("move splits the tour")
    return Tour(new_order)
