"""Minimum 1-trees, edge alpha-values, and the subgradient ascent on city
penalties that maximizes the 1-tree lower bound.

A 1-tree is a spanning tree over all cities but one, plus the two cheapest
edges at that special city; its length lower-bounds the optimal tour.  The
alpha-value of an edge is the increase in minimum 1-tree length when that
edge is forced into the tree: a global edge-quality measure used to pick
candidate edges.  All arithmetic is integer.
"""

from dataclasses import dataclass

import numpy as np

from .core import Instance


@dataclass
class AscentConfig:
    """Subgradient schedule: plain degree-based direction, halving step."""

    patience: int = 3            # non-improving iterations before halving the step
    max_iterations: int | None = None  # default 50 + n//10, capped at 1000
    initial_step: int | None = None    # default max(1, L(T)/(2n))

    def budget(self, n: int) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return min(50 + n // 10, 1000)


@dataclass
class OneTree:
    """A minimum 1-tree under penalty-modified costs.

    `parent` holds spanning-tree links (parent[root] == -1); the special
    city is a leaf of the underlying MST, kept with its tree edge plus the
    second-cheapest incident edge.
    """

    parent: np.ndarray           # (n,) int64 parent links over the MST
    special: int                 # the 1-tree's degree-2 special city
    second_edge: tuple[int, int]  # the extra edge at the special city
    second_cost: int             # its penalty-modified cost
    length: int                  # total penalty-modified 1-tree length
    degrees: np.ndarray          # (n,) degree of each city in the 1-tree
    order: np.ndarray            # cities in Prim visitation order (root first)

    def edges(self) -> list[tuple[int, int]]:
        out = [(int(j), int(self.parent[j])) for j in range(len(self.parent))
               if self.parent[j] >= 0]
        out.append(self.second_edge)
        return out


class AlphaTable:
    """Dense nonnegative alpha-values for all city pairs."""

    def __init__(self, values: np.ndarray):
        self.values = values

    def value(self, i: int, j: int) -> int:
        return int(self.values[i, j])


def _modified_rows(instance: Instance, pi: np.ndarray):
    """Row accessor for costs d(i,j) + pi_i + pi_j."""
    def row(i):
        return instance.cost_row(i) + pi[i] + pi
    return row


def minimum_one_tree(instance: Instance, pi: np.ndarray | None = None) -> OneTree:
    """Minimum 1-tree under costs d(i,j) + pi_i + pi_j.

    Builds the MST with a dense Prim scan, then picks as special city the
    MST leaf whose second-cheapest incident edge is largest (the standard
    tightest single-city choice) and adds that edge.
    """
    n = instance.n
    if pi is None:
        pi = np.zeros(n, dtype=np.int64)
    pi = np.asarray(pi, dtype=np.int64)
    row = _modified_rows(instance, pi)

    big = np.iinfo(np.int64).max
    parent = np.full(n, -1, dtype=np.int64)
    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, big, dtype=np.int64)
    link = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)

    cur = 0
    in_tree[0] = True
    order[0] = 0
    best[0] = 0
    mst_len = 0
    for t in range(1, n):
        r = row(cur)
        update = (~in_tree) & (r < best)
        best[update] = r[update]
        link[update] = cur
        masked = np.where(in_tree, big, best)
        cur = int(np.argmin(masked))
        parent[cur] = link[cur]
        mst_len += int(best[cur])
        in_tree[cur] = True
        order[t] = cur

    degrees = np.zeros(n, dtype=np.int64)
    for j in range(n):
        if parent[j] >= 0:
            degrees[j] += 1
            degrees[parent[j]] += 1

    # Special city: the leaf maximizing its second-cheapest incident edge.
    best_leaf, best_second, best_edge = -1, -1, (-1, -1)
    for leaf in range(n):
        if degrees[leaf] != 1:
            continue
        r = row(leaf).copy()
        r[leaf] = big
        tree_nb = int(parent[leaf]) if parent[leaf] >= 0 else None
        if tree_nb is None:  # leaf is the MST root with a single child
            tree_nb = int(np.nonzero(parent == leaf)[0][0])
        r[tree_nb] = big
        j = int(np.argmin(r))
        second = int(r[j])
        if second > best_second:
            best_leaf, best_second, best_edge = leaf, second, (leaf, j)

    degrees[best_edge[0]] += 1
    degrees[best_edge[1]] += 1
    return OneTree(parent=parent, special=best_leaf, second_edge=best_edge,
                   second_cost=best_second, length=mst_len + best_second,
                   degrees=degrees, order=order)


def alpha_values(instance: Instance, tree: OneTree,
                 pi: np.ndarray | None = None) -> AlphaTable:
    """Alpha-value of every pair: 1-tree length increase when the pair is forced.

    Uses the O(n^2) max-path-edge walk over the spanning tree (beta-values);
    pairs at the special city are priced against its second-cheapest edge.
    """
    n = instance.n
    if pi is None:
        pi = np.zeros(n, dtype=np.int64)
    pi = np.asarray(pi, dtype=np.int64)
    row = _modified_rows(instance, pi)

    v = tree.special
    beta = np.zeros((n, n), dtype=np.int64)

    if instance.matrix is not None:
        cost = instance.matrix + pi[:, None] + pi[None, :]
        np.fill_diagonal(cost, 0)
    else:
        cost = np.empty((n, n), dtype=np.int64)
        for i in range(n):
            cost[i] = row(i)

    # Re-root the spanning tree over the non-special cities (the special
    # city is an MST leaf, so dropping it keeps the rest connected), then
    # walk parents-first computing the max edge on every tree path.
    adjacency: list[list[int]] = [[] for _ in range(n)]
    for j in range(n):
        p = int(tree.parent[j])
        if p >= 0 and j != v and p != v:
            adjacency[j].append(p)
            adjacency[p].append(j)
    root = 0 if v != 0 else 1
    parent2 = np.full(n, -1, dtype=np.int64)
    walk = [root]
    seen = {root}
    head = 0
    while head < len(walk):
        c = walk[head]
        head += 1
        for nb in adjacency[c]:
            if nb not in seen:
                seen.add(nb)
                parent2[nb] = c
                walk.append(nb)

    processed: list[int] = []
    for c in walk:
        if processed:
            p = int(parent2[c])
            w = int(cost[c, p])
            idx = np.array(processed, dtype=np.int64)
            vals = np.maximum(beta[p, idx], w)
            beta[c, idx] = vals
            beta[idx, c] = vals
        processed.append(c)

    idx = np.array(processed, dtype=np.int64)
    alpha = np.zeros((n, n), dtype=np.int64)
    sub = np.ix_(idx, idx)
    alpha[sub] = cost[sub] - beta[sub]
    # Pairs with the special city: replacing its second edge.
    alpha[v, :] = cost[v, :] - tree.second_cost
    alpha[:, v] = alpha[v, :]
    a, b = tree.second_edge
    alpha[a, b] = alpha[b, a] = 0
    tp = tree.parent
    mst_nb = int(tp[v]) if tp[v] >= 0 else int(np.nonzero(tp == v)[0][0])
    alpha[v, mst_nb] = alpha[mst_nb, v] = 0
    np.fill_diagonal(alpha, 0)
    np.maximum(alpha, 0, out=alpha)
    return AlphaTable(alpha)


def lower_bound(tree: OneTree, pi: np.ndarray) -> int:
    """w(pi): the penalty-corrected 1-tree lower bound."""
    return int(tree.length - 2 * np.sum(pi))


def ascend_pi(instance: Instance, config: AscentConfig | None = None
              ) -> tuple[np.ndarray, int, AlphaTable]:
    """Maximize the 1-tree lower bound over integer city penalties.

    Returns the best penalties found, the bound w at those penalties, and
    the alpha-values computed at the best penalties.  The reported bound is
    the best over all visited iterates.
    """
    if config is None:
        config = AscentConfig()
    n = instance.n
    pi = np.zeros(n, dtype=np.int64)
    tree = minimum_one_tree(instance, pi)
    w = lower_bound(tree, pi)
    best_pi = pi.copy()
    best_w = w

    if config.initial_step is not None:
        step = config.initial_step
    else:
        step = max(1, tree.length // (2 * n))

    stale = 0
    for _ in range(config.budget(n)):
        grad = tree.degrees - 2
        if not np.any(grad):
            break
        move = (step * grad).astype(np.int64)  # integer steps, toward zero
        pi = pi + move
        tree = minimum_one_tree(instance, pi)
        w = lower_bound(tree, pi)
        if w > best_w:
            best_w = w
            best_pi = pi.copy()
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                step //= 2
                stale = 0
                if step == 0:
                    break

    best_tree = minimum_one_tree(instance, best_pi)
    alpha = alpha_values(instance, best_tree, best_pi)
    return best_pi, best_w, alpha
