"""Shared fixtures and brute-force oracles for the test suite."""

import itertools
import math

import numpy as np
import pytest

from rlkopt import Instance, TimeWindowData
from rlkopt.solver import SolutionPair, better


def random_euclid(n: int, seed: int, span: int = 1000) -> Instance:
    """Random integer-coordinate Euclidean instance."""
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, span, size=(n, 2)).astype(np.float64)
    return Instance.from_coords(pts, name=f"rand{n}-{seed}")


def brute_force_optimum(instance: Instance) -> int:
    """Exact optimum by enumerating all tours through city 0."""
    n = instance.n
    m = instance.matrix
    best = None
    for perm in itertools.permutations(range(1, n)):
        tour = (0,) + perm
        length = sum(int(m[tour[i], tour[(i + 1) % n]]) for i in range(n))
        if best is None or length < best:
            best = length
    return best


def simulate_route(instance: Instance, windows: TimeWindowData,
                   route: tuple[int, ...]) -> SolutionPair:
    """Violation and length of a directed route starting at the depot."""
    n = len(route)
    a = windows.windows[:, 0]
    b = windows.windows[:, 1]
    st = windows.service
    t = 0
    fv = 0
    fo = 0
    for i in range(1, n):
        prev, city = route[i - 1], route[i]
        d = instance.cost(prev, city)
        fo += d
        t += d
        fv += max(0, t - int(b[city]))
        t = max(t, int(a[city])) + int(st[city])
    d = instance.cost(route[-1], route[0])
    fo += d
    t += d
    fv += max(0, t - int(b[route[0]]))
    return SolutionPair(fv=fv, fo=fo)


def tsptw_brute_force(instance: Instance,
                      windows: TimeWindowData) -> SolutionPair:
    """Lexicographic (violation, length) optimum over all directed routes."""
    n = instance.n
    depot = windows.depot - 1
    others = [c for c in range(n) if c != depot]
    best = None
    for perm in itertools.permutations(others):
        pair = simulate_route(instance, windows, (depot,) + perm)
        if best is None or better(pair, best):
            best = pair
    return best


def unbounded_windows(n: int) -> TimeWindowData:
    wins = np.zeros((n, 2), dtype=np.int64)
    wins[:, 1] = 10**15
    return TimeWindowData(windows=wins, service=np.zeros(n, dtype=np.int64))


def feasible_windows(instance: Instance, seed: int,
                     slack: int = 30) -> TimeWindowData:
    """Windows admitting at least one zero-violation route, built by timing
    a random route and widening each visit into a window."""
    rng = np.random.default_rng(seed)
    n = instance.n
    others = list(rng.permutation(np.arange(1, n)))
    route = [0] + [int(c) for c in others]
    wins = np.zeros((n, 2), dtype=np.int64)
    wins[0] = (0, 10**9)
    t = 0
    for i in range(1, n):
        t += instance.cost(route[i - 1], route[i])
        lo = max(0, t - int(rng.integers(0, slack)))
        hi = t + int(rng.integers(1, slack))
        wins[route[i]] = (lo, hi)
    return TimeWindowData(windows=wins, service=np.zeros(n, dtype=np.int64))
