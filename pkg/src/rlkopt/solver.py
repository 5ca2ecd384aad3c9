"""Solver orchestration: the outer restart loop with an active-city set,
learning-driven candidate reordering, and the constrained variant that
ranks solutions by (violation, length) lexicographically.

A run repeats: build a starting tour (greedy construction first, then
double-bridge perturbations of the incumbent best), improve it with k-opt
calls seeded from a shrinking active set, update the Q-table from every
accepted move, and re-sort candidate lists once per iteration.
"""

import json
import math
import random
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .core import Instance, Tour, tour_length
from .tsplib import TimeWindowData
from .onetree import minimum_one_tree, alpha_values, ascend_pi
from .popmusic import PopmusicConfig, popmusic_candidate_edges
from .candidates import (CandidateSets, init_q_alpha, init_q_popmusic,
                         alpha_ordered_sets, popmusic_alpha_ordered_sets, resort)
from .kopt import KOptConfig, k_opt
from .rl import (RLConfig, Episode, StrategyController, apply_update,
                 STRATEGY_QLEARNING, STRATEGY_SARSA, STRATEGY_MONTE_CARLO)


@dataclass(frozen=True)
class _Mode:
    source: str          # "alpha" or "popmusic" candidate construction
    q_init: bool         # initialize the Q-table (False: plain alpha ordering)
    learning: str | None  # None, "vsr", or a fixed strategy name


MODES: dict[str, _Mode] = {
    "lkh-alpha": _Mode("alpha", False, None),
    "lkh-popmusic": _Mode("popmusic", False, None),
    "fixq-alpha": _Mode("alpha", True, None),
    "fixq-popmusic": _Mode("popmusic", True, None),
    "vsr-alpha": _Mode("alpha", True, "vsr"),
    "vsr-popmusic": _Mode("popmusic", True, "vsr"),
    "q-only": _Mode("alpha", True, "q"),
    "sarsa-only": _Mode("alpha", True, "sarsa"),
    "mc-only": _Mode("alpha", True, "mc"),
}

_FIXED_STRATEGY = {"q": STRATEGY_QLEARNING, "sarsa": STRATEGY_SARSA,
                   "mc": STRATEGY_MONTE_CARLO}


@dataclass
class SolverConfig:
    mode: str = "vsr-alpha"
    i_max: int | None = None     # default: n (n // 5 from 10000 cities up)
    t_max: float | None = None   # seconds; default n (n / 10 constrained)
    seed: int = 0
    rl: RLConfig | None = None   # default n_max: i_max / 20 (t_max / 20 timed)
    kopt: KOptConfig = field(default_factory=KOptConfig)
    popmusic: PopmusicConfig = field(default_factory=PopmusicConfig)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; choose from "
                             + ", ".join(sorted(MODES)))
        if self.i_max is not None and self.i_max < 1:
            raise ValueError("i_max must be >= 1")
        if self.t_max is not None and self.t_max <= 0:
            raise ValueError("t_max must be positive")


@dataclass(order=True)
class SolutionPair:
    """(violation, length) value of a route; compared lexicographically."""

    fv: int
    fo: int


def better(a: SolutionPair, b: SolutionPair) -> bool:
    """Strict lexicographic comparison: less violation wins, then length."""
    return a.fv < b.fv or (a.fv == b.fv and a.fo < b.fo)


@dataclass
class SolveResult:
    instance: str
    mode: str
    seed: int
    best_tour: Tour
    best_length: int
    fv: int
    iterations: int
    seconds: float
    trajectory: list[tuple[int, int]]
    telemetry: list[dict]

    def payload(self) -> dict:
        """Deterministic JSON payload; wall-clock time is reported apart so
        reruns with the same seed compare byte-identical."""
        return {
            "instance": self.instance,
            "mode": self.mode,
            "seed": self.seed,
            "best_length": int(self.best_length),
            "fv": int(self.fv),
            "iterations": int(self.iterations),
            "tour": [int(c) for c in self.best_tour.order],
            "trajectory": [[int(i), int(v)] for i, v in self.trajectory],
        }

    def to_json(self) -> str:
        out = self.payload()
        out["seconds"] = self.seconds
        return json.dumps(out, sort_keys=True)


def build_candidates(instance: Instance, mode: str,
                     popmusic: PopmusicConfig | None = None) -> CandidateSets:
    """Candidate sets for a mode: penalty-ascent alpha ranking or sampled
    sub-path edge unions, with or without an initial Q-table."""
    m = MODES[mode]
    if m.source == "alpha":
        pi, w, alpha = ascend_pi(instance)
        if m.q_init:
            return init_q_alpha(instance, alpha, w)
        return alpha_ordered_sets(instance, alpha)
    if popmusic is None:
        popmusic = PopmusicConfig()
    edges = popmusic_candidate_edges(instance, popmusic)
    tree = minimum_one_tree(instance)
    alpha = alpha_values(instance, tree)
    if m.q_init:
        return init_q_popmusic(instance, edges, alpha, tree.length)
    return popmusic_alpha_ordered_sets(instance, edges, alpha)


def choose_initial_tour(best: Tour | None, instance: Instance,
                        cs: CandidateSets, rng: random.Random) -> Tour:
    """Greedy candidate-following construction when no incumbent exists;
    otherwise a random double-bridge perturbation of the incumbent."""
    n = instance.n
    if best is None:
        start = rng.randrange(n)
        visited = np.zeros(n, dtype=bool)
        order = [start]
        visited[start] = True
        cur = start
        big = np.iinfo(np.int64).max
        for _ in range(n - 1):
            nxt = next((j for j in cs.cs[cur] if not visited[j]), None)
            if nxt is None:
                row = np.where(visited, big, instance.cost_row(cur))
                nxt = int(np.argmin(row))
            order.append(nxt)
            visited[nxt] = True
            cur = nxt
        return Tour(np.array(order, dtype=np.int64))
    if n < 4:  # too small to double-bridge; any tour is the same cycle
        return best.copy()
    a, b, c = sorted(rng.sample(range(1, n), 3))
    o = best.order
    return Tour(np.concatenate([o[:a], o[b:c], o[a:b], o[c:]]))


def violation_tsptw(instance: Instance, windows: TimeWindowData,
                    tour: Tour) -> SolutionPair:
    """Simulate the route from the depot at time 0.

    Arrival before a window opens means waiting; arriving after it closes
    adds the lateness to the violation.  The return leg is checked against
    the depot's own window.  Length stays the plain tour length; travel and
    waiting do not change it.
    """
    n = instance.n
    depot = windows.depot - 1
    start_pos = int(tour.pos[depot])
    order = tour.order
    a = windows.windows[:, 0]
    b = windows.windows[:, 1]
    st = windows.service

    fv = 0
    t = 0
    prev = depot
    for step in range(1, n):
        city = int(order[(start_pos + step) % n])
        t += instance.cost(prev, city)
        fv += max(0, t - int(b[city]))
        t = max(t, int(a[city])) + int(st[city])
        prev = city
    t += instance.cost(prev, depot)
    fv += max(0, t - int(b[depot]))
    return SolutionPair(fv=fv, fo=tour_length(instance, tour))


def _resolve_rl(config: SolverConfig, default_n_max: float) -> RLConfig:
    if config.rl is not None:
        return config.rl
    return RLConfig(n_max=max(1.0, default_n_max))


def _q_extremes(cs: CandidateSets) -> tuple[float, float]:
    if not cs.q:
        return 0.0, 0.0
    vals = cs.q.values()
    return max(vals), min(vals)


def _run(instance: Instance, config: SolverConfig, name: str,
         windows: TimeWindowData | None, i_max: float, t_max: float,
         rl: RLConfig, time_based: bool) -> SolveResult:
    """The outer loop shared by the plain and the constrained solver.

    With `windows` the inner k-opt accepts a closure when it improves the
    (violation, length) pair of the current route, rewards carry the
    episode's violation reduction, and stagnation is clocked in seconds.
    """
    t0 = time.perf_counter()
    rng = random.Random(config.seed)
    mode = MODES[config.mode]
    cs = build_candidates(instance, config.mode, config.popmusic)
    n = instance.n

    learning = mode.learning is not None
    controller = None
    strategy = STRATEGY_QLEARNING
    if mode.learning == "vsr":
        controller = StrategyController(n_max=rl.n_max)
    elif mode.learning is not None:
        strategy = _FIXED_STRATEGY[mode.learning]

    best: Tour | None = None
    best_pair: SolutionPair | None = None
    trajectory: list[tuple[int, int]] = []
    telemetry: list[dict] = []
    iteration = 0
    last_tick = t0

    while iteration < i_max and time.perf_counter() - t0 < t_max:
        iteration += 1
        if controller is not None:
            now = time.perf_counter()
            strategy = controller.start_iteration(now - last_tick
                                                  if time_based else 1.0)
            last_tick = now

        tour = choose_initial_tour(best, instance, cs, rng)
        if mode.q_init:
            resort(cs)
        cur_len = tour_length(instance, tour)
        if windows is not None:
            cur_pair = violation_tsptw(instance, windows, tour)
        else:
            cur_pair = SolutionPair(0, cur_len)

        active = list(range(n))
        in_active = [True] * n
        episodes = 0
        while active:
            if time.perf_counter() - t0 >= t_max:
                break
            idx = rng.randrange(len(active))
            p1 = active[idx]

            accept_cb = None
            accepted_pair: list[SolutionPair] = []
            if windows is not None:
                def accept_cb(cand_tour, _cur=cur_pair, _out=accepted_pair):
                    pair = violation_tsptw(instance, windows, cand_tour)
                    if better(pair, _cur):
                        _out.append(pair)
                        return True
                    return False

            new_tour, move = k_opt(instance, tour, cs, p1, config.kopt,
                                   rng, accept=accept_cb)
            if move is None:
                active[idx] = active[-1]
                active.pop()
                in_active[p1] = False
                continue

            if windows is not None:
                new_pair = accepted_pair[0]
                delta_v = float(cur_pair.fv - new_pair.fv)
                ep = Episode.from_move(instance, move, delta_v=delta_v)
            else:
                new_pair = SolutionPair(0, cur_pair.fo - move.gain(instance))
                ep = Episode.from_move(instance, move)
            if learning and ep.pairs:
                apply_update(strategy, cs.q, ep, cs, rl)
            episodes += 1
            tour = new_tour
            cur_pair = new_pair
            for c in move.cities:
                if not in_active[c]:
                    in_active[c] = True
                    active.append(c)

        improved = best_pair is None or better(cur_pair, best_pair)
        if improved:
            best = tour.copy()
            best_pair = cur_pair
            if controller is not None:
                controller.note_improvement()
        q_max, q_min = _q_extremes(cs)
        telemetry.append({"iteration": iteration, "strategy": strategy,
                          "episodes": episodes, "accepted": episodes,
                          "q_max": q_max, "q_min": q_min})
        trajectory.append((iteration, best_pair.fo))

    if best is None:  # zero-iteration budget; report a constructed tour
        best = choose_initial_tour(None, instance, cs, rng)
        if windows is not None:
            best_pair = violation_tsptw(instance, windows, best)
        else:
            best_pair = SolutionPair(0, tour_length(instance, best))

    return SolveResult(instance=name, mode=config.mode, seed=config.seed,
                       best_tour=best, best_length=best_pair.fo,
                       fv=best_pair.fv, iterations=iteration,
                       seconds=time.perf_counter() - t0,
                       trajectory=trajectory, telemetry=telemetry)


def solve(instance: Instance, config: SolverConfig | None = None,
          name: str = "") -> SolveResult:
    """Unconstrained run: iteration budget n by default (n / 5 for very
    large instances), time cap n seconds, stagnation counted in iterations."""
    if config is None:
        config = SolverConfig()
    n = instance.n
    i_max = config.i_max if config.i_max is not None else (
        n // 5 if n >= 10000 else n)
    t_max = config.t_max if config.t_max is not None else float(n)
    rl = _resolve_rl(config, i_max / 20)
    return _run(instance, config, name or instance.name, None,
                i_max, t_max, rl, time_based=False)


def solve_tsptw(instance: Instance, windows: TimeWindowData,
                config: SolverConfig | None = None, name: str = "") -> SolveResult:
    """Constrained run: time-limited (no iteration cap by default),
    stagnation counted in seconds."""
    if config is None:
        config = SolverConfig()
    i_max = config.i_max if config.i_max is not None else math.inf
    t_max = config.t_max if config.t_max is not None else instance.n / 10
    rl = _resolve_rl(config, t_max / 20)
    return _run(instance, config, name or instance.name, windows,
                i_max, t_max, rl, time_based=True)


@dataclass
class JVTransform:
    """Symmetric embedding of a directed cost matrix.

    Every original city gets a ghost twin joined by a zero-cost edge; the
    directed arc (i, j) becomes the edge (ghost_i, j) at cost c(i, j) plus a
    uniform penalty, and all other edges are priced out.  A symmetric tour
    of cost C maps to a directed tour of cost C - offset.
    """

    instance: Instance
    n: int
    offset: int

    def ghost(self, i: int) -> int:
        return self.n + i

    def recover(self, tour: Tour) -> list[int]:
        """Directed city order encoded by a tour of the embedded instance."""
        order = [int(c) for c in tour.order]
        i0 = order.index(0)
        order = order[i0:] + order[:i0]
        if order[1] != self.ghost(0):
            order = [order[0]] + order[1:][::-1]
        if order[1] != self.ghost(0):
            raise ValueError("tour does not alternate cities with their ghosts")
        return [c for c in order if c < self.n]


def jv_transform(costs: np.ndarray) -> JVTransform:
    """Embed a finite directed cost matrix into a symmetric instance whose
    optimal tours correspond one-to-one to optimal directed tours."""
    c = np.asarray(costs, dtype=np.int64)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("cost matrix must be square")
    n = c.shape[0]
    if n < 3:
        raise ValueError("need at least 3 cities")
    # The arc penalty forces every ghost pairing into the tour; anything
    # beating it would need more than n penalized arcs.
    penalty = n * max(int(c.max()), 1) + 1
    forbidden = (2 * n + 2) * penalty
    full = np.full((2 * n, 2 * n), forbidden, dtype=np.int64)
    for i in range(n):
        full[i, n + i] = full[n + i, i] = 0
        for j in range(n):
            if i != j:
                full[n + i, j] = full[j, n + i] = int(c[i, j]) + penalty
    np.fill_diagonal(full, 0)
    return JVTransform(instance=Instance.from_matrix(full), n=n,
                       offset=n * penalty)
