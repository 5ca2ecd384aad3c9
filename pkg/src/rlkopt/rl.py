"""Rewards, the three Q-update rules, and the variable-strategy controller.

An episode is one accepted k-opt move: its state-action pairs are the
(even-position city, candidate city) pairs of the move sequence, and the
reward of a pair is removed-edge cost minus added-edge cost.  In the
constrained setting the episode's violation reduction is folded into the
reward with a sign-preserving rule.
"""

from dataclasses import dataclass, field

from .core import Instance, MoveSequence
from .candidates import CandidateSets

STRATEGY_QLEARNING = 1
STRATEGY_SARSA = 2
STRATEGY_MONTE_CARLO = 3


@dataclass
class RLConfig:
    lam: float = 0.1       # learning rate
    gamma: float = 0.9     # reward discount
    n_max: float = 1.0     # stagnation budget before a strategy switch

    def __post_init__(self):
        if not (0.0 < self.lam <= 1.0):
            raise ValueError("learning rate must be in (0, 1]")
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError("discount must be in [0, 1]")
        if self.n_max <= 0:
            raise ValueError("n_max must be positive")


@dataclass
class Episode:
    """State-action pairs and rewards extracted from one accepted move."""

    pairs: list[tuple[int, int]]
    rewards: list[float]
    delta_v: float = 0.0
    skipped: int = 0  # pairs whose (state, action) was not a stored candidate

    @classmethod
    def from_move(cls, instance: Instance, move: MoveSequence,
                  delta_v: float | None = None) -> "Episode":
        """Build the episode of a move sequence p1..p2k.

        Pairs are (p_2i, p_2i+1) for i = 1..k-1 (0-based: indices 1, 2 then
        3, 4 ...); the forced closing edge is not a learned action.  When
        `delta_v` is given, rewards pass through the constrained rule.
        """
        p = move.cities
        pairs = []
        rewards: list[float] = []
        for i in range(1, len(p) // 2):
            # (state, action) spans added edge y_i; the reward compares it
            # against the removed edge x_i ending at the same state.
            prev_city, state, action = p[2 * i - 2], p[2 * i - 1], p[2 * i]
            r = float(reward(instance, prev_city, state, action))
            if delta_v is not None:
                r = reward_constrained(r, delta_v)
            pairs.append((state, action))
            rewards.append(r)
        return cls(pairs=pairs, rewards=rewards,
                   delta_v=0.0 if delta_v is None else delta_v)


def reward(instance: Instance, p_prev: int, state: int, action: int) -> int:
    """Removed-edge cost minus added-edge cost for one state-action pair."""
    return instance.cost(p_prev, state) - instance.cost(state, action)


def reward_constrained(r: float, delta_v: float) -> float:
    """Fold the episode's violation reduction into the reward.

    The length reward only survives when it agrees in sign with (or is
    neutral to) the violation change; otherwise the violation term alone
    decides the reward.
    """
    if delta_v * r >= 0:
        return delta_v + r
    return delta_v


def update_monte_carlo(q: dict, ep: Episode) -> dict:
    """Overwrite each pair's Q with the episode return from that pair on."""
    suffix = 0.0
    values = [0.0] * len(ep.pairs)
    for i in range(len(ep.pairs) - 1, -1, -1):
        suffix += ep.rewards[i]
        values[i] = suffix
    for (pair, value) in zip(ep.pairs, values):
        if pair in q:
            q[pair] = value
        else:
            ep.skipped += 1
    return q


def update_sarsa(q: dict, ep: Episode, cfg: RLConfig) -> dict:
    """One-step on-policy TD along the episode, in order.

    The successor value is the (pre-update) Q of the episode's next pair;
    the final pair's successor term is zero.
    """
    for i, pair in enumerate(ep.pairs):
        if pair not in q:
            ep.skipped += 1
            continue
        if i + 1 < len(ep.pairs):
            succ = q.get(ep.pairs[i + 1], 0.0)
        else:
            succ = 0.0
        q[pair] = (1.0 - cfg.lam) * q[pair] + cfg.lam * (ep.rewards[i] + cfg.gamma * succ)
    return q


def update_qlearning(q: dict, ep: Episode, cs: CandidateSets, cfg: RLConfig) -> dict:
    """One-step off-policy TD: successor term is the best candidate Q of the
    next state; the final pair's successor term is zero."""
    for i, pair in enumerate(ep.pairs):
        if pair not in q:
            ep.skipped += 1
            continue
        if i + 1 < len(ep.pairs):
            succ = cs.max_q(ep.pairs[i + 1][0])
        else:
            succ = 0.0
        q[pair] = (1.0 - cfg.lam) * q[pair] + cfg.lam * (ep.rewards[i] + cfg.gamma * succ)
    return q


def apply_update(strategy: int, q: dict, ep: Episode, cs: CandidateSets,
                 cfg: RLConfig) -> None:
    if strategy == STRATEGY_QLEARNING:
        update_qlearning(q, ep, cs, cfg)
    elif strategy == STRATEGY_SARSA:
        update_sarsa(q, ep, cfg)
    elif strategy == STRATEGY_MONTE_CARLO:
        update_monte_carlo(q, ep)
    else:
        raise ValueError(f"unknown strategy {strategy}")


@dataclass
class StrategyController:
    """Cycles Q-learning -> Sarsa -> Monte Carlo when the best solution
    stagnates for n_max units (iterations, or seconds in timed mode)."""

    n_max: float
    strategy: int = STRATEGY_QLEARNING
    num: float = 0.0

    def start_iteration(self, elapsed: float = 1.0) -> int:
        """Called at the top of every outer iteration; may switch strategy."""
        self.num += elapsed
        if self.num >= self.n_max:
            self.strategy = self.strategy % 3 + 1
            self.num = 0.0
        return self.strategy

    def note_improvement(self) -> None:
        self.num = 0.0


def strategy_step(controller: StrategyController, improved_best: bool) -> int:
    """One controller transition: reset on improvement, else advance the
    stagnation counter and cycle the strategy at the boundary."""
    if improved_best:
        controller.note_improvement()
        return controller.strategy
    return controller.start_iteration()
