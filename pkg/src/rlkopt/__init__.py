"""Reinforced k-opt local search for the TSP and the TSP with time windows.

The library builds candidate edge sets (alpha-nearness from 1-tree lower
bounds, or POPMUSIC tour sampling), scores them with a Q-value that is
adapted online by tabular reinforcement learning (Q-learning / Sarsa /
Monte Carlo under a variable-strategy controller), and runs a depth-bounded
sequential k-opt search restricted to those candidates.
"""

from .tsplib import ParseError, RawInstance, TimeWindowData, parse_tsplib, parse_tsptw, parse_tour, write_tour
from .core import Instance, Tour, MoveSequence, MoveError, tour_length, tour_neighbors, apply_move
from .onetree import AscentConfig, OneTree, AlphaTable, minimum_one_tree, alpha_values, ascend_pi
from .popmusic import PopmusicConfig, popmusic_tour, popmusic_candidate_edges
from .candidates import CandidateSets, init_q_alpha, init_q_popmusic, resort
from .kopt import KOptConfig, k_opt, feasibility_check, gain_check
from .rl import (
    RLConfig,
    Episode,
    StrategyController,
    reward,
    reward_constrained,
    update_monte_carlo,
    update_sarsa,
    update_qlearning,
    strategy_step,
)
from .solver import (
    SolverConfig,
    SolveResult,
    SolutionPair,
    MODES,
    solve,
    solve_tsptw,
    better,
    violation_tsptw,
    jv_transform,
    choose_initial_tour,
)

__version__ = "0.1.0"
