"""gridgym: a 2D grid-puzzle engine with seven interacting rule types, a
sequential-decision environment with optional backtracking, an exhaustive
solver, a puzzle generator with difficulty scoring, an agent evaluation
harness, and an HTTP session service."""

from .env import EnvConfig, EnvState, Observation, RewardSignal, Status, reset, step
from .errors import GridGymError
from .generator import GenConfig, difficulty_level, difficulty_score, generate_puzzle
from .grid import (
    CellCoord,
    Color,
    ParityClass,
    Polyshape,
    Pos,
    Puzzle,
    classify_position,
    parse_puzzle,
    puzzle_from_tokens,
    render_grid_tokens,
    serialize_puzzle,
)
from .harness import AgentBinding, EpisodeRecord, MetricsReport, aggregate, parse_action, run_episode
from .paths import (
    Action,
    Mode,
    apply_move,
    compute_regions,
    edge_touch_count,
    legal_moves,
    parse_path,
    serialize_path,
)
from .rules import Verdict, Violation, fit_polyominoes, star_partners, verify
from .search import SearchBudget, SolutionSet, astar_path, enumerate_solutions, random_walk_policy

__version__ = "0.1.0"
