"""The sequential-decision environment: states, transitions, rewards and
byte-exact text observations.

An episode starts at the puzzle start and ends when the head enters the
end (verified against all rules), when no legal move remains (deadlock),
or at the step limit.  The outcome reward is +1 on a solved episode and
-1 on any other terminal.  The optional process reward adds +0.01 per
step whose post-move path is a prefix of some enumerated solution and
-0.01 otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .errors import EpisodeOver, IllegalAction, UnsolvablePuzzle
from .grid import Pos, Puzzle, render_grid_tokens
from .paths import Action, Mode, Path, apply_move, legal_moves
from .rules import Verdict, verify
from .search import SearchBudget, SolutionSet, enumerate_solutions

OBSERVATION_FOOTER = (
    "You MAY think step-by-step, but you MUST end your response with:\n"
    "Final: <action>\n"
    "Where <action> is one of 0=RIGHT, 1=UP, 2=LEFT, 3=DOWN\n"
    "  (you may also write the direction name, e.g. Final: right)."
)


class Status(Enum):
    RUNNING = "running"
    SOLVED = "solved"
    FAILED_RULES = "failed_rules"
    DEADLOCK = "deadlock"
    STEP_LIMIT = "step_limit"


TERMINAL_STATUSES = (Status.SOLVED, Status.FAILED_RULES, Status.DEADLOCK, Status.STEP_LIMIT)


@dataclass(frozen=True)
class EnvConfig:
    step_limit: int = 100
    process_rewards: bool = False
    solution_budget: SearchBudget = field(default_factory=SearchBudget)


@dataclass(frozen=True)
class RewardSignal:
    outcome: float
    process: float

    @property
    def total(self) -> float:
        return self.outcome + self.process


@dataclass(frozen=True)
class Observation:
    text: str
    step: int
    position: Pos
    legal: tuple[Action, ...]
    grid_rows: tuple[str, ...]


@dataclass
class EnvState:
    puzzle: Puzzle
    path: Path
    step_count: int
    mode: Mode
    status: Status
    step_limit: int
    solutions: SolutionSet | None = None
    process_rewards: bool = False
    verdict: Verdict | None = None

    def legal_actions(self) -> tuple[Action, ...]:
        if self.status is not Status.RUNNING:
            return ()
        return tuple(sorted(legal_moves(self.puzzle, self.path, self.mode)))

    @property
    def head(self) -> Pos:
        return self.path[-1]

    @property
    def forward_edges(self) -> int:
        return len(self.path) - 1


def format_observation(step: int, position: Pos, legal: tuple[Action, ...],
                       grid_rows: tuple[str, ...] | list[str]) -> str:
    """The fixed observation template; every field is recoverable from
    the rendered text."""
    legal_txt = ",".join(f"{int(a)}={a.name}" for a in sorted(legal))
    lines = [
        f"Step: {step}",
        f"Current Position: ({position.x}, {position.y})",
        f"Legal Actions: [{legal_txt}]",
        "",
        "Grid State:",
        *grid_rows,
        "",
        OBSERVATION_FOOTER,
    ]
    return "\n".join(lines)


def render_observation(state: EnvState) -> Observation:
    step = state.step_count + 1
    legal = state.legal_actions()
    grid_rows = tuple(render_grid_tokens(state.puzzle, list(state.path)))
    text = format_observation(step, state.head, legal, grid_rows)
    return Observation(text=text, step=step, position=state.head,
                       legal=legal, grid_rows=grid_rows)


def reset(puzzle: Puzzle, mode: Mode = Mode.NO_BACKTRACK,
          config: EnvConfig | None = None,
          solutions: SolutionSet | None = None) -> tuple[EnvState, Observation]:
    """Fresh episode at the start position.

    With process rewards enabled a solution set is required; it is
    enumerated here when not supplied, and a certified empty set raises
    UnsolvablePuzzle.
    """
    config = config or EnvConfig()
    if config.process_rewards and solutions is None:
        solutions = enumerate_solutions(puzzle, config.solution_budget)
    if config.process_rewards and solutions is not None:
        if not solutions.solutions and solutions.exhausted:
            raise UnsolvablePuzzle(
                f"puzzle {puzzle.puzzle_id!r} has no solution; "
                "process rewards need at least one")
    state = EnvState(
        puzzle=puzzle,
        path=(puzzle.start,),
        step_count=0,
        mode=mode,
        status=Status.RUNNING,
        step_limit=config.step_limit,
        solutions=solutions,
        process_rewards=config.process_rewards,
    )
    return state, render_observation(state)


def _process_signal(state: EnvState) -> float:
    if not state.process_rewards or state.solutions is None:
        return 0.0
    return 0.01 if state.solutions.is_solution_prefix(state.path) else -0.01


def step(state: EnvState, action: Action) -> tuple[EnvState, Observation, RewardSignal, bool]:
    """Apply one action; mutates and returns the state.

    Transition order: move, then end-of-path verification, then deadlock,
    then step limit.  Backtrack pops count as steps.  A running state
    with no legal move at all (sealed start) terminates as a deadlock on
    the first call without consuming the action.
    """
    if state.status is not Status.RUNNING:
        raise EpisodeOver(f"episode already terminated with {state.status.value}")
    legal = legal_moves(state.puzzle, state.path, state.mode)
    if not legal:
        state.status = Status.DEADLOCK
        reward = RewardSignal(outcome=-1.0,
                              process=-0.01 if state.process_rewards else 0.0)
        return state, render_observation(state), reward, True
    if action not in legal:
        raise IllegalAction(
            f"{Action(action).name} not legal here",
            legal=sorted(int(a) for a in legal))

    state.path = apply_move(state.puzzle, state.path, action, state.mode)
    state.step_count += 1

    outcome = 0.0
    if state.head == state.puzzle.end:
        state.verdict = verify(state.puzzle, state.path)
        state.status = Status.SOLVED if state.verdict.satisfied else Status.FAILED_RULES
        outcome = 1.0 if state.verdict.satisfied else -1.0
    elif not legal_moves(state.puzzle, state.path, state.mode):
        state.status = Status.DEADLOCK
        outcome = -1.0
    elif state.step_count >= state.step_limit:
        state.status = Status.STEP_LIMIT
        outcome = -1.0

    reward = RewardSignal(outcome=outcome, process=_process_signal(state))
    terminated = state.status is not Status.RUNNING
    return state, render_observation(state), reward, terminated


def replay_actions(puzzle: Puzzle, actions: list[Action], mode: Mode,
                   config: EnvConfig | None = None,
                   solutions: SolutionSet | None = None):
    """Run a fixed action sequence; yields (pre_observation, action,
    reward, terminated) per step.  Stops at termination."""
    state, obs = reset(puzzle, mode, config, solutions)
    for action in actions:
        if state.status is not Status.RUNNING:
            break
        pre = obs
        state, obs, reward, terminated = step(state, action)
        yield state, pre, action, reward, terminated


def clone_config(config: EnvConfig, **kwargs) -> EnvConfig:
    return replace(config, **kwargs)
