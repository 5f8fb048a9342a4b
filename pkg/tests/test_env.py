import random

import pytest

from gridgym import env as gymenv
from gridgym.env import EnvConfig, Status, format_observation, render_observation, reset, step
from gridgym.errors import EpisodeOver, IllegalAction, UnsolvablePuzzle
from gridgym.fixtures import four_stars_puzzle, open_ring_puzzle, poly_squares_puzzle
from gridgym.grid import Pos, puzzle_from_tokens
from gridgym.paths import Action, Mode
from gridgym.prompts import polyshape_catalog_text, system_prompt
from gridgym.rules import verify
from gridgym.search import SolutionSet, enumerate_solutions

from .oracles import random_board

GOLDEN_ACTIONS = [Action.DOWN, Action.DOWN, Action.DOWN, Action.RIGHT, Action.RIGHT]
GOLDEN_PATH = (Pos(0, 1), Pos(0, 2), Pos(0, 3), Pos(0, 4), Pos(1, 4), Pos(2, 4))

STEP1_OBSERVATION = """Step: 1
Current Position: (0, 1)
Legal Actions: [1=UP,3=DOWN]

Grid State:
['+', '+', '+', '+', '+', '.', '+']
['L', 'N', '+', 'P-R-16', '+', 'o-B', '+']
['+', '+', '+', '+', '+', '+', '+']
['+', 'N', '+', 'N', '+', 'o-B', '+']
['+', '+', 'E', '+', '+', '+', '+']

You MAY think step-by-step, but you MUST end your response with:
Final: <action>
Where <action> is one of 0=RIGHT, 1=UP, 2=LEFT, 3=DOWN
  (you may also write the direction name, e.g. Final: right)."""


class TestObservation:
    def test_step1_text_is_byte_exact(self):
        _, obs = reset(poly_squares_puzzle())
        assert obs.text == STEP1_OBSERVATION

    def test_single_action_rendering(self):
        state, _ = reset(four_stars_puzzle())
        for action in GOLDEN_ACTIONS[:3]:
            state, obs, _, _ = step(state, action)
        assert "Legal Actions: [0=RIGHT]" in obs.text

    def test_two_action_rendering_ascending_digits(self):
        _, obs = reset(four_stars_puzzle())
        assert "Legal Actions: [1=UP,3=DOWN]" in obs.text

    def test_text_reconstructs_from_fields(self):
        state, obs = reset(four_stars_puzzle())
        for action in GOLDEN_ACTIONS:
            rebuilt = format_observation(obs.step, obs.position, obs.legal, obs.grid_rows)
            assert rebuilt == obs.text
            state, obs, _, _ = step(state, action)

    def test_reset_is_deterministic(self):
        _, a = reset(four_stars_puzzle())
        _, b = reset(four_stars_puzzle())
        assert a == b

    def test_step_counter_displays_one_based(self):
        state, obs = reset(four_stars_puzzle())
        assert obs.text.startswith("Step: 1\n")
        state, obs, _, _ = step(state, Action.DOWN)
        assert obs.text.startswith("Step: 2\n")


class TestGoldenEpisode:
    def test_solves_in_five_actions(self):
        state, _ = reset(four_stars_puzzle())
        rewards = []
        for action in GOLDEN_ACTIONS:
            state, _, reward, terminated = step(state, action)
            rewards.append(reward)
        assert terminated
        assert state.status is Status.SOLVED
        assert state.step_count == 5
        assert rewards[-1].outcome == 1.0
        assert all(r.outcome == 0.0 for r in rewards[:-1])
        assert state.path == GOLDEN_PATH

    def test_solved_state_reverifies(self):
        state, _ = reset(four_stars_puzzle())
        for action in GOLDEN_ACTIONS:
            state, _, _, _ = step(state, action)
        assert verify(state.puzzle, state.path).satisfied


class TestTermination:
    def test_end_with_broken_rules_fails(self):
        puzzle = puzzle_from_tokens([
            ["S", "+", "+"],
            [".", "N", "+"],
            ["+", "+", "E"],
        ])
        state, _ = reset(puzzle)
        for action in (Action.RIGHT, Action.RIGHT, Action.DOWN, Action.DOWN):
            state, _, reward, terminated = step(state, action)
        assert terminated and state.status is Status.FAILED_RULES
        assert reward.outcome == -1.0

    def test_deadlock(self):
        # wander into the top-left corner pocket next to a gap
        puzzle = puzzle_from_tokens([
            ["+", "+", "+"],
            ["+", "N", "G"],
            ["S", "+", "E"],
        ])
        state, _ = reset(puzzle)
        state, _, _, _ = step(state, Action.UP)
        state, _, _, _ = step(state, Action.UP)
        state, obs, reward, terminated = step(state, Action.RIGHT)
        state, obs, reward, terminated = step(state, Action.RIGHT)
        # head (2,0): down blocked by gap, left visited; nothing remains
        assert terminated and state.status is Status.DEADLOCK
        assert reward.outcome == -1.0

    def test_sealed_start_deadlocks_on_first_step(self):
        puzzle = puzzle_from_tokens([
            ["S", "G", "+"],
            ["G", "N", "+"],
            ["+", "+", "E"],
        ])
        state, obs = reset(puzzle)
        assert obs.legal == ()
        assert state.status is Status.RUNNING
        state, _, reward, terminated = step(state, Action.UP)
        assert terminated and state.status is Status.DEADLOCK
        assert reward.outcome == -1.0
        assert state.step_count == 0

    def test_step_limit_hits_at_100(self):
        state, _ = reset(four_stars_puzzle(), Mode.BACKTRACK)
        actions = [Action.DOWN, Action.UP] * 50  # oscillate forever
        terminated = False
        for k, action in enumerate(actions, start=1):
            state, _, reward, terminated = step(state, action)
        assert k == 100 and terminated
        assert state.status is Status.STEP_LIMIT
        assert reward.outcome == -1.0

    def test_illegal_action_rejected(self):
        state, _ = reset(four_stars_puzzle())
        with pytest.raises(IllegalAction) as err:
            step(state, Action.RIGHT)
        assert err.value.legal == [1, 3]

    def test_terminal_state_accepts_no_transition(self):
        state, _ = reset(four_stars_puzzle())
        for action in GOLDEN_ACTIONS:
            state, _, _, _ = step(state, action)
        with pytest.raises(EpisodeOver):
            step(state, Action.UP)

    def test_no_backtrack_rollouts_terminate_within_bound(self):
        rng = random.Random(6)
        for _ in range(25):
            puzzle = random_board(rng)
            positions = sum(1 for _ in puzzle.path_positions())
            state, obs = reset(puzzle)
            taken = 0
            while state.status is Status.RUNNING and obs.legal:
                state, obs, _, _ = step(state, rng.choice(obs.legal))
                taken += 1
            assert taken <= min(state.step_limit, positions)


class TestProcessRewards:
    def test_prefix_match_sign(self):
        puzzle = four_stars_puzzle()
        only_golden = SolutionSet(solutions=(GOLDEN_PATH,), exhausted=True,
                                  cap=51, elapsed=0.0)
        config = EnvConfig(process_rewards=True)
        state, _ = reset(puzzle, Mode.NO_BACKTRACK, config, solutions=only_golden)
        _, _, reward, _ = step(state, Action.DOWN)
        assert reward.process == pytest.approx(0.01)

        state, _ = reset(puzzle, Mode.NO_BACKTRACK, config, solutions=only_golden)
        _, _, reward, _ = step(state, Action.UP)
        assert reward.process == pytest.approx(-0.01)

    def test_final_move_earns_both_signals(self):
        puzzle = four_stars_puzzle()
        config = EnvConfig(process_rewards=True)
        solutions = enumerate_solutions(puzzle)
        state, _ = reset(puzzle, Mode.NO_BACKTRACK, config, solutions=solutions)
        for action in GOLDEN_ACTIONS:
            state, _, reward, _ = step(state, action)
        assert reward.total == pytest.approx(1.01)

    def test_unsolvable_demands_error(self):
        puzzle = puzzle_from_tokens([
            ["S", "G", "+"],
            ["G", "N", "+"],
            ["+", "+", "E"],
        ])
        with pytest.raises(UnsolvablePuzzle):
            reset(puzzle, Mode.NO_BACKTRACK, EnvConfig(process_rewards=True))

    def test_disabled_process_signal_is_zero(self):
        state, _ = reset(four_stars_puzzle())
        _, _, reward, _ = step(state, Action.DOWN)
        assert reward.process == 0.0

    def test_return_decomposition(self):
        rng = random.Random(91)
        checked = 0
        while checked < 12:
            puzzle = random_board(rng)
            solutions = enumerate_solutions(puzzle)
            if not solutions.solutions:
                continue
            checked += 1
            config = EnvConfig(process_rewards=True)
            state, obs = reset(puzzle, Mode.NO_BACKTRACK, config, solutions)
            total = 0.0
            matching = others = 0
            while state.status is Status.RUNNING and obs.legal:
                action = rng.choice(obs.legal)
                state, obs, reward, _ = step(state, action)
                total += reward.total
                if solutions.is_solution_prefix(state.path):
                    matching += 1
                else:
                    others += 1
            outcome = 1.0 if state.status is Status.SOLVED else (
                -1.0 if state.status is not Status.RUNNING else 0.0)
            assert total == pytest.approx(outcome + 0.01 * matching - 0.01 * others,
                                          abs=1e-9)


class TestBacktrackSemantics:
    def test_pop_then_reuse(self):
        state, _ = reset(four_stars_puzzle(), Mode.BACKTRACK)
        state, _, _, _ = step(state, Action.DOWN)
        assert state.path == (Pos(0, 1), Pos(0, 2))
        state, obs, _, _ = step(state, Action.UP)  # pop back to start
        assert state.path == (Pos(0, 1),)
        assert Action.DOWN in obs.legal  # freed position is legal again
        state, _, _, _ = step(state, Action.DOWN)
        assert state.path == (Pos(0, 1), Pos(0, 2))
        assert state.step_count == 3  # backtracks count as steps

    def test_length_changes_by_one_per_action(self):
        rng = random.Random(17)
        state, obs = reset(four_stars_puzzle(), Mode.BACKTRACK)
        prev_len = len(state.path)
        for _ in range(60):
            if state.status is not Status.RUNNING or not obs.legal:
                break
            state, obs, _, _ = step(state, rng.choice(obs.legal))
            assert abs(len(state.path) - prev_len) == 1
            prev_len = len(state.path)


class TestSystemPrompts:
    def test_modes_differ_only_in_revisiting_and_constraints(self):
        puzzle = four_stars_puzzle()
        standard = system_prompt(puzzle, Mode.NO_BACKTRACK)
        backtrack = system_prompt(puzzle, Mode.BACKTRACK)
        assert "You can not traceback your path" in standard
        assert "Nodes CAN NOT be revisited" in standard
        assert "free to be used again" in backtrack
        assert "Nodes CAN be revisited" in backtrack
        # shared sections stay identical
        for fragment in ("Symbol Legend (Grid Notation)",
                         "Color Codes: R=Red, B=Blue",
                         "Polyshape Definitions:",
                         "3. Path-Based Rules (Edge Touching):"):
            assert fragment in standard and fragment in backtrack

    def test_polyshape_catalog_substitution(self):
        puzzle = poly_squares_puzzle()
        text = system_prompt(puzzle, Mode.NO_BACKTRACK)
        assert "Shape 16:\n[1]" in text
        assert "{polyshapes}" not in text
        assert polyshape_catalog_text(four_stars_puzzle()) == "(none)"
