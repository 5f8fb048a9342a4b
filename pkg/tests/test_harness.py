import json
import random

import httpx
import pytest

from gridgym.env import EnvConfig, reset, step
from gridgym.errors import IllegalChoice, NoMarker, UnknownPuzzle, UnknownToken
from gridgym.fixtures import four_stars_puzzle, open_ring_puzzle, sample_puzzles
from gridgym.harness import (
    AgentBinding,
    ChatModelAgent,
    EpisodeRecord,
    StepRecord,
    aggregate,
    parse_action,
    run_episode,
    run_episodes,
)
from gridgym.paths import Action, Mode
from gridgym.search import enumerate_solutions

from .oracles import random_board

GOLDEN_ACTIONS = (Action.DOWN, Action.DOWN, Action.DOWN, Action.RIGHT, Action.RIGHT)
ALL_ACTIONS = {Action.RIGHT, Action.UP, Action.LEFT, Action.DOWN}


def _stable(record):
    data = record.to_dict()
    data.pop("wall_time")
    return data


class TestParseAction:
    def test_digit_after_reasoning(self):
        text = "the corridor forces it...\nFinal: 3"
        assert parse_action(text, {Action.UP, Action.DOWN}) is Action.DOWN

    def test_direction_name(self):
        assert parse_action("Final: right", {Action.RIGHT}) is Action.RIGHT

    def test_case_insensitive(self):
        assert parse_action("FINAL: Down", ALL_ACTIONS) is Action.DOWN

    def test_no_marker(self):
        with pytest.raises(NoMarker):
            parse_action("I think down", ALL_ACTIONS)

    def test_unknown_token(self):
        with pytest.raises(UnknownToken):
            parse_action("Final: banana", ALL_ACTIONS)

    def test_illegal_choice(self):
        with pytest.raises(IllegalChoice):
            parse_action("Final: 0", {Action.UP, Action.DOWN})

    def test_last_marker_wins(self):
        text = "Final: 1\nno wait\nFinal: 3"
        assert parse_action(text, ALL_ACTIONS) is Action.DOWN

    def test_last_wellformed_marker_wins_over_garbage(self):
        text = "Final: 3\nFinal: banana"
        assert parse_action(text, ALL_ACTIONS) is Action.DOWN

    def test_angle_bracket_literal(self):
        assert parse_action("Final: <2>", ALL_ACTIONS) is Action.LEFT

    def test_markdown_bold(self):
        assert parse_action("**Final: 0**", ALL_ACTIONS) is Action.RIGHT


class TestScriptedEpisodes:
    def test_golden_replay_solves(self):
        binding = AgentBinding(kind="scripted", actions=GOLDEN_ACTIONS)
        record = run_episode(binding, four_stars_puzzle(), Mode.NO_BACKTRACK)
        assert record.status == "solved"
        assert record.total_actions == 5
        assert record.forward_edges == 5
        assert record.outcome_reward == 1.0
        assert len(record.steps) == 5
        assert not record.steps[0].is_backtrack

    def test_backtrack_steps_flagged(self):
        actions = (Action.DOWN, Action.UP, Action.DOWN, Action.DOWN, Action.DOWN,
                   Action.RIGHT, Action.RIGHT)
        binding = AgentBinding(kind="scripted", actions=actions)
        record = run_episode(binding, four_stars_puzzle(), Mode.BACKTRACK)
        assert record.status == "solved"
        assert record.total_actions == 7
        assert record.forward_edges == 5
        assert [s.is_backtrack for s in record.steps] == [
            False, True, False, False, False, False, False]

    def test_record_round_trips_as_json(self):
        binding = AgentBinding(kind="scripted", actions=GOLDEN_ACTIONS)
        record = run_episode(binding, four_stars_puzzle(), Mode.NO_BACKTRACK)
        clone = EpisodeRecord.from_dict(json.loads(json.dumps(record.to_dict())))
        assert clone.to_dict() == record.to_dict()


class TestRandomAgent:
    def test_identical_records_across_runs(self):
        binding = AgentBinding(kind="random_walk", seed="fixed")
        a = run_episode(binding, four_stars_puzzle(), Mode.NO_BACKTRACK)
        b = run_episode(binding, four_stars_puzzle(), Mode.NO_BACKTRACK)
        assert _stable(a) == _stable(b)

    def test_ring_always_completes(self):
        binding = AgentBinding(kind="random_walk", seed=3)
        record = run_episode(binding, open_ring_puzzle(), Mode.NO_BACKTRACK)
        assert record.status == "solved"
        assert record.total_actions == 4


class TestAStarAgent:
    def test_completes_every_solvable_puzzle(self):
        rng = random.Random(55)
        binding = AgentBinding(kind="astar")
        done = 0
        while done < 8:
            puzzle = random_board(rng)
            if not enumerate_solutions(puzzle).solutions:
                continue
            done += 1
            record = run_episode(binding, puzzle, Mode.NO_BACKTRACK)
            assert record.status in ("solved", "failed_rules")  # always reaches end


def _chat_transport(replies):
    """A chat-completions endpoint stub cycling through canned replies."""
    calls = {"n": 0}

    def handler(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content)
        assert body["messages"][0]["role"] == "system"
        reply = replies[min(calls["n"], len(replies) - 1)]
        calls["n"] += 1
        return httpx.Response(200, json={
            "choices": [{"message": {"role": "assistant", "content": reply}}],
            "usage": {"prompt_tokens": 11, "completion_tokens": 7},
        })

    return httpx.MockTransport(handler), calls


class TestChatAgent:
    def _binding(self):
        return AgentBinding(kind="chat_model", endpoint="http://chat.test",
                            model_name="stub-model")

    def test_solves_with_canned_replies(self):
        replies = [f"thinking...\nFinal: {int(a)}" for a in GOLDEN_ACTIONS]
        transport, calls = _chat_transport(replies)
        agent = ChatModelAgent(self._binding(), transport=transport)
        record = run_episode(self._binding(), four_stars_puzzle(),
                             Mode.NO_BACKTRACK, agent=agent)
        assert record.status == "solved"
        assert calls["n"] == 5
        assert record.steps[0].prompt_tokens == 11
        assert not record.tokens_estimated

    def test_unparsable_replies_exhaust_retries(self):
        transport, calls = _chat_transport(["hello"])
        agent = ChatModelAgent(self._binding(), transport=transport)
        record = run_episode(self._binding(), four_stars_puzzle(),
                             Mode.NO_BACKTRACK, agent=agent)
        assert record.status == "deadlock"
        assert record.failure_reason == "parse_failure"
        assert record.outcome_reward == -1.0
        assert calls["n"] == 4  # initial try + 3 corrective re-prompts

    def test_corrective_prompt_recovers(self):
        replies = ["mumble", "Final: 3", "Final: 3", "Final: 3",
                   "Final: 0", "Final: 0"]
        transport, calls = _chat_transport(replies)
        agent = ChatModelAgent(self._binding(), transport=transport)
        record = run_episode(self._binding(), four_stars_puzzle(),
                             Mode.NO_BACKTRACK, agent=agent)
        assert record.status == "solved"
        assert calls["n"] == 6

    def test_transport_failure_aborts(self):
        def handler(request):
            raise httpx.ConnectError("nope")

        agent = ChatModelAgent(self._binding(),
                               transport=httpx.MockTransport(handler))
        record = run_episode(self._binding(), four_stars_puzzle(),
                             Mode.NO_BACKTRACK, agent=agent)
        assert record.aborted
        assert record.failure_reason == "endpoint_error"


class TestAggregate:
    def _record(self, puzzle_id="four-stars-2x2", status="solved",
                total_actions=5, forward_edges=5, aborted=False):
        return EpisodeRecord(
            puzzle_id=puzzle_id, mode="no_backtrack", agent="test",
            steps=[], status=status, total_actions=total_actions,
            forward_edges=forward_edges, wall_time=0.0, aborted=aborted)

    def test_all_solved(self):
        records = [self._record() for _ in range(10)]
        report = aggregate(records, sample_puzzles())
        assert report.accuracy == 100.0
        assert report.completion_rate == 100.0
        assert report.n_episodes == 10

    def test_backtracking_ratio_definition(self):
        records = [self._record(total_actions=10, forward_edges=5)]
        report = aggregate(records, sample_puzzles())
        assert report.backtracking_ratio["median"] == pytest.approx(2.0)

    def test_zero_edge_episodes_excluded_from_ratio(self):
        records = [self._record(status="deadlock", total_actions=3, forward_edges=0),
                   self._record(total_actions=6, forward_edges=3)]
        report = aggregate(records, sample_puzzles())
        assert report.backtracking_ratio["median"] == pytest.approx(2.0)

    def test_completion_counts_failed_rules(self):
        records = [self._record(), self._record(status="failed_rules"),
                   self._record(status="deadlock")]
        report = aggregate(records, sample_puzzles())
        assert report.accuracy == pytest.approx(100.0 / 3)
        assert report.completion_rate == pytest.approx(200.0 / 3)
        assert report.accuracy <= report.completion_rate

    def test_permutation_invariance(self):
        rng = random.Random(0)
        records = [self._record(status=rng.choice(["solved", "deadlock", "failed_rules"]),
                                total_actions=rng.randint(1, 20),
                                forward_edges=rng.randint(1, 10))
                   for _ in range(30)]
        shuffled = records[:]
        rng.shuffle(shuffled)
        a = aggregate(records, sample_puzzles())
        b = aggregate(shuffled, sample_puzzles())
        assert a.to_dict() == b.to_dict()

    def test_aborted_excluded_but_counted(self):
        records = [self._record(), self._record(aborted=True, status="aborted")]
        report = aggregate(records, sample_puzzles())
        assert report.n_episodes == 1
        assert report.n_aborted == 1
        assert report.accuracy == 100.0

    def test_unknown_puzzle_raises(self):
        with pytest.raises(UnknownPuzzle):
            aggregate([self._record(puzzle_id="who")], sample_puzzles())

    def test_abandoned_sessions_counted_separately(self):
        records = [self._record(), self._record(status="abandoned")]
        report = aggregate(records, sample_puzzles())
        assert report.n_episodes == 1
        assert report.n_abandoned == 1
        assert report.accuracy == 100.0

    def test_per_rule_buckets(self):
        records = [self._record(), self._record(puzzle_id="open-ring-1x1",
                                                status="deadlock")]
        report = aggregate(records, sample_puzzles())
        assert report.per_rule["Star"] == 100.0  # only the star puzzle counts

    def test_per_difficulty_buckets(self):
        records = [self._record(), self._record(status="deadlock")]
        report = aggregate(records, sample_puzzles())
        assert report.per_difficulty[2] == pytest.approx(50.0)


class TestTranscriptIntegrity:
    def test_replay_reproduces_observations_and_status(self):
        rng = random.Random(101)
        puzzles = [four_stars_puzzle(), open_ring_puzzle()]
        done = 0
        while done < 6:
            puzzle = rng.choice(puzzles) if done % 3 else random_board(rng)
            binding = AgentBinding(kind="random_walk", seed=f"replay-{done}")
            mode = Mode.BACKTRACK if done % 2 else Mode.NO_BACKTRACK
            record = run_episode(binding, puzzle, mode)
            done += 1
            state, obs = reset(puzzle, mode)
            for step_record in record.steps:
                assert obs.text == step_record.observation_text
                state, obs, _, _ = step(state, Action(step_record.parsed_action))
            assert state.status.value == record.status

    def test_parallel_execution_keeps_order_and_results(self):
        binding = AgentBinding(kind="random_walk", seed="par")
        puzzles = [four_stars_puzzle(), open_ring_puzzle()] * 3
        serial = run_episodes(binding, puzzles, Mode.NO_BACKTRACK, parallel=1)
        parallel = run_episodes(binding, puzzles, Mode.NO_BACKTRACK, parallel=4)
        assert [_stable(r) for r in serial] == [_stable(r) for r in parallel]


class TestSealedStart:
    def test_random_agent_records_deadlock(self):
        from gridgym.grid import puzzle_from_tokens

        puzzle = puzzle_from_tokens([
            ["S", "G", "+"],
            ["G", "N", "+"],
            ["+", "+", "E"],
        ])
        binding = AgentBinding(kind="random_walk", seed=0)
        record = run_episode(binding, puzzle, Mode.NO_BACKTRACK)
        assert record.status == "deadlock"
        assert record.total_actions == 0
        assert record.steps == []
        assert record.outcome_reward == -1.0
