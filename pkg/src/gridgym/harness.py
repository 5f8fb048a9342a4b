"""Episode driver and metrics aggregation for agents.

Agents are anything that maps a chat transcript to a raw text reply; the
harness renders observations, parses the trailing "Final: <action>"
marker (re-prompting a bounded number of times on parse errors), steps
the environment and records a full transcript.  Baseline agents reply
with synthesized Final lines so the parsing path is identical for every
agent kind.
"""

from __future__ import annotations

import os
import re
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import httpx

from . import env as gymenv
from .errors import (
    IllegalChoice,
    NoMarker,
    ParseFailure,
    UnknownPuzzle,
    UnknownToken,
)
from .grid import Puzzle
from .paths import Action, Mode, is_backtrack_move
from .prompts import system_prompt
from .rules import puzzle_rule_types
from .search import astar_path, random_walk_policy


class ChatEndpointError(Exception):
    """Transport failure talking to a chat endpoint, after retries."""


@dataclass(frozen=True)
class AgentBinding:
    kind: str  # "chat_model" | "random_walk" | "astar" | "scripted"
    endpoint: str | None = None
    model_name: str = ""
    temperature: float = 0.0
    max_tokens: int = 2048
    retry_limit: int = 3
    api_key_env: str = "GRIDGYM_API_KEY"
    seed: int | str = 0
    actions: tuple[Action, ...] = ()

    def __post_init__(self):
        if self.kind == "chat_model" and not (self.endpoint and self.model_name):
            raise ValueError("chat_model binding needs endpoint and model_name")


@dataclass
class StepRecord:
    observation_text: str
    raw_response: str
    parsed_action: int
    reward: float
    is_backtrack: bool
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def to_dict(self) -> dict:
        return {
            "observation_text": self.observation_text,
            "raw_response": self.raw_response,
            "parsed_action": self.parsed_action,
            "reward": self.reward,
            "is_backtrack": self.is_backtrack,
            "token_counts": {"prompt": self.prompt_tokens,
                             "completion": self.completion_tokens},
        }


@dataclass
class EpisodeRecord:
    puzzle_id: str
    mode: str
    agent: str
    steps: list[StepRecord]
    status: str
    total_actions: int
    forward_edges: int
    wall_time: float
    outcome_reward: float = 0.0
    failure_reason: str | None = None
    aborted: bool = False
    tokens_estimated: bool = False

    def to_dict(self) -> dict:
        return {
            "puzzle_id": self.puzzle_id,
            "mode": self.mode,
            "agent": self.agent,
            "status": self.status,
            "total_actions": self.total_actions,
            "forward_edges": self.forward_edges,
            "wall_time": self.wall_time,
            "outcome_reward": self.outcome_reward,
            "failure_reason": self.failure_reason,
            "aborted": self.aborted,
            "tokens_estimated": self.tokens_estimated,
            "steps": [s.to_dict() for s in self.steps],
        }

    @staticmethod
    def from_dict(data: dict) -> "EpisodeRecord":
        steps = [
            StepRecord(
                observation_text=s["observation_text"],
                raw_response=s["raw_response"],
                parsed_action=s["parsed_action"],
                reward=s["reward"],
                is_backtrack=s["is_backtrack"],
                prompt_tokens=s.get("token_counts", {}).get("prompt", 0),
                completion_tokens=s.get("token_counts", {}).get("completion", 0),
            )
            for s in data["steps"]
        ]
        return EpisodeRecord(
            puzzle_id=data["puzzle_id"],
            mode=data["mode"],
            agent=data["agent"],
            steps=steps,
            status=data["status"],
            total_actions=data["total_actions"],
            forward_edges=data["forward_edges"],
            wall_time=data["wall_time"],
            outcome_reward=data.get("outcome_reward", 0.0),
            failure_reason=data.get("failure_reason"),
            aborted=data.get("aborted", False),
            tokens_estimated=data.get("tokens_estimated", False),
        )


# --- action parsing ----------------------------------------------------------

_FINAL_RE = re.compile(
    r"final\s*:\s*\**\s*(?:<\s*)?([0-3]|right|up|left|down)(?:\s*>)?\b",
    re.IGNORECASE,
)
_MARKER_RE = re.compile(r"final\s*:", re.IGNORECASE)

_NAME_TO_ACTION = {a.name.lower(): a for a in Action}


def parse_action(response: str, legal: set[Action] | tuple[Action, ...]) -> Action:
    """Take the last well-formed "Final: <digit-or-name>" line and map it
    through the fixed digit encoding."""
    matches = _FINAL_RE.findall(response)
    if not matches:
        if _MARKER_RE.search(response):
            raise UnknownToken("Final marker present but its value is unreadable")
        raise NoMarker("response has no Final: line")
    token = matches[-1].lower()
    action = Action(int(token)) if token.isdigit() else _NAME_TO_ACTION[token]
    if action not in set(legal):
        raise IllegalChoice(
            f"{action.name} is not among the legal actions "
            f"{sorted(int(a) for a in legal)}")
    return action


def _estimate_tokens(text: str) -> int:
    return len(text.split())


# --- agents ------------------------------------------------------------------

class ScriptedAgent:
    def __init__(self, actions):
        self._actions = list(actions)
        self._i = 0

    def reply(self, messages, state) -> str:
        if self._i >= len(self._actions):
            return "Final: -"  # exhausted script: unparsable on purpose
        action = Action(self._actions[self._i])
        self._i += 1
        return f"Final: {int(action)}"


class RandomWalkAgent:
    def __init__(self, seed):
        self._seed = seed

    def reply(self, messages, state) -> str:
        return f"Final: {int(random_walk_policy(state, self._seed))}"


class AStarAgent:
    """Walks the precomputed shortest path; rule-blind navigation."""

    def __init__(self):
        self._route: list[Action] | None = None
        self._i = 0

    def reply(self, messages, state) -> str:
        if self._route is None:
            path = astar_path(state.puzzle)
            self._route = []
            if path is not None:
                for a, b in zip(path, path[1:]):
                    delta = (b.x - a.x, b.y - a.y)
                    self._route.append(next(x for x in Action if x.delta == delta))
        if self._i >= len(self._route):
            return "Final: -"
        action = self._route[self._i]
        self._i += 1
        return f"Final: {int(action)}"


class ChatModelAgent:
    """Portable chat-completions client; key read from the binding's
    environment variable when present."""

    def __init__(self, binding: AgentBinding, transport_retries: int = 2,
                 transport: httpx.BaseTransport | None = None):
        self._binding = binding
        self._retries = transport_retries
        self.last_usage: tuple[int, int] | None = None
        headers = {}
        key = os.environ.get(binding.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(base_url=binding.endpoint, headers=headers,
                                    timeout=120.0, transport=transport)

    def reply(self, messages, state) -> str:
        body = {
            "model": self._binding.model_name,
            "messages": messages,
            "temperature": self._binding.temperature,
            "max_tokens": self._binding.max_tokens,
        }
        last_exc: Exception | None = None
        for _ in range(self._retries + 1):
            try:
                resp = self._client.post("/chat/completions", json=body)
                resp.raise_for_status()
                data = resp.json()
                usage = data.get("usage") or {}
                self.last_usage = (usage.get("prompt_tokens"),
                                   usage.get("completion_tokens"))
                return data["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                last_exc = exc
        raise ChatEndpointError(f"chat endpoint failed after retries: {last_exc}")


def _make_agent(binding: AgentBinding):
    if binding.kind == "scripted":
        return ScriptedAgent(binding.actions)
    if binding.kind == "random_walk":
        return RandomWalkAgent(binding.seed)
    if binding.kind == "astar":
        return AStarAgent()
    if binding.kind == "chat_model":
        return ChatModelAgent(binding)
    raise ValueError(f"unknown agent kind {binding.kind!r}")


_CORRECTIVE = (
    "Your previous reply could not be used: {reason}. "
    "Reply again and end with a line \"Final: <action>\" where <action> is "
    "one of {legal}."
)


def run_episode(binding: AgentBinding, puzzle: Puzzle, mode: Mode,
                config: gymenv.EnvConfig | None = None,
                solutions=None, agent=None) -> EpisodeRecord:
    """One full episode: system prompt once, then alternating user
    observations and assistant replies so the agent sees its own
    history.  Parse errors are re-prompted up to retry_limit times, then
    the episode fails with reason parse_failure (deadlock-equivalent).
    """
    agent = agent or _make_agent(binding)
    agent_name = binding.model_name or binding.kind
    t0 = time.monotonic()
    state, obs = gymenv.reset(puzzle, mode, config, solutions)
    messages = [{"role": "system", "content": system_prompt(puzzle, mode)}]
    steps: list[StepRecord] = []
    failure_reason = None
    aborted = False
    tokens_estimated = binding.kind != "chat_model"

    while state.status is gymenv.Status.RUNNING:
        if not obs.legal:
            # sealed start: the environment terminates as a deadlock on
            # the first (unapplied) step call
            state, obs, _, _ = gymenv.step(state, Action.RIGHT)
            break
        messages.append({"role": "user", "content": obs.text})
        action: Action | None = None
        raw = ""
        prompt_tokens = completion_tokens = 0
        try:
            for retry in range(binding.retry_limit + 1):
                raw = agent.reply(messages, state)
                messages.append({"role": "assistant", "content": raw})
                usage = getattr(agent, "last_usage", None)
                if usage and usage[0] is not None:
                    prompt_tokens, completion_tokens = usage
                else:
                    prompt_tokens = sum(_estimate_tokens(m["content"]) for m in messages[:-1])
                    completion_tokens = _estimate_tokens(raw)
                    if binding.kind == "chat_model":
                        tokens_estimated = True
                try:
                    action = parse_action(raw, obs.legal)
                    break
                except ParseFailure as exc:
                    if retry == binding.retry_limit:
                        failure_reason = "parse_failure"
                        break
                    legal_txt = ",".join(f"{int(a)}={a.name}" for a in obs.legal)
                    messages.append({
                        "role": "user",
                        "content": _CORRECTIVE.format(reason=exc, legal=f"[{legal_txt}]"),
                    })
        except ChatEndpointError:
            aborted = True
            failure_reason = "endpoint_error"
        if action is None:
            break
        pre_text = obs.text
        was_backtrack = is_backtrack_move(state.path, action)
        state, obs, reward, terminated = gymenv.step(state, action)
        steps.append(StepRecord(
            observation_text=pre_text,
            raw_response=raw,
            parsed_action=int(action),
            reward=reward.total,
            is_backtrack=was_backtrack,
            prompt_tokens=prompt_tokens,
            completion_tokens=completion_tokens,
        ))

    status = state.status.value
    outcome = 0.0
    if state.status is gymenv.Status.SOLVED:
        outcome = 1.0
    elif state.status is not gymenv.Status.RUNNING:
        outcome = -1.0
    if failure_reason and state.status is gymenv.Status.RUNNING:
        status = "deadlock" if not aborted else "aborted"
        outcome = -1.0 if not aborted else 0.0
    return EpisodeRecord(
        puzzle_id=puzzle.puzzle_id,
        mode="backtrack" if mode is Mode.BACKTRACK else "no_backtrack",
        agent=agent_name,
        steps=steps,
        status=status,
        total_actions=state.step_count,
        forward_edges=state.forward_edges,
        wall_time=time.monotonic() - t0,
        outcome_reward=outcome,
        failure_reason=failure_reason,
        aborted=aborted,
        tokens_estimated=tokens_estimated,
    )


def run_episodes(binding: AgentBinding, puzzles: list[Puzzle], mode: Mode,
                 config: gymenv.EnvConfig | None = None,
                 parallel: int = 1) -> list[EpisodeRecord]:
    """Run one episode per puzzle, optionally with bounded concurrency;
    results keep the input order regardless of scheduling."""
    if parallel <= 1:
        return [run_episode(binding, p, mode, config) for p in puzzles]
    with ThreadPoolExecutor(max_workers=parallel) as pool:
        futures = [pool.submit(run_episode, binding, p, mode, config)
                   for p in puzzles]
        return [f.result() for f in futures]


# --- metrics -----------------------------------------------------------------

@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    completion_rate: float
    avg_steps: float
    per_difficulty: dict[int, float]
    per_rule: dict[str, float]
    backtracking_ratio: dict[str, float]
    n_episodes: int
    n_aborted: int = 0
    n_abandoned: int = 0

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "completion_rate": self.completion_rate,
            "avg_steps": self.avg_steps,
            "per_difficulty": {f"D{k}": v for k, v in sorted(self.per_difficulty.items())},
            "per_rule": dict(sorted(self.per_rule.items())),
            "backtracking_ratio": self.backtracking_ratio,
            "n_episodes": self.n_episodes,
            "n_aborted": self.n_aborted,
            "n_abandoned": self.n_abandoned,
        }


def _pct(part: int, whole: int) -> float:
    return 100.0 * part / whole if whole else 0.0


def aggregate(records: list[EpisodeRecord], puzzles: dict[str, Puzzle]) -> MetricsReport:
    """Paper-style metrics: accuracy = %solved, completion = %reached-end
    (solved or failed_rules), per-difficulty and per-rule-type accuracy,
    and the per-episode total-actions/forward-edges ratio summarized by
    median and IQR."""
    from .generator import difficulty_level

    live = [r for r in records if not r.aborted]
    n_aborted = len(records) - len(live)
    # abandoned / never-finished human sessions stay out of the rates
    counted = [r for r in live if r.status not in ("abandoned", "running")]
    n_abandoned = len(live) - len(counted)
    for r in counted:
        if r.puzzle_id not in puzzles:
            raise UnknownPuzzle(f"episode references unknown puzzle {r.puzzle_id!r}")

    solved = [r for r in counted if r.status == "solved"]
    completed = [r for r in counted if r.status in ("solved", "failed_rules")]

    per_difficulty: dict[int, float] = {}
    by_level: dict[int, list[EpisodeRecord]] = {}
    for r in counted:
        score = puzzles[r.puzzle_id].difficulty_score
        if score is None:
            continue
        by_level.setdefault(difficulty_level(score), []).append(r)
    for level, group in by_level.items():
        per_difficulty[level] = _pct(
            sum(1 for r in group if r.status == "solved"), len(group))

    per_rule: dict[str, float] = {}
    by_rule: dict[str, list[EpisodeRecord]] = {}
    for r in counted:
        for rule in puzzle_rule_types(puzzles[r.puzzle_id]):
            by_rule.setdefault(rule, []).append(r)
    for rule, group in by_rule.items():
        per_rule[rule] = _pct(sum(1 for r in group if r.status == "solved"), len(group))

    ratios = sorted(
        r.total_actions / r.forward_edges
        for r in counted if r.forward_edges > 0
    )
    if ratios:
        median = statistics.median(ratios)
        if len(ratios) >= 2:
            q = statistics.quantiles(ratios, n=4, method="inclusive")
            q1, q3 = q[0], q[2]
        else:
            q1 = q3 = ratios[0]
        ratio_summary = {"median": median, "q1": q1, "q3": q3, "iqr": q3 - q1}
    else:
        ratio_summary = {"median": 0.0, "q1": 0.0, "q3": 0.0, "iqr": 0.0}

    return MetricsReport(
        accuracy=_pct(len(solved), len(counted)),
        completion_rate=_pct(len(completed), len(counted)),
        avg_steps=(sum(r.total_actions for r in counted) / len(counted)) if counted else 0.0,
        per_difficulty=per_difficulty,
        per_rule=per_rule,
        backtracking_ratio=ratio_summary,
        n_episodes=len(counted),
        n_aborted=n_aborted,
        n_abandoned=n_abandoned,
    )
