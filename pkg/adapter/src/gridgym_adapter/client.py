from __future__ import annotations

import random
from dataclasses import dataclass

import httpx


class ServiceUnavailable(Exception):
    """Transport failure talking to the service; retry guidance in args."""


class IllegalActionError(Exception):
    def __init__(self, message: str, legal: list[int]):
        super().__init__(message)
        self.legal = legal


class EpisodeFinished(Exception):
    """step() after the episode already terminated."""


@dataclass(frozen=True)
class AdapterConfig:
    base_url: str
    puzzle_id: str | None = None
    difficulty_level: int | None = None  # None + no id = random catalog pick
    mode: str = "no_backtrack"
    step_limit: int = 100
    process_rewards: bool = False
    seed: int | str = 0  # drives the random catalog pick only
    timeout: float = 30.0


class RemoteGridEnv:
    """One adapter instance drives one episode at a time."""

    def __init__(self, config: AdapterConfig):
        self.config = config
        self._client = httpx.Client(base_url=config.base_url, timeout=config.timeout)
        self._rng = random.Random(str(config.seed))
        self._session_id: str | None = None
        self._terminal = False

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "RemoteGridEnv":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _post(self, path: str, body: dict) -> httpx.Response:
        try:
            return self._client.post(path, json=body)
        except httpx.HTTPError as exc:
            raise ServiceUnavailable(
                f"service at {self.config.base_url} unreachable ({exc}); "
                "check the base_url and that `gridgym serve` is running") from exc

    def _pick_puzzle(self) -> dict:
        if self.config.puzzle_id is not None:
            return {"puzzle_id": self.config.puzzle_id}
        if self.config.difficulty_level is not None:
            return {"difficulty_level": self.config.difficulty_level}
        try:
            listing = self._client.get("/puzzles").json()
        except httpx.HTTPError as exc:
            raise ServiceUnavailable(str(exc)) from exc
        if not listing:
            raise ServiceUnavailable("service has an empty puzzle catalog")
        return {"puzzle_id": self._rng.choice(sorted(p["puzzle_id"] for p in listing))}

    @staticmethod
    def _info_from(snapshot: dict) -> dict:
        return {
            "legal_actions": snapshot["legal"],
            "position": tuple(snapshot["position"]),
            "puzzle_id": snapshot["puzzle_id"],
            "step": snapshot["step_count"],
            "status": snapshot["status"],
            "path": snapshot["path"],
        }

    def reset(self) -> tuple[str, dict]:
        body = dict(self._pick_puzzle(), mode=self.config.mode,
                    step_limit=self.config.step_limit,
                    process_rewards=self.config.process_rewards,
                    owner="agent")
        response = self._post("/sessions", body)
        if response.status_code != 200:
            error = response.json().get("error", {})
            raise ServiceUnavailable(
                f"create session failed: {error.get('code')}: {error.get('message')}")
        data = response.json()
        self._session_id = data["session_id"]
        self._terminal = False
        info = self._info_from(data["state_snapshot"])
        if self.config.difficulty_level is not None:
            info["difficulty_level"] = self.config.difficulty_level
        else:
            info["difficulty_level"] = self._level_of(info["puzzle_id"])
        return data["observation_text"], info

    def _level_of(self, puzzle_id: str) -> int | None:
        try:
            doc = self._client.get(f"/puzzles/{puzzle_id}").json()
        except httpx.HTTPError:
            return None
        score = doc.get("difficulty_score")
        if score is None:
            return None
        import math

        return max(1, min(5, math.ceil(score)))

    def step(self, action: int) -> tuple[str, float, bool, bool, dict]:
        if self._session_id is None:
            raise EpisodeFinished("call reset() before step()")
        if self._terminal:
            raise EpisodeFinished("episode already terminated; call reset()")
        response = self._post(f"/sessions/{self._session_id}/actions",
                              {"action": int(action)})
        if response.status_code != 200:
            error = response.json().get("error", {})
            code = error.get("code")
            if code == "illegal_action":
                raise IllegalActionError(error.get("message", "illegal action"),
                                         legal=error.get("legal", []))
            if code in ("episode_over", "session_expired"):
                self._terminal = True
                raise EpisodeFinished(error.get("message", code))
            raise ServiceUnavailable(f"{code}: {error.get('message')}")
        data = response.json()
        snapshot = data["state_snapshot"]
        reward = float(data["reward"]["total"])
        status = snapshot["status"]
        truncated = status == "step_limit"
        terminated = status in ("solved", "failed_rules", "deadlock")
        self._terminal = terminated or truncated
        info = self._info_from(snapshot)
        info["reward_breakdown"] = data["reward"]
        if data.get("verdict") is not None:
            info["verdict"] = data["verdict"]
        return snapshot["observation_text"], reward, terminated, truncated, info
