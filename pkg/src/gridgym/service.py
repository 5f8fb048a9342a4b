"""Network-facing session API for remote agents and the browser UI.

Routes (JSON bodies):
    POST /sessions                      create an episode
    GET  /sessions/{id}                 current snapshot
    POST /sessions/{id}/actions         apply one action
    GET  /sessions/{id}/events          server-push (SSE) snapshot stream
    GET  /puzzles                       catalog listing
    GET  /puzzles/{id}                  full canonical puzzle document

Every event is additionally appended to the episode log so sessions can
be replayed and verified offline.
"""

from __future__ import annotations

import asyncio
import json
import os
import random
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path as FilePath

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from . import env as gymenv
from .errors import GridGymError, IllegalAction
from .generator import GenConfig, difficulty_level, generate_puzzle
from .grid import Puzzle, overlay_tokens, parse_puzzle, serialize_puzzle
from .logstore import EpisodeLog
from .paths import Action, Mode, is_backtrack_move, mode_from_name, serialize_path
from .search import SearchBudget

DEFAULT_IDLE_TTL = 30 * 60.0  # seconds


class ServiceError(Exception):
    def __init__(self, status_code: int, code: str, message: str, **extra):
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.extra = extra

    def response(self) -> JSONResponse:
        body = {"error": dict({"code": self.code, "message": str(self)}, **self.extra)}
        return JSONResponse(status_code=self.status_code, content=body)


class PuzzleCatalog:
    """Puzzles by id, loaded from a directory of canonical documents."""

    def __init__(self, puzzles: dict[str, Puzzle] | None = None):
        self.puzzles: dict[str, Puzzle] = dict(puzzles or {})

    @staticmethod
    def from_dir(path: FilePath | str) -> "PuzzleCatalog":
        catalog = PuzzleCatalog()
        for file in sorted(FilePath(path).glob("*.puz")):
            puzzle = parse_puzzle(file.read_text())
            catalog.puzzles[puzzle.puzzle_id] = puzzle
        return catalog

    def get(self, puzzle_id: str) -> Puzzle | None:
        return self.puzzles.get(puzzle_id)

    def at_level(self, level: int) -> list[Puzzle]:
        return [p for p in self.puzzles.values()
                if p.difficulty_score is not None
                and difficulty_level(p.difficulty_score) == level]

    def add(self, puzzle: Puzzle) -> None:
        self.puzzles[puzzle.puzzle_id] = puzzle

    def listing(self) -> list[dict]:
        out = []
        for p in sorted(self.puzzles.values(), key=lambda q: q.puzzle_id):
            out.append({
                "puzzle_id": p.puzzle_id,
                "cell_cols": p.cell_cols,
                "cell_rows": p.cell_rows,
                "difficulty_score": p.difficulty_score,
                "level": difficulty_level(p.difficulty_score) if p.difficulty_score else None,
            })
        return out


@dataclass
class SessionRuntime:
    session_id: str
    state: gymenv.EnvState
    observation: gymenv.Observation
    owner: str
    created_at: float
    last_active: float
    idle_ttl: float
    expired: bool = False
    lock: threading.Lock = field(default_factory=threading.Lock)
    subscribers: list[asyncio.Queue] = field(default_factory=list)


def snapshot_of(runtime: SessionRuntime) -> dict:
    state, obs = runtime.state, runtime.observation
    return {
        "session_id": runtime.session_id,
        "puzzle_id": state.puzzle.puzzle_id,
        "mode": "backtrack" if state.mode is Mode.BACKTRACK else "no_backtrack",
        "status": state.status.value,
        "step": obs.step,
        "step_count": state.step_count,
        "position": [obs.position.x, obs.position.y],
        "legal": [int(a) for a in obs.legal],
        "grid": overlay_tokens(state.puzzle, state.path),
        "path": serialize_path(state.path),
        "observation_text": obs.text,
    }


def create_app(catalog: PuzzleCatalog, log_dir: FilePath | str,
               idle_ttl: float = DEFAULT_IDLE_TTL,
               allow_generate: bool = True,
               generate_seed: int | str = "service",
               process_budget: SearchBudget | None = None,
               auth_token: str | None = None) -> FastAPI:
    app = FastAPI(title="gridgym session service")
    log = EpisodeLog(log_dir)
    sessions: dict[str, SessionRuntime] = {}
    sessions_lock = threading.Lock()
    rng = random.Random(str(generate_seed))
    gen_counter = {"n": 0}
    budget = process_budget or SearchBudget(max_solutions=51, max_nodes=2_000_000,
                                            max_time=10.0)
    token = auth_token if auth_token is not None else os.environ.get(
        "GRIDGYM_SERVICE_TOKEN", "")

    app.state.catalog = catalog
    app.state.log = log

    @app.exception_handler(ServiceError)
    async def _service_error(request: Request, exc: ServiceError):
        return exc.response()

    @app.middleware("http")
    async def _shared_token(request: Request, call_next):
        if token and request.headers.get("Authorization") != f"Bearer {token}":
            return JSONResponse(status_code=401, content={
                "error": {"code": "unauthorized",
                          "message": "missing or wrong bearer token"}})
        return await call_next(request)

    def _get_session(session_id: str) -> SessionRuntime:
        with sessions_lock:
            runtime = sessions.get(session_id)
        if runtime is None:
            raise ServiceError(404, "not_found", f"unknown session {session_id!r}")
        if not runtime.expired and time.monotonic() - runtime.last_active > runtime.idle_ttl:
            runtime.expired = True
            log.append(runtime.session_id, runtime.state.puzzle.puzzle_id,
                       "abandoned", {"reason": "idle_ttl"})
        if runtime.expired:
            raise ServiceError(410, "session_expired", "session expired from inactivity")
        return runtime

    def _pick_puzzle(body: dict) -> Puzzle:
        puzzle_id = body.get("puzzle_id")
        if puzzle_id is not None:
            puzzle = catalog.get(puzzle_id)
            if puzzle is None:
                raise ServiceError(404, "not_found", f"unknown puzzle {puzzle_id!r}")
            return puzzle
        level = body.get("difficulty_level")
        if level is None:
            raise ServiceError(400, "bad_request",
                               "request needs puzzle_id or difficulty_level")
        if not isinstance(level, int) or not 1 <= level <= 5:
            raise ServiceError(404, "unavailable",
                               f"no puzzle at difficulty level {level!r}")
        pool = catalog.at_level(level)
        if pool:
            return rng.choice(sorted(pool, key=lambda p: p.puzzle_id))
        if allow_generate:
            for _ in range(20):
                gen_counter["n"] += 1
                config = GenConfig(seed=f"{generate_seed}:{gen_counter['n']}")
                try:
                    puzzle, _ = generate_puzzle(config)
                except GridGymError:
                    continue
                catalog.add(puzzle)
                if difficulty_level(puzzle.difficulty_score or 1.0) == level:
                    return puzzle
        raise ServiceError(404, "unavailable", f"no puzzle at difficulty level {level}")

    def _push(runtime: SessionRuntime, event: dict) -> None:
        for queue in list(runtime.subscribers):
            try:
                queue.put_nowait(event)
            except asyncio.QueueFull:
                pass

    @app.get("/puzzles")
    async def list_puzzles():
        return catalog.listing()

    @app.get("/puzzles/{puzzle_id}")
    async def get_puzzle(puzzle_id: str):
        puzzle = catalog.get(puzzle_id)
        if puzzle is None:
            raise ServiceError(404, "not_found", f"unknown puzzle {puzzle_id!r}")
        return json.loads(serialize_puzzle(puzzle))

    @app.post("/sessions")
    async def create_session(body: dict):
        puzzle = _pick_puzzle(body)
        try:
            mode = mode_from_name(body.get("mode", "no_backtrack"))
        except ValueError as exc:
            raise ServiceError(400, "bad_request", str(exc))
        process_rewards = bool(body.get("process_rewards", False))
        step_limit = int(body.get("step_limit", 100))
        config = gymenv.EnvConfig(step_limit=step_limit,
                                  process_rewards=process_rewards,
                                  solution_budget=budget)
        try:
            state, obs = gymenv.reset(puzzle, mode, config)
        except GridGymError as exc:
            raise ServiceError(409, "unsolvable", str(exc))
        runtime = SessionRuntime(
            session_id=uuid.uuid4().hex,
            state=state,
            observation=obs,
            owner=body.get("owner", "agent"),
            created_at=time.monotonic(),
            last_active=time.monotonic(),
            idle_ttl=float(body.get("idle_ttl", idle_ttl)),
        )
        with sessions_lock:
            sessions[runtime.session_id] = runtime
        log.append(runtime.session_id, puzzle.puzzle_id, "reset", {
            "mode": body.get("mode", "no_backtrack"),
            "owner": runtime.owner,
            "process_rewards": process_rewards,
            "step_limit": step_limit,
            "observation": obs.text,
        })
        return {
            "session_id": runtime.session_id,
            "state_snapshot": snapshot_of(runtime),
            "observation_text": obs.text,
        }

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        runtime = _get_session(session_id)
        return {"state_snapshot": snapshot_of(runtime)}

    @app.post("/sessions/{session_id}/actions")
    async def apply_action(session_id: str, body: dict):
        runtime = _get_session(session_id)
        try:
            action = Action(int(body["action"]))
        except (KeyError, ValueError) as exc:
            raise ServiceError(400, "bad_request", f"bad action: {exc}")
        with runtime.lock:
            state = runtime.state
            if state.status is not gymenv.Status.RUNNING:
                raise ServiceError(409, "episode_over",
                                   f"episode already {state.status.value}")
            pre_obs = runtime.observation
            was_backtrack = is_backtrack_move(state.path, action)
            try:
                state, obs, reward, terminated = gymenv.step(state, action)
            except IllegalAction as exc:
                raise ServiceError(409, "illegal_action", str(exc), legal=exc.legal)
            runtime.state = state
            runtime.observation = obs
            runtime.last_active = time.monotonic()
            verdict = state.verdict.to_dict() if state.verdict else None
            log.append(session_id, state.puzzle.puzzle_id, "action", {
                "action": int(action),
                "observation": pre_obs.text,
                "reward": reward.total,
                "outcome": reward.outcome,
                "process": reward.process,
                "is_backtrack": was_backtrack,
            })
            if terminated:
                log.append(session_id, state.puzzle.puzzle_id, "terminal", {
                    "status": state.status.value,
                    "verdict": verdict,
                    "total_actions": state.step_count,
                    "forward_edges": state.forward_edges,
                })
        payload = {
            "state_snapshot": snapshot_of(runtime),
            "reward": {"outcome": reward.outcome, "process": reward.process,
                       "total": reward.total},
            "terminated": terminated,
            "verdict": verdict if terminated else None,
        }
        _push(runtime, dict(payload, type="snapshot"))
        return payload

    @app.get("/sessions/{session_id}/events")
    async def session_events(session_id: str, request: Request):
        runtime = _get_session(session_id)
        queue: asyncio.Queue = asyncio.Queue(maxsize=256)
        runtime.subscribers.append(queue)
        queue.put_nowait({"type": "snapshot", "state_snapshot": snapshot_of(runtime),
                          "terminated": runtime.state.status is not gymenv.Status.RUNNING})

        async def stream():
            try:
                while True:
                    if await request.is_disconnected():
                        break
                    try:
                        event = await asyncio.wait_for(queue.get(), timeout=1.0)
                    except asyncio.TimeoutError:
                        yield ": keepalive\n\n"
                        continue
                    yield f"data: {json.dumps(event)}\n\n"
                    if event.get("terminated"):
                        break
            finally:
                if queue in runtime.subscribers:
                    runtime.subscribers.remove(queue)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app
