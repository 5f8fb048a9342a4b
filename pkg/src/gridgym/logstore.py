"""Append-only episode log: newline-delimited JSON plus a manifest.

One line per event.  Entries carry a per-session dense sequence number
and a rolling sha256 chain so replay can detect reordering, tampering or
truncation mid-entry.  Events: reset, action, terminal, abandoned.

Entry shape (LOG_SCHEMA_VERSION 1):
    {"v": 1, "seq": n, "ts": iso8601, "session_id": ..., "puzzle_id": ...,
     "event": ..., "payload": {...}, "check": hex}
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import threading
from pathlib import Path as FilePath

from . import env as gymenv
from .errors import CorruptLog
from .grid import Puzzle
from .harness import EpisodeRecord, StepRecord
from .paths import Action, mode_from_name

LOG_SCHEMA_VERSION = 1
_GENESIS = "0" * 16


def _chain(prev: str, body: dict) -> str:
    blob = prev + json.dumps(body, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


class EpisodeLog:
    """Writer: one ndjson file per day under root, plus manifest.json."""

    def __init__(self, root: FilePath | str):
        self.root = FilePath(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._seq: dict[str, int] = {}
        self._check: dict[str, str] = {}

    def _day_file(self) -> FilePath:
        day = _dt.datetime.now(_dt.timezone.utc).strftime("%Y%m%d")
        return self.root / f"episodes-{day}.ndjson"

    def append(self, session_id: str, puzzle_id: str, event: str, payload: dict) -> dict:
        with self._lock:
            seq = self._seq.get(session_id, 0)
            body = {
                "v": LOG_SCHEMA_VERSION,
                "seq": seq,
                "ts": _dt.datetime.now(_dt.timezone.utc).isoformat(),
                "session_id": session_id,
                "puzzle_id": puzzle_id,
                "event": event,
                "payload": payload,
            }
            check = _chain(self._check.get(session_id, _GENESIS), body)
            entry = dict(body, check=check)
            path = self._day_file()
            with open(path, "a") as fh:
                fh.write(json.dumps(entry) + "\n")
            self._seq[session_id] = seq + 1
            self._check[session_id] = check
            self._update_manifest(path)
            return entry

    def _update_manifest(self, day_path: FilePath) -> None:
        manifest_path = self.root / "manifest.json"
        manifest = {"version": LOG_SCHEMA_VERSION, "files": []}
        if manifest_path.exists():
            manifest = json.loads(manifest_path.read_text())
        if day_path.name not in manifest["files"]:
            manifest["files"].append(day_path.name)
            manifest["files"].sort()
            manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")

    def read_entries(self) -> list[dict]:
        entries = []
        for path in sorted(self.root.glob("episodes-*.ndjson")):
            with open(path) as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        entries.append(json.loads(line))
        return entries


def session_entries(entries: list[dict], session_id: str) -> list[dict]:
    return [e for e in entries if e.get("session_id") == session_id]


def validate_chain(entries: list[dict]) -> None:
    """Entries for one session: dense seq from 0, intact hash chain,
    terminal (if any) last."""
    prev_check = _GENESIS
    for k, entry in enumerate(entries):
        if entry.get("seq") != k:
            raise CorruptLog(f"sequence break at index {k}: got seq {entry.get('seq')}")
        body = {key: entry[key] for key in
                ("v", "seq", "ts", "session_id", "puzzle_id", "event", "payload")}
        expected = _chain(prev_check, body)
        if entry.get("check") != expected:
            raise CorruptLog(f"checksum mismatch at seq {k}")
        prev_check = entry["check"]
    for k, entry in enumerate(entries):
        if entry["event"] == "terminal" and k != len(entries) - 1:
            raise CorruptLog("events recorded after the terminal entry")


def persist_and_replay(entries: list[dict], puzzles: dict[str, Puzzle]) -> EpisodeRecord:
    """Rebuild an EpisodeRecord from one session's entries and verify it
    by replaying every action through a fresh environment; every logged
    observation must be reproduced byte-for-byte."""
    if not entries:
        raise CorruptLog("empty session trace")
    validate_chain(entries)
    first = entries[0]
    if first["event"] != "reset":
        raise CorruptLog("first entry is not a reset")
    puzzle = puzzles.get(first["puzzle_id"])
    if puzzle is None:
        raise CorruptLog(f"unknown puzzle {first['puzzle_id']!r} in log")
    mode = mode_from_name(first["payload"]["mode"])
    config = gymenv.EnvConfig(step_limit=first["payload"].get("step_limit", 100))
    state, obs = gymenv.reset(puzzle, mode, config)
    if first["payload"].get("observation") not in (None, obs.text):
        raise CorruptLog("reset observation does not replay")

    steps: list[StepRecord] = []
    status = "running"
    incomplete = True
    for entry in entries[1:]:
        if entry["event"] == "action":
            payload = entry["payload"]
            logged_obs = payload.get("observation")
            if logged_obs is not None and logged_obs != obs.text:
                raise CorruptLog(f"observation mismatch before seq {entry['seq']}")
            action = Action(payload["action"])
            pre_text = obs.text
            try:
                state, obs, reward, _ = gymenv.step(state, action)
            except Exception as exc:
                raise CorruptLog(f"logged action does not replay: {exc}") from exc
            steps.append(StepRecord(
                observation_text=pre_text,
                raw_response=payload.get("raw_response") or "",
                parsed_action=int(action),
                reward=payload.get("reward", reward.total),
                is_backtrack=payload.get("is_backtrack", False),
            ))
        elif entry["event"] == "terminal":
            status = entry["payload"]["status"]
            if status != state.status.value:
                raise CorruptLog(
                    f"terminal status {status!r} does not replay "
                    f"(environment says {state.status.value!r})")
            incomplete = False
        elif entry["event"] in ("abandoned",):
            status = "abandoned"
            incomplete = False

    if incomplete:
        status = state.status.value
    return EpisodeRecord(
        puzzle_id=puzzle.puzzle_id,
        mode=first["payload"]["mode"],
        agent=first["payload"].get("owner", "human"),
        steps=steps,
        status=status,
        total_actions=state.step_count,
        forward_edges=state.forward_edges,
        wall_time=0.0,
        outcome_reward=1.0 if status == "solved" else
        (-1.0 if status in ("failed_rules", "deadlock", "step_limit") else 0.0),
        failure_reason="incomplete" if incomplete else None,
    )
