"""Record real service responses into the test fixture file.

Run from the repo root with the engine installed:
    python3 frontend/scripts/record_fixtures.py
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from gridgym.fixtures import sample_puzzles
from gridgym.service import PuzzleCatalog, create_app

GOLDEN_DIGITS = [3, 3, 3, 0, 0]
OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "golden_session.json"


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        app = create_app(PuzzleCatalog(sample_puzzles()), tmp, allow_generate=False)
        with TestClient(app) as client:
            puzzles = client.get("/puzzles").json()
            created = client.post("/sessions", json={
                "puzzle_id": "four-stars-2x2", "mode": "no_backtrack",
            }).json()
            sid = created["session_id"]
            actions = []
            for digit in GOLDEN_DIGITS:
                actions.append({
                    "action": digit,
                    "response": client.post(f"/sessions/{sid}/actions",
                                            json={"action": digit}).json(),
                })
            illegal = client.post(f"/sessions/{sid}/actions", json={"action": 1})

            backtrack = client.post("/sessions", json={
                "puzzle_id": "four-stars-2x2", "mode": "backtrack",
            }).json()
            backtrack_step = client.post(
                f"/sessions/{backtrack['session_id']}/actions",
                json={"action": 3}).json()

            # a route that reaches the end but strands both black stars
            failing = client.post("/sessions", json={
                "puzzle_id": "four-stars-2x2", "mode": "no_backtrack",
            }).json()
            failed_actions = []
            for digit in (3, 0, 0, 3, 3):
                failed_actions.append({
                    "action": digit,
                    "response": client.post(
                        f"/sessions/{failing['session_id']}/actions",
                        json={"action": digit}).json(),
                })
            assert failed_actions[-1]["response"]["state_snapshot"]["status"] == "failed_rules"
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({
        "puzzles": puzzles,
        "create": created,
        "actions": actions,
        "episode_over": {"status_code": illegal.status_code, "body": illegal.json()},
        "create_backtrack": backtrack,
        "backtrack_step": backtrack_step,
        "create_failing": failing,
        "failed_actions": failed_actions,
    }, indent=2) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
