"""Best-effort conversion of upstream puzzle records into the canonical
schema.

The upstream records (as found in public dumps of the source dataset)
carry a token grid under "puzzle_array" or "grid", shape definitions as
a JSON-string or object under "polyshapes", and assorted metadata.
Unknown fields are ignored; shape arrays are trimmed to the canonical
tight bounding box.
"""

from __future__ import annotations

import json
from typing import Any

from .errors import SchemaError
from .grid import Polyshape, Puzzle, puzzle_from_tokens


def convert_record(record: dict[str, Any], fallback_id: str = "") -> Puzzle:
    rows = record.get("puzzle_array") or record.get("grid")
    if not isinstance(rows, list) or not rows or not isinstance(rows[0], list):
        raise SchemaError("record has no token grid under puzzle_array/grid")

    raw_shapes = record.get("polyshapes") or {}
    if isinstance(raw_shapes, str):
        raw_shapes = json.loads(raw_shapes) if raw_shapes.strip() else {}
    shapes = {}
    for key, value in raw_shapes.items():
        shapes[int(key)] = Polyshape.from_rows(value)

    puzzle_id = str(
        record.get("puzzle_id") or record.get("id") or fallback_id or "imported"
    )
    score = record.get("difficulty_score")
    if score is None:
        # some dumps carry only the integer level; use it as a score,
        # which round-trips to the same level under the ceiling rule
        level = record.get("difficulty")
        score = float(level) if isinstance(level, (int, float)) else None

    return puzzle_from_tokens(
        [[str(tok) for tok in row] for row in rows],
        shapes=shapes,
        puzzle_id=puzzle_id,
        difficulty_score=float(score) if score is not None else None,
    )


def iter_records(text: str):
    """Yield dict records from a JSON array, a single object, or JSONL."""
    stripped = text.strip()
    if not stripped:
        return
    if stripped[0] in "[{":
        try:
            data = json.loads(stripped)
            if isinstance(data, list):
                yield from (d for d in data if isinstance(d, dict))
                return
            if isinstance(data, dict):
                yield data
                return
        except json.JSONDecodeError:
            pass
    for line in stripped.splitlines():
        line = line.strip()
        if line:
            yield json.loads(line)
