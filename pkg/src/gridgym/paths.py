"""Paths, moves, region decomposition and edge-touch counting.

A path is an ordered tuple of positions starting at the puzzle start;
consecutive positions differ by one in exactly one coordinate, every
position is path-class and non-gap, and no position repeats.  Moves are
the four cardinal actions with the fixed digit encoding 0=RIGHT, 1=UP,
2=LEFT, 3=DOWN.
"""

from __future__ import annotations

import re
from enum import IntEnum

from .errors import IllegalMove, PathFormatError
from .grid import CellCoord, Gap, Pos, Puzzle, is_path_class

Path = tuple[Pos, ...]


class Action(IntEnum):
    RIGHT = 0
    UP = 1
    LEFT = 2
    DOWN = 3

    @property
    def delta(self) -> tuple[int, int]:
        return _DELTAS[self]

    @property
    def letter(self) -> str:
        return self.name[0]  # R U L D


_DELTAS = {
    Action.RIGHT: (1, 0),
    Action.UP: (0, -1),
    Action.LEFT: (-1, 0),
    Action.DOWN: (0, 1),
}

_LETTERS = {a.letter: a for a in Action}


class Mode(IntEnum):
    NO_BACKTRACK = 0
    BACKTRACK = 1


MODE_NAMES = {Mode.NO_BACKTRACK: "no_backtrack", Mode.BACKTRACK: "backtrack"}


def mode_from_name(name: str) -> Mode:
    for mode, label in MODE_NAMES.items():
        if label == name:
            return mode
    raise ValueError(f"unknown mode {name!r}")


def target_of(path: Path, action: Action) -> Pos:
    dx, dy = action.delta
    head = path[-1]
    return Pos(head.x + dx, head.y + dy)


def legal_moves(puzzle: Puzzle, path: Path, mode: Mode) -> set[Action]:
    """Actions whose target is passable and either fresh or, in backtrack
    mode, the position immediately before the head."""
    out = set()
    occupied = set(path)
    prev = path[-2] if len(path) >= 2 else None
    for action in Action:
        tgt = target_of(path, action)
        if not puzzle.passable(tgt):
            continue
        if tgt not in occupied:
            out.add(action)
        elif mode is Mode.BACKTRACK and tgt == prev:
            out.add(action)
    return out


def apply_move(puzzle: Puzzle, path: Path, action: Action, mode: Mode) -> Path:
    """Extend the path, or pop the head when backtracking onto the
    predecessor; the freed position becomes reusable."""
    if action not in legal_moves(puzzle, path, mode):
        raise IllegalMove(f"{action.name} not legal from {tuple(path[-1])}")
    tgt = target_of(path, action)
    if mode is Mode.BACKTRACK and len(path) >= 2 and tgt == path[-2]:
        return path[:-1]
    return path + (tgt,)


def is_backtrack_move(path: Path, action: Action) -> bool:
    return len(path) >= 2 and target_of(path, action) == path[-2]


def validate_path(puzzle: Puzzle, path: Path) -> None:
    """Raise PathFormatError unless path satisfies every path invariant."""
    if not path:
        raise PathFormatError("empty path")
    if path[0] != puzzle.start:
        raise PathFormatError(f"path must begin at start {tuple(puzzle.start)}")
    seen = set()
    for k, p in enumerate(path):
        if not puzzle.in_bounds(p):
            raise PathFormatError(f"position {tuple(p)} out of bounds")
        if not is_path_class(p):
            raise PathFormatError(f"position {tuple(p)} is a rule cell")
        if isinstance(puzzle.symbol_at(p), Gap):
            raise PathFormatError(f"position {tuple(p)} is a gap")
        if p in seen:
            raise PathFormatError(f"position {tuple(p)} visited twice")
        seen.add(p)
        if k:
            dx, dy = p.x - path[k - 1].x, p.y - path[k - 1].y
            if abs(dx) + abs(dy) != 1:
                raise PathFormatError(f"non-adjacent step {tuple(path[k - 1])} -> {tuple(p)}")


# --- serialization -----------------------------------------------------------

_COORD_RE = re.compile(r"^\((\d+),(\d+)\)(?:->\((\d+),(\d+)\))*$")


def serialize_path(path: Path) -> str:
    return "->".join(f"({p.x},{p.y})" for p in path)


def parse_path(text: str, start: Pos | None = None) -> Path:
    """Parse "(x0,y0)->(x1,y1)->..." or a compact direction string like
    "DDRR" (requires start)."""
    text = text.strip()
    if _COORD_RE.match(text):
        pts = re.findall(r"\((\d+),(\d+)\)", text)
        return tuple(Pos(int(x), int(y)) for x, y in pts)
    if text and all(ch in _LETTERS for ch in text.upper()):
        if start is None:
            raise PathFormatError("direction string needs a start position")
        path = [start]
        for ch in text.upper():
            dx, dy = _LETTERS[ch].delta
            path.append(Pos(path[-1].x + dx, path[-1].y + dy))
        return tuple(path)
    raise PathFormatError(f"unparsable path {text!r}")


def path_directions(path: Path) -> str:
    """Compact direction form of a path; inverse of parse_path(d, start)."""
    out = []
    for a, b in zip(path, path[1:]):
        delta = (b.x - a.x, b.y - a.y)
        for action in Action:
            if action.delta == delta:
                out.append(action.letter)
                break
        else:
            raise PathFormatError(f"non-adjacent step {tuple(a)} -> {tuple(b)}")
    return "".join(out)


# --- regions -----------------------------------------------------------------

class RegionPartition:
    """Connected components of the cell lattice under path-blocked adjacency."""

    def __init__(self, region_of: dict[CellCoord, int]):
        self.region_of = region_of
        self.regions: dict[int, frozenset[CellCoord]] = {}
        buckets: dict[int, set[CellCoord]] = {}
        for cell, label in region_of.items():
            buckets.setdefault(label, set()).add(cell)
        self.regions = {label: frozenset(cells) for label, cells in buckets.items()}

    def region_cells(self, cell: CellCoord) -> frozenset[CellCoord]:
        return self.regions[self.region_of[cell]]


def compute_regions(puzzle: Puzzle, path: Path) -> RegionPartition:
    """Cells (i,j) and (i+1,j) stay adjacent unless the edge position
    (2i+2, 2j+1) is trodden; vertically, (2i+1, 2j+2).  The border always
    bounds.  Labels are assigned in row-major discovery order."""
    on_path = set(path)
    cols, rows = puzzle.cell_cols, puzzle.cell_rows
    region_of: dict[CellCoord, int] = {}
    label = 0
    for j0 in range(rows):
        for i0 in range(cols):
            seed = CellCoord(i0, j0)
            if seed in region_of:
                continue
            stack = [seed]
            region_of[seed] = label
            while stack:
                i, j = stack.pop()
                neighbors = (
                    (i + 1, j, (2 * i + 2, 2 * j + 1)),
                    (i - 1, j, (2 * i, 2 * j + 1)),
                    (i, j + 1, (2 * i + 1, 2 * j + 2)),
                    (i, j - 1, (2 * i + 1, 2 * j)),
                )
                for ni, nj, edge in neighbors:
                    if 0 <= ni < cols and 0 <= nj < rows and edge not in on_path:
                        nb = CellCoord(ni, nj)
                        if nb not in region_of:
                            region_of[nb] = label
                            stack.append(nb)
            label += 1
    return RegionPartition(region_of)


def cell_edge_positions(cell: CellCoord) -> tuple[Pos, Pos, Pos, Pos]:
    i, j = cell
    return (
        Pos(2 * i, 2 * j + 1),
        Pos(2 * i + 2, 2 * j + 1),
        Pos(2 * i + 1, 2 * j),
        Pos(2 * i + 1, 2 * j + 2),
    )


def edge_touch_count(puzzle: Puzzle, path: Path, cell: CellCoord) -> int:
    on_path = set(path)
    return sum(1 for e in cell_edge_positions(cell) if e in on_path)
