"""Symbol-grid data model: positions, symbols, polyshapes, puzzles.

A puzzle with C cell columns and R cell rows is stored as a
(2R+1) x (2C+1) token matrix.  Position (x, y) has x growing rightward
and y downward from the top-left corner (0, 0).  Parity decides what a
position is:

    Node  - x even, y even      (path may occupy)
    Edge  - exactly one odd     (path may occupy)
    Cell  - x odd, y odd        (rule symbols live here, never the path)

Grid tokens follow the fixed legend: 'S', 'E', '+', '.', 'G' on path
positions; 'N', 'o-X', '*-X', 'A-X'..'D-X', 'P-X-ID', 'Y-X-ID' on cells,
where X is a one-letter color code and ID an opaque polyshape key.

The canonical on-disk document is JSON with schema_version 1 and fields
{puzzle_id, cell_cols, cell_rows, start, end, grid, shapes,
difficulty_score}; see parse_puzzle / serialize_puzzle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping, NamedTuple

from .errors import (
    EndpointError,
    GridShapeError,
    MissingShapeError,
    SchemaError,
    SymbolPlacementError,
)

SCHEMA_VERSION = 1


class Pos(NamedTuple):
    x: int
    y: int


class CellCoord(NamedTuple):
    """Rule-cell lattice coordinate; cell (i, j) sits at grid (2i+1, 2j+1)."""

    i: int
    j: int

    def to_grid(self) -> Pos:
        return Pos(2 * self.i + 1, 2 * self.j + 1)


class ParityClass(Enum):
    NODE = "node"
    EDGE = "edge"
    CELL = "cell"


def classify_position(p: tuple[int, int]) -> ParityClass:
    x, y = p
    if x % 2 == 0 and y % 2 == 0:
        return ParityClass.NODE
    if x % 2 == 1 and y % 2 == 1:
        return ParityClass.CELL
    return ParityClass.EDGE


def is_path_class(p: tuple[int, int]) -> bool:
    """True iff the position has at least one even coordinate."""
    return p[0] % 2 == 0 or p[1] % 2 == 0


class Color(Enum):
    R = "R"
    B = "B"
    G = "G"
    Y = "Y"
    W = "W"
    O = "O"
    P = "P"
    K = "K"


# --- symbols -----------------------------------------------------------------

@dataclass(frozen=True)
class Symbol:
    pass


@dataclass(frozen=True)
class Open(Symbol):
    pass


@dataclass(frozen=True)
class Dot(Symbol):
    pass


@dataclass(frozen=True)
class Gap(Symbol):
    pass


@dataclass(frozen=True)
class Start(Symbol):
    pass


@dataclass(frozen=True)
class End(Symbol):
    pass


@dataclass(frozen=True)
class EmptyCell(Symbol):
    pass


@dataclass(frozen=True)
class Square(Symbol):
    color: Color


@dataclass(frozen=True)
class Star(Symbol):
    color: Color


@dataclass(frozen=True)
class Triangle(Symbol):
    count: int  # 1..4
    color: Color


@dataclass(frozen=True)
class Poly(Symbol):
    color: Color
    shape_id: int


@dataclass(frozen=True)
class Ylop(Symbol):
    color: Color
    shape_id: int


PATH_SYMBOLS = (Open, Dot, Gap, Start, End)
CELL_SYMBOLS = (EmptyCell, Square, Star, Triangle, Poly, Ylop)
COLORED_SYMBOLS = (Square, Star, Triangle, Poly, Ylop)

_TRIANGLE_TOKENS = "ABCD"  # A=1 edge .. D=4 edges


def symbol_to_token(sym: Symbol) -> str:
    if isinstance(sym, Open):
        return "+"
    if isinstance(sym, Dot):
        return "."
    if isinstance(sym, Gap):
        return "G"
    if isinstance(sym, Start):
        return "S"
    if isinstance(sym, End):
        return "E"
    if isinstance(sym, EmptyCell):
        return "N"
    if isinstance(sym, Square):
        return f"o-{sym.color.value}"
    if isinstance(sym, Star):
        return f"*-{sym.color.value}"
    if isinstance(sym, Triangle):
        return f"{_TRIANGLE_TOKENS[sym.count - 1]}-{sym.color.value}"
    if isinstance(sym, Poly):
        return f"P-{sym.color.value}-{sym.shape_id}"
    if isinstance(sym, Ylop):
        return f"Y-{sym.color.value}-{sym.shape_id}"
    raise TypeError(f"not a symbol: {sym!r}")


def token_to_symbol(token: str) -> Symbol:
    simple = {"+": Open(), ".": Dot(), "G": Gap(), "S": Start(), "E": End(), "N": EmptyCell()}
    if token in simple:
        return simple[token]
    parts = token.split("-")
    try:
        if len(parts) == 2:
            kind, color = parts
            c = Color(color)
            if kind == "o":
                return Square(c)
            if kind == "*":
                return Star(c)
            if kind in _TRIANGLE_TOKENS:
                return Triangle(_TRIANGLE_TOKENS.index(kind) + 1, c)
        elif len(parts) == 3:
            kind, color, shape = parts
            c = Color(color)
            if kind == "P":
                return Poly(c, int(shape))
            if kind == "Y":
                return Ylop(c, int(shape))
    except (ValueError, KeyError):
        pass
    raise SchemaError(f"unknown grid token {token!r}")


# --- polyshapes --------------------------------------------------------------

@dataclass(frozen=True)
class Polyshape:
    """Trimmed boolean occupancy grid; rows/cols of the tight bounding box.

    Construction trims empty border rows/columns, so two shapes compare
    equal exactly when their trimmed arrays are identical.  No rotation
    or mirror normalization is applied.
    """

    rows: tuple[tuple[bool, ...], ...]

    @staticmethod
    def from_rows(rows: list[list[int]] | tuple[tuple[bool, ...], ...]) -> "Polyshape":
        cells = [(c, r) for r, row in enumerate(rows) for c, v in enumerate(row) if v]
        if not cells:
            raise SchemaError("polyshape has no occupied cell")
        min_c = min(c for c, _ in cells)
        min_r = min(r for _, r in cells)
        max_c = max(c for c, _ in cells)
        max_r = max(r for _, r in cells)
        occupied = {(c - min_c, r - min_r) for c, r in cells}
        trimmed = tuple(
            tuple((c, r) in occupied for c in range(max_c - min_c + 1))
            for r in range(max_r - min_r + 1)
        )
        return Polyshape(trimmed)

    @property
    def area(self) -> int:
        return sum(v for row in self.rows for v in row)

    def offsets(self) -> tuple[tuple[int, int], ...]:
        """Occupied (col, row) offsets within the bounding box."""
        return tuple(
            (c, r) for r, row in enumerate(self.rows) for c, v in enumerate(row) if v
        )

    def to_lists(self) -> list[list[int]]:
        return [[int(v) for v in row] for row in self.rows]


# --- puzzle ------------------------------------------------------------------

@dataclass(frozen=True)
class Puzzle:
    cell_cols: int
    cell_rows: int
    grid: tuple[tuple[Symbol, ...], ...]  # grid[y][x]
    start: Pos
    end: Pos
    shapes: Mapping[int, Polyshape]
    puzzle_id: str = ""
    difficulty_score: float | None = None

    @property
    def width(self) -> int:
        return 2 * self.cell_cols + 1

    @property
    def height(self) -> int:
        return 2 * self.cell_rows + 1

    def in_bounds(self, p: tuple[int, int]) -> bool:
        return 0 <= p[0] < self.width and 0 <= p[1] < self.height

    def symbol_at(self, p: tuple[int, int]) -> Symbol:
        return self.grid[p[1]][p[0]]

    def cell_symbol(self, cell: CellCoord) -> Symbol:
        return self.grid[2 * cell.j + 1][2 * cell.i + 1]

    def cells(self) -> Iterator[CellCoord]:
        for j in range(self.cell_rows):
            for i in range(self.cell_cols):
                yield CellCoord(i, j)

    def path_positions(self) -> Iterator[Pos]:
        for y in range(self.height):
            for x in range(self.width):
                if x % 2 == 0 or y % 2 == 0:
                    yield Pos(x, y)

    def passable(self, p: tuple[int, int]) -> bool:
        """Path may occupy p: in bounds, path-class and not a gap."""
        return (
            self.in_bounds(p)
            and is_path_class(p)
            and not isinstance(self.symbol_at(p), Gap)
        )

    def on_border(self, p: tuple[int, int]) -> bool:
        return p[0] in (0, self.width - 1) or p[1] in (0, self.height - 1)


def _validate(puzzle: Puzzle) -> Puzzle:
    if puzzle.cell_cols < 1 or puzzle.cell_rows < 1:
        raise GridShapeError("cell_cols and cell_rows must be >= 1")
    if len(puzzle.grid) != puzzle.height or any(len(row) != puzzle.width for row in puzzle.grid):
        raise GridShapeError(
            f"grid must be {puzzle.height} rows x {puzzle.width} cols"
        )
    starts, ends = [], []
    for y in range(puzzle.height):
        for x in range(puzzle.width):
            sym = puzzle.grid[y][x]
            cls = classify_position((x, y))
            if cls is ParityClass.CELL:
                if not isinstance(sym, CELL_SYMBOLS):
                    raise SymbolPlacementError(
                        f"path symbol {symbol_to_token(sym)!r} on cell position ({x},{y})"
                    )
            else:
                if not isinstance(sym, PATH_SYMBOLS):
                    raise SymbolPlacementError(
                        f"cell symbol {symbol_to_token(sym)!r} on path position ({x},{y})"
                    )
            if isinstance(sym, Start):
                starts.append(Pos(x, y))
            elif isinstance(sym, End):
                ends.append(Pos(x, y))
            elif isinstance(sym, (Poly, Ylop)) and sym.shape_id not in puzzle.shapes:
                raise MissingShapeError(f"shape id {sym.shape_id} not in catalog")
    if len(starts) != 1 or len(ends) != 1:
        raise EndpointError(f"need exactly one S and one E, got {len(starts)}/{len(ends)}")
    if starts[0] != puzzle.start or ends[0] != puzzle.end:
        raise EndpointError("start/end fields disagree with S/E grid tokens")
    for p, name in ((puzzle.start, "start"), (puzzle.end, "end")):
        if not puzzle.on_border(p):
            raise EndpointError(f"{name} {tuple(p)} not on the grid border")
    return puzzle


def puzzle_from_tokens(
    token_rows: list[list[str]],
    shapes: Mapping[int, Polyshape] | None = None,
    puzzle_id: str = "",
    difficulty_score: float | None = None,
) -> Puzzle:
    """Build and validate a Puzzle from legend tokens (start/end inferred)."""
    if not token_rows or len(token_rows) % 2 == 0 or len(token_rows[0]) % 2 == 0:
        raise GridShapeError("token grid must be (2R+1) x (2C+1)")
    grid = tuple(tuple(token_to_symbol(t) for t in row) for row in token_rows)
    start = end = None
    for y, row in enumerate(grid):
        for x, sym in enumerate(row):
            if isinstance(sym, Start):
                if start is not None:
                    raise EndpointError("multiple S tokens")
                start = Pos(x, y)
            elif isinstance(sym, End):
                if end is not None:
                    raise EndpointError("multiple E tokens")
                end = Pos(x, y)
    if start is None or end is None:
        raise EndpointError("missing S or E token")
    return _validate(
        Puzzle(
            cell_cols=(len(token_rows[0]) - 1) // 2,
            cell_rows=(len(token_rows) - 1) // 2,
            grid=grid,
            start=start,
            end=end,
            shapes=dict(shapes or {}),
            puzzle_id=puzzle_id,
            difficulty_score=difficulty_score,
        )
    )


def base_tokens(puzzle: Puzzle) -> list[list[str]]:
    return [[symbol_to_token(s) for s in row] for row in puzzle.grid]


# --- canonical document ------------------------------------------------------

_REQUIRED_FIELDS = ("schema_version", "puzzle_id", "cell_cols", "cell_rows",
                    "start", "end", "grid", "shapes")


def parse_puzzle(document: str) -> Puzzle:
    """Parse the canonical JSON puzzle document."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("document root must be an object")
    for field in _REQUIRED_FIELDS:
        if field not in data:
            raise SchemaError(f"missing field {field!r}")
    if data["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {data['schema_version']!r}")
    if not isinstance(data["grid"], list) or not all(isinstance(r, list) for r in data["grid"]):
        raise SchemaError("grid must be an array of token rows")
    try:
        shapes = {int(k): Polyshape.from_rows(v) for k, v in data["shapes"].items()}
    except (AttributeError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad shapes table: {exc}") from exc
    cell_cols, cell_rows = data["cell_cols"], data["cell_rows"]
    if not (isinstance(cell_cols, int) and isinstance(cell_rows, int)):
        raise SchemaError("cell_cols/cell_rows must be integers")
    rows = data["grid"]
    if len(rows) != 2 * cell_rows + 1 or any(len(r) != 2 * cell_cols + 1 for r in rows):
        raise GridShapeError(
            f"grid must be {2 * cell_rows + 1} rows x {2 * cell_cols + 1} cols"
        )
    grid = tuple(tuple(token_to_symbol(t) for t in row) for row in rows)
    score = data.get("difficulty_score")
    if score is not None and not isinstance(score, (int, float)):
        raise SchemaError("difficulty_score must be a number")
    puzzle = Puzzle(
        cell_cols=cell_cols,
        cell_rows=cell_rows,
        grid=grid,
        start=Pos(*data["start"]),
        end=Pos(*data["end"]),
        shapes=shapes,
        puzzle_id=str(data["puzzle_id"]),
        difficulty_score=float(score) if score is not None else None,
    )
    return _validate(puzzle)


def serialize_puzzle(puzzle: Puzzle) -> str:
    """Canonical JSON form; parse(serialize(p)) == p."""
    doc: dict = {
        "schema_version": SCHEMA_VERSION,
        "puzzle_id": puzzle.puzzle_id,
        "cell_cols": puzzle.cell_cols,
        "cell_rows": puzzle.cell_rows,
        "start": [puzzle.start.x, puzzle.start.y],
        "end": [puzzle.end.x, puzzle.end.y],
        "grid": base_tokens(puzzle),
        "shapes": {str(k): puzzle.shapes[k].to_lists() for k in sorted(puzzle.shapes)},
    }
    if puzzle.difficulty_score is not None:
        doc["difficulty_score"] = puzzle.difficulty_score
    return json.dumps(doc, indent=2) + "\n"


def overlay_tokens(puzzle: Puzzle, path: list[Pos] | tuple[Pos, ...] | None = None) -> list[list[str]]:
    """Token matrix with the path overlay: visited positions render 'V',
    the head renders 'L'; everything else keeps its base token (End
    stays 'E' until the head lands on it)."""
    tokens = base_tokens(puzzle)
    if path:
        for x, y in path[:-1]:
            tokens[y][x] = "V"
        hx, hy = path[-1]
        tokens[hy][hx] = "L"
    return tokens


def render_grid_tokens(puzzle: Puzzle, path: list[Pos] | tuple[Pos, ...] | None = None) -> list[str]:
    """Rows as quoted token lists, with the path overlay when given."""
    return ["[" + ", ".join(f"'{t}'" for t in row) + "]"
            for row in overlay_tokens(puzzle, path)]
