"""Random puzzle generation with the density-adjusting certification loop
and the difficulty estimator.

Every emitted puzzle is certified: the exhaustive solver completed and
found between 1 and `solution_cap` solutions.  Attempts that prove zero
solutions lower the rule density; attempts that overflow the cap (or
blow the search budget, which is treated the same way) raise it.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field, replace

from .errors import GenerationExhausted
from .grid import (
    Color,
    Dot,
    EmptyCell,
    End,
    Gap,
    Open,
    Poly,
    Polyshape,
    Pos,
    Puzzle,
    Square,
    Star,
    Start,
    Symbol,
    Triangle,
    Ylop,
    serialize_puzzle,
)
from .rules import (
    RULE_DOT,
    RULE_GAP,
    RULE_POLY,
    RULE_SQUARE,
    RULE_STAR,
    RULE_TRIANGLE,
    RULE_YLOP,
)
from .search import SearchBudget, SolutionSet, enumerate_solutions

# Frozen artifact constants for the 1..5 difficulty scale.  Ranges floor
# above the easiest boards so trivial puzzles normalize to exactly 1.0
# (otherwise no puzzle could ever be level 1); they are calibrated on a
# seeded 500-puzzle sample so all five levels occur.
DIFFICULTY_WEIGHTS = {
    "distinct_rule_types": 0.25,
    "rule_cells": 0.20,
    "rule_density": 0.15,
    "grid_size": 0.15,
    "interaction_estimate": 0.25,
}
FEATURE_RANGES = {
    "distinct_rule_types": (1.0, 5.0),
    "rule_cells": (2.0, 18.0),
    "rule_density": (0.25, 0.85),
    "grid_size": (4.0, 36.0),
    "interaction_estimate": (0.5, 8.0),
}

_CELL_RULES = (RULE_SQUARE, RULE_STAR, RULE_TRIANGLE, RULE_POLY, RULE_YLOP)
_PATH_RULES = (RULE_DOT, RULE_GAP)


@dataclass(frozen=True)
class GenConfig:
    cols_range: tuple[int, int] = (2, 6)
    rows_range: tuple[int, int] = (2, 6)
    initial_density: float = 0.5
    density_step: float = 0.05
    solution_cap: int = 50
    max_attempts: int = 400
    rule_type_weights: dict[str, float] | None = None  # uniform when None
    # four colors keep star pairing satisfiable often enough for the
    # density loop to converge; widen for gaudier boards
    color_palette: tuple[Color, ...] = (Color.R, Color.B, Color.G, Color.Y)
    seed: int | str = 0
    path_rule_fraction: float = 0.3
    # per-attempt solver budget; tighter than the solver-facing default so
    # a generation run stays fast, with blown budgets treated as ">cap"
    budget: SearchBudget = field(default_factory=lambda: SearchBudget(
        max_solutions=51, max_nodes=200_000, max_time=0.8))


@dataclass(frozen=True)
class DifficultyFeatures:
    distinct_rule_types: int
    rule_cells: int
    rule_density: float
    grid_size: int
    interaction_estimate: float

    def as_dict(self) -> dict[str, float]:
        return {
            "distinct_rule_types": float(self.distinct_rule_types),
            "rule_cells": float(self.rule_cells),
            "rule_density": self.rule_density,
            "grid_size": float(self.grid_size),
            "interaction_estimate": self.interaction_estimate,
        }


@dataclass(frozen=True)
class AttemptInfo:
    attempt: int
    density: float
    cols: int
    rows: int
    n_solutions: int
    exhausted: bool
    adjustment: str  # "emit" | "decrease" | "increase"


def interaction_estimate(puzzle: Puzzle) -> float:
    """Proximity proxy: sum over unordered pairs of rule-bearing lattice
    cells of 1/(1 + Manhattan distance)."""
    cells = [c for c in puzzle.cells()
             if not isinstance(puzzle.cell_symbol(c), EmptyCell)]
    total = 0.0
    for a in range(len(cells)):
        for b in range(a + 1, len(cells)):
            d = abs(cells[a].i - cells[b].i) + abs(cells[a].j - cells[b].j)
            total += 1.0 / (1.0 + d)
    return total


def puzzle_features(puzzle: Puzzle) -> DifficultyFeatures:
    types = set()
    rule_cells = 0
    for c in puzzle.cells():
        sym = puzzle.cell_symbol(c)
        if not isinstance(sym, EmptyCell):
            rule_cells += 1
            types.add(type(sym).__name__)
    for p in puzzle.path_positions():
        sym = puzzle.symbol_at(p)
        if isinstance(sym, (Dot, Gap)):
            rule_cells += 1
            types.add(type(sym).__name__)
    size = puzzle.cell_cols * puzzle.cell_rows
    return DifficultyFeatures(
        distinct_rule_types=len(types),
        rule_cells=rule_cells,
        rule_density=rule_cells / size,
        grid_size=size,
        interaction_estimate=interaction_estimate(puzzle),
    )


def difficulty_score(features: DifficultyFeatures,
                     weights: dict[str, float] | None = None) -> float:
    """1 + 4 * clamp01(weighted sum of min-max normalized features);
    monotone non-decreasing in every feature."""
    weights = weights or DIFFICULTY_WEIGHTS
    total = 0.0
    for name, value in features.as_dict().items():
        lo, hi = FEATURE_RANGES[name]
        norm = (value - lo) / (hi - lo)
        norm = 0.0 if norm < 0.0 else 1.0 if norm > 1.0 else norm
        total += weights.get(name, 0.0) * norm
    total = 0.0 if total < 0.0 else 1.0 if total > 1.0 else total
    return 1.0 + 4.0 * total


def difficulty_level(score: float) -> int:
    return max(1, min(5, math.ceil(score)))


def _random_polyomino(rng: random.Random, max_area: int = 4) -> Polyshape:
    area = rng.randint(1, max_area)
    cells = {(0, 0)}
    while len(cells) < area:
        cx, cy = rng.choice(sorted(cells))
        dx, dy = rng.choice(((1, 0), (-1, 0), (0, 1), (0, -1)))
        cells.add((cx + dx, cy + dy))
    min_x = min(c for c, _ in cells)
    min_y = min(r for _, r in cells)
    w = max(c for c, _ in cells) - min_x + 1
    h = max(r for _, r in cells) - min_y + 1
    rows = [[0] * w for _ in range(h)]
    for c, r in cells:
        rows[r - min_y][c - min_x] = 1
    return Polyshape.from_rows(rows)


def _weights_for(config: GenConfig, names: tuple[str, ...]) -> list[float]:
    table = config.rule_type_weights or {}
    return [max(0.0, table.get(name, 1.0)) for name in names]


def _attempt_board(rng: random.Random, config: GenConfig,
                   cols: int, rows: int, density: float) -> Puzzle:
    """One random layout at the given density."""
    width, height = 2 * cols + 1, 2 * rows + 1
    grid: list[list[Symbol]] = [
        [EmptyCell() if x % 2 == 1 and y % 2 == 1 else Open()
         for x in range(width)]
        for y in range(height)
    ]

    shapes: dict[int, Polyshape] = {}
    shape_ids: dict[Polyshape, int] = {}
    placed_polys: list[tuple[Polyshape, Color]] = []

    def intern_shape(shape: Polyshape) -> int:
        if shape not in shape_ids:
            shape_ids[shape] = len(shape_ids) + 1
            shapes[shape_ids[shape]] = shape
        return shape_ids[shape]

    n_cells = cols * rows
    n_cell_rules = min(n_cells, int(density * n_cells))
    all_cells = [(i, j) for j in range(rows) for i in range(cols)]
    cell_weights = _weights_for(config, _CELL_RULES)
    for i, j in rng.sample(all_cells, n_cell_rules):
        kind = rng.choices(_CELL_RULES, weights=cell_weights)[0]
        color = rng.choice(config.color_palette)
        if kind == RULE_YLOP and not placed_polys:
            kind = RULE_POLY  # a lone ylop can never cancel
        if kind == RULE_SQUARE:
            sym: Symbol = Square(color)
        elif kind == RULE_STAR:
            sym = Star(color)
        elif kind == RULE_TRIANGLE:
            sym = Triangle(rng.randint(1, 4), color)
        elif kind == RULE_POLY:
            shape = _random_polyomino(rng)
            sym = Poly(color, intern_shape(shape))
            placed_polys.append((shape, color))
        else:
            shape, pcolor = rng.choice(placed_polys)
            sym = Ylop(pcolor, intern_shape(shape))
        grid[2 * j + 1][2 * i + 1] = sym

    border = _border_path_positions(width, height)
    endpoints = rng.sample(border, 2)
    start, end = Pos(*endpoints[0]), Pos(*endpoints[1])

    n_path_rules = int(config.path_rule_fraction * density * n_cells)
    path_positions = [
        (x, y) for y in range(height) for x in range(width)
        if (x % 2 == 0 or y % 2 == 0) and (x, y) not in (tuple(start), tuple(end))
    ]
    path_weights = _weights_for(config, _PATH_RULES)
    for x, y in rng.sample(path_positions, min(n_path_rules, len(path_positions))):
        kind = rng.choices(_PATH_RULES, weights=path_weights)[0]
        grid[y][x] = Dot() if kind == RULE_DOT else Gap()

    grid[start.y][start.x] = Start()
    grid[end.y][end.x] = End()

    puzzle = Puzzle(
        cell_cols=cols,
        cell_rows=rows,
        grid=tuple(tuple(row) for row in grid),
        start=start,
        end=end,
        shapes=shapes,
        puzzle_id="",
    )
    return puzzle


def _border_path_positions(width: int, height: int) -> list[tuple[int, int]]:
    out = []
    for x in range(width):
        out.append((x, 0))
        out.append((x, height - 1))
    for y in range(1, height - 1):
        out.append((0, y))
        out.append((width - 1, y))
    return sorted(set(out))


def _content_id(puzzle: Puzzle) -> str:
    doc = serialize_puzzle(puzzle)
    return hashlib.sha256(doc.encode()).hexdigest()[:16]


def generate_with_trace(config: GenConfig) -> tuple[Puzzle, SolutionSet, list[AttemptInfo]]:
    density = config.initial_density
    budget = replace(config.budget, max_solutions=config.solution_cap + 1)
    trace: list[AttemptInfo] = []
    for attempt in range(config.max_attempts):
        rng = random.Random(f"{config.seed}:{attempt}")
        cols = rng.randint(*config.cols_range)
        rows = rng.randint(*config.rows_range)
        puzzle = _attempt_board(rng, config, cols, rows, density)
        solutions = enumerate_solutions(puzzle, budget)
        n = len(solutions.solutions)
        if solutions.exhausted and 1 <= n <= config.solution_cap:
            trace.append(AttemptInfo(attempt, density, cols, rows, n,
                                     True, "emit"))
            features = puzzle_features(puzzle)
            score = round(difficulty_score(features), 4)
            final = replace(puzzle, difficulty_score=score)
            final = replace(final, puzzle_id=_content_id(final))
            return final, solutions, trace
        if solutions.exhausted and n == 0:
            trace.append(AttemptInfo(attempt, density, cols, rows, 0,
                                     True, "decrease"))
            density = max(config.density_step, density - config.density_step)
        else:
            trace.append(AttemptInfo(attempt, density, cols, rows, n,
                                     solutions.exhausted, "increase"))
            density = min(1.0, density + config.density_step)
    error = GenerationExhausted(
        f"no certified puzzle within {config.max_attempts} attempts")
    error.trace = trace
    raise error


def generate_puzzle(config: GenConfig) -> tuple[Puzzle, SolutionSet]:
    puzzle, solutions, _ = generate_with_trace(config)
    return puzzle, solutions


def generation_manifest_entry(puzzle: Puzzle, solutions: SolutionSet,
                              filename: str) -> dict:
    return {
        "puzzle_id": puzzle.puzzle_id,
        "file": filename,
        "difficulty_score": puzzle.difficulty_score,
        "level": difficulty_level(puzzle.difficulty_score or 1.0),
        "n_solutions": len(solutions.solutions),
    }
