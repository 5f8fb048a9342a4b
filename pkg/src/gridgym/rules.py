"""Verdict computation for completed paths against all seven rule types.

verify() assumes the path already satisfies the structural invariants
(no gap trespass, no self-intersection); those are enforced by the move
layer.  Everything here reports violations as data rather than raising.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .grid import (
    CellCoord,
    Color,
    Dot,
    Poly,
    Polyshape,
    Pos,
    Puzzle,
    Square,
    Star,
    Triangle,
    Ylop,
    COLORED_SYMBOLS,
)
from .paths import (
    Path,
    RegionPartition,
    compute_regions,
    edge_touch_count,
)

RULE_DOT = "Dot"
RULE_GAP = "Gap"
RULE_SQUARE = "Square"
RULE_STAR = "Star"
RULE_TRIANGLE = "Triangle"
RULE_POLY = "Poly"
RULE_YLOP = "Ylop"
RULE_ENDPOINT = "Endpoint"

ALL_RULES = (RULE_DOT, RULE_GAP, RULE_SQUARE, RULE_STAR,
             RULE_TRIANGLE, RULE_POLY, RULE_YLOP)


@dataclass(frozen=True)
class Violation:
    rule: str
    location: Pos | CellCoord
    detail: str

    def to_dict(self) -> dict:
        loc_key = "cell" if isinstance(self.location, CellCoord) else "position"
        return {"rule": self.rule, "location": {loc_key: list(self.location)},
                "detail": self.detail}


@dataclass(frozen=True)
class Verdict:
    satisfied: bool
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {"satisfied": self.satisfied,
                "violations": [v.to_dict() for v in self.violations]}


def puzzle_rule_types(puzzle: Puzzle) -> set[str]:
    """Rule types present on the board (used by metrics bucketing)."""
    present = set()
    for y in range(puzzle.height):
        for x in range(puzzle.width):
            sym = puzzle.symbol_at((x, y))
            name = type(sym).__name__
            if name in ("Dot", "Gap", "Square", "Star", "Triangle", "Poly", "Ylop"):
                present.add(name)
    return present


def star_partners(puzzle: Puzzle, partition: RegionPartition, star_cell: CellCoord) -> int:
    """Count colored elements sharing the star's color and region, the
    star itself excluded."""
    star = puzzle.cell_symbol(star_cell)
    if not isinstance(star, Star):
        raise ValueError(f"{tuple(star_cell)} does not hold a star")
    count = 0
    for cell in partition.region_cells(star_cell):
        if cell == star_cell:
            continue
        sym = puzzle.cell_symbol(cell)
        if isinstance(sym, COLORED_SYMBOLS) and sym.color is star.color:
            count += 1
    return count


def fit_polyominoes(region: frozenset[CellCoord] | set[CellCoord],
                    shapes: list[Polyshape]) -> bool:
    """True iff translations of all shapes tile the region exactly.

    No rotation or mirror; placements must be pairwise disjoint and
    cover every region cell.  Exponential in the worst case, but regions
    are at most 36 cells and shape counts small.
    """
    remaining = frozenset(region)
    if sum(s.area for s in shapes) != len(remaining):
        return False
    # Deduplicate identical shapes: order within a group is irrelevant.
    groups: list[tuple[Polyshape, int]] = []
    for s in shapes:
        for k, (other, n) in enumerate(groups):
            if other == s:
                groups[k] = (other, n + 1)
                break
        else:
            groups.append((s, 1))

    def place(cells: frozenset[CellCoord], counts: tuple[int, ...]) -> bool:
        if not cells:
            return True
        anchor = min(cells)  # cover the smallest uncovered cell
        for gi, (shape, _) in enumerate(groups):
            if counts[gi] == 0:
                continue
            for (oc, orow) in shape.offsets():
                base_i = anchor.i - oc
                base_j = anchor.j - orow
                footprint = frozenset(
                    CellCoord(base_i + c, base_j + r) for c, r in shape.offsets()
                )
                if footprint <= cells:
                    next_counts = counts[:gi] + (counts[gi] - 1,) + counts[gi + 1:]
                    if place(cells - footprint, next_counts):
                        return True
        return False

    return place(remaining, tuple(n for _, n in groups))


def verify(puzzle: Puzzle, path: Path) -> Verdict:
    """Evaluate a completed path; satisfied iff no violations.

    Checks run in a fixed order (endpoint, dots, squares, stars,
    triangles, shapes) with regions and cells visited in row-major
    order, so identical inputs always give an identical verdict.
    """
    violations: list[Violation] = []
    partition = compute_regions(puzzle, path)
    on_path = set(path)

    if path[0] != puzzle.start:
        violations.append(Violation(RULE_ENDPOINT, puzzle.start,
                                    "path does not begin at the start"))
    if path[-1] != puzzle.end:
        violations.append(Violation(RULE_ENDPOINT, puzzle.end,
                                    "path does not end at the end"))

    for y in range(puzzle.height):
        for x in range(puzzle.width):
            if isinstance(puzzle.symbol_at((x, y)), Dot) and Pos(x, y) not in on_path:
                violations.append(Violation(RULE_DOT, Pos(x, y), "dot not visited"))

    for label in sorted(partition.regions):
        cells = sorted(partition.regions[label])
        square_colors: dict[Color, CellCoord] = {}
        for cell in cells:
            sym = puzzle.cell_symbol(cell)
            if isinstance(sym, Square):
                square_colors.setdefault(sym.color, cell)
        if len(square_colors) > 1:
            anchor = min(square_colors.values())
            names = ",".join(sorted(c.value for c in square_colors))
            violations.append(Violation(
                RULE_SQUARE, anchor,
                f"region mixes square colors {{{names}}}"))

    for cell in puzzle.cells():
        sym = puzzle.cell_symbol(cell)
        if isinstance(sym, Star):
            partners = star_partners(puzzle, partition, cell)
            if partners != 1:
                violations.append(Violation(
                    RULE_STAR, cell,
                    f"star needs exactly 1 same-color partner, found {partners}"))

    for cell in puzzle.cells():
        sym = puzzle.cell_symbol(cell)
        if isinstance(sym, Triangle):
            touched = edge_touch_count(puzzle, path, cell)
            if touched != sym.count:
                violations.append(Violation(
                    RULE_TRIANGLE, cell,
                    f"path touches {touched} edges, triangle requires {sym.count}"))

    for label in sorted(partition.regions):
        cells = sorted(partition.regions[label])
        polys: list[tuple[CellCoord, Poly]] = []
        ylops: list[tuple[CellCoord, Ylop]] = []
        for cell in cells:
            sym = puzzle.cell_symbol(cell)
            if isinstance(sym, Poly):
                polys.append((cell, sym))
            elif isinstance(sym, Ylop):
                ylops.append((cell, sym))
        # Ylops cancel polys of the exact same (shape, color); leftovers
        # of either kind constrain the region.
        live_polys = list(polys)
        for ycell, ylop in ylops:
            for k, (_, poly) in enumerate(live_polys):
                if poly.shape_id == ylop.shape_id and poly.color is ylop.color:
                    del live_polys[k]
                    break
            else:
                violations.append(Violation(
                    RULE_YLOP, ycell,
                    "negative shape has no matching positive shape to cancel"))
        if live_polys:
            region = partition.regions[label]
            shapes = [puzzle.shapes[p.shape_id] for _, p in live_polys]
            if not fit_polyominoes(region, shapes):
                anchor = live_polys[0][0]
                violations.append(Violation(
                    RULE_POLY, anchor,
                    f"shapes (area {sum(s.area for s in shapes)}) do not tile "
                    f"their region (area {len(region)})"))

    return Verdict(satisfied=not violations, violations=tuple(violations))


def prefix_feasible(puzzle: Puzzle, path: Path) -> bool:
    """Best-effort necessary check for partial paths: every unvisited dot
    and the end must stay reachable from the head through untrodden,
    non-gap path positions.  Never rejects a prefix of a true solution.
    """
    if path[-1] == puzzle.end:
        return True
    on_path = set(path)
    seen = {path[-1]}
    queue = deque([path[-1]])
    while queue:
        x, y = queue.popleft()
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y - 1), (x, y + 1)):
            np = Pos(nx, ny)
            if np in seen or np in on_path or not puzzle.passable(np):
                continue
            seen.add(np)
            if np != puzzle.end:  # entering the end terminates an episode
                queue.append(np)
    if puzzle.end not in seen:
        return False
    for y in range(puzzle.height):
        for x in range(puzzle.width):
            if isinstance(puzzle.symbol_at((x, y)), Dot):
                p = Pos(x, y)
                if p not in on_path and p not in seen:
                    return False
    return True
