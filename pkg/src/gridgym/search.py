"""Exhaustive solution enumeration, A* navigation and the random policy.

The enumerator is the certification oracle for generated puzzles, so it
favors raw speed: positions are flat ints, the DFS is iterative, and the
reachability pruning reuses stamped buffers instead of reallocating.
Pruning is strictly sound (never discards a true solution prefix), which
the differential tests check by toggling each rule.
"""

from __future__ import annotations

import heapq
import random
import time
from dataclasses import dataclass, field

from .errors import NoLegalAction
from .grid import COLORED_SYMBOLS, Dot, Gap, Pos, Puzzle, Star, is_path_class
from .paths import Action, Path, legal_moves, serialize_path
from .rules import verify


@dataclass(frozen=True)
class SearchBudget:
    max_solutions: int = 51
    max_nodes: int = 50_000_000
    max_time: float = 60.0  # seconds


@dataclass
class SolutionSet:
    solutions: tuple[Path, ...]
    exhausted: bool
    cap: int
    elapsed: float
    nodes: int = 0
    _prefixes: frozenset | None = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.solutions)

    def is_solution_prefix(self, path: Path) -> bool:
        if self._prefixes is None:
            prefixes = set()
            for sol in self.solutions:
                for k in range(1, len(sol) + 1):
                    prefixes.add(sol[:k])
            object.__setattr__(self, "_prefixes", frozenset(prefixes))
        return tuple(path) in self._prefixes

    def to_report(self) -> dict:
        return {
            "n_solutions": len(self.solutions),
            "exhausted": self.exhausted,
            "elapsed_ms": round(self.elapsed * 1000.0, 3),
            "cap": self.cap,
            "solutions": [serialize_path(p) for p in self.solutions],
        }


def _flat_graph(puzzle: Puzzle):
    """Flat passability and digit-ordered neighbor lists over int indices."""
    w, h = puzzle.width, puzzle.height
    passable = bytearray(w * h)
    for y in range(h):
        for x in range(w):
            p = (x, y)
            if is_path_class(p) and not isinstance(puzzle.symbol_at(p), Gap):
                passable[y * w + x] = 1
    neighbors: list[list[int]] = [[] for _ in range(w * h)]
    for y in range(h):
        for x in range(w):
            idx = y * w + x
            if not passable[idx]:
                continue
            for dx, dy in ((1, 0), (0, -1), (-1, 0), (0, 1)):  # R U L D
                nx2, ny2 = x + dx, y + dy
                if 0 <= nx2 < w and 0 <= ny2 < h and passable[ny2 * w + nx2]:
                    neighbors[idx].append(ny2 * w + nx2)
    return passable, neighbors


def _provably_unsolvable(puzzle: Puzzle) -> bool:
    """Sound static zero-certificates, checked before any search.

    A dot with fewer than two passable neighbors can never lie on a
    path (dots are never endpoints), and a star whose color appears on
    no other colored symbol anywhere can never find its partner.
    """
    color_counts: dict = {}
    for cell in puzzle.cells():
        sym = puzzle.cell_symbol(cell)
        if isinstance(sym, COLORED_SYMBOLS):
            color_counts[sym.color] = color_counts.get(sym.color, 0) + 1
    for cell in puzzle.cells():
        sym = puzzle.cell_symbol(cell)
        if isinstance(sym, Star) and color_counts.get(sym.color, 0) < 2:
            return True
    for y in range(puzzle.height):
        for x in range(puzzle.width):
            if isinstance(puzzle.symbol_at((x, y)), Dot):
                degree = sum(
                    1 for np in ((x + 1, y), (x - 1, y), (x, y - 1), (x, y + 1))
                    if puzzle.passable(np)
                )
                if degree < 2:
                    return True
    return False


def enumerate_solutions(
    puzzle: Puzzle,
    budget: SearchBudget | None = None,
    prune_end: bool = True,
    prune_dots: bool = True,
    static_checks: bool = True,
) -> SolutionSet:
    """Depth-first enumeration of simple paths from start; a path entering
    the end is kept iff the verifier accepts it.  Entering the end always
    terminates a path, matching the environment.  Stops early (and
    reports exhausted=False) once any budget trips, including the
    solution cap."""
    budget = budget or SearchBudget()
    t0 = time.monotonic()
    if static_checks and _provably_unsolvable(puzzle):
        return SolutionSet(solutions=(), exhausted=True,
                           cap=budget.max_solutions,
                           elapsed=time.monotonic() - t0, nodes=0)
    w = puzzle.width
    _, neighbors = _flat_graph(puzzle)
    start = puzzle.start.y * w + puzzle.start.x
    end = puzzle.end.y * w + puzzle.end.x
    dots = [
        y * w + x
        for y in range(puzzle.height)
        for x in range(puzzle.width)
        if isinstance(puzzle.symbol_at((x, y)), Dot)
    ]

    n = len(neighbors)
    visited = bytearray(n)
    visited[start] = 1
    path = [start]
    nxt = [0]
    solutions: list[Path] = []
    exhausted = True
    nodes = 1

    # stamped BFS buffers, reused across every feasibility check
    seen = [0] * n
    stamp = 0
    queue = [0] * n

    def feasible() -> bool:
        nonlocal stamp
        stamp += 1
        head = path[-1]
        seen[head] = stamp
        queue[0] = head
        qn, qi = 1, 0
        end_seen = False
        while qi < qn:
            u = queue[qi]
            qi += 1
            for v in neighbors[u]:
                if seen[v] != stamp and not visited[v]:
                    seen[v] = stamp
                    if v == end:
                        end_seen = True  # terminal: do not expand through it
                    else:
                        queue[qn] = v
                        qn += 1
        if prune_end and not end_seen:
            return False
        if prune_dots:
            for d in dots:
                if not visited[d] and seen[d] != stamp:
                    return False
        return True

    while nxt:
        depth = len(nxt) - 1
        u = path[depth]
        i = nxt[depth]
        nbrs = neighbors[u]
        if i >= len(nbrs):
            nxt.pop()
            visited[u] = 0
            path.pop()
            continue
        nxt[depth] = i + 1
        v = nbrs[i]
        if visited[v]:
            continue
        if v == end:
            candidate = tuple(Pos(idx % w, idx // w) for idx in path) + (puzzle.end,)
            if verify(puzzle, candidate).satisfied:
                solutions.append(candidate)
                if len(solutions) >= budget.max_solutions:
                    exhausted = False
                    break
            continue
        nodes += 1
        if nodes > budget.max_nodes:
            exhausted = False
            break
        if not nodes & 1023 and time.monotonic() - t0 > budget.max_time:
            exhausted = False
            break
        visited[v] = 1
        path.append(v)
        if (prune_end or prune_dots) and not feasible():
            visited[v] = 0
            path.pop()
            continue
        nxt.append(0)

    solutions.sort(key=serialize_path)
    return SolutionSet(
        solutions=tuple(solutions),
        exhausted=exhausted,
        cap=budget.max_solutions,
        elapsed=time.monotonic() - t0,
        nodes=nodes,
    )


def astar_path(puzzle: Puzzle) -> Path | None:
    """Shortest start-to-end path in half-steps, rules ignored except
    gaps and parity.  Ties on f-score break by action digit order
    (RIGHT first) then FIFO, so the result is deterministic."""
    w = puzzle.width
    _, neighbors = _flat_graph(puzzle)
    start = puzzle.start.y * w + puzzle.start.x
    end = puzzle.end.y * w + puzzle.end.x
    ex, ey = puzzle.end

    def h(idx: int) -> int:
        return abs(idx % w - ex) + abs(idx // w - ey)

    g = {start: 0}
    parent: dict[int, int] = {}
    heap = [(h(start), 0, start)]
    seq = 1
    closed = set()
    while heap:
        _, _, u = heapq.heappop(heap)
        if u == end:
            out = [u]
            while out[-1] != start:
                out.append(parent[out[-1]])
            out.reverse()
            return tuple(Pos(idx % w, idx // w) for idx in out)
        if u in closed:
            continue
        closed.add(u)
        gu = g[u]
        for v in neighbors[u]:  # already digit-ordered
            ng = gu + 1
            if ng < g.get(v, 1 << 30):
                g[v] = ng
                parent[v] = u
                heapq.heappush(heap, (ng + h(v), seq, v))
                seq += 1
    return None


def random_walk_policy(state, rng_seed) -> Action:
    """Uniform choice over the legal actions, fully determined by
    (seed, step index).  `state` is any object exposing puzzle, path,
    mode and step_count (an environment state)."""
    legal = sorted(legal_moves(state.puzzle, state.path, state.mode))
    if not legal:
        raise NoLegalAction("no legal action available")
    rng = random.Random(f"{rng_seed}:{state.step_count}")
    return rng.choice(legal)
