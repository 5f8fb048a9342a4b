"""Built-in sample puzzles used by the docs, demos and tests.

four_stars_puzzle   2x2 board, two yellow and two black stars; solvable
                    straight down the left border and along the bottom.
open_ring_puzzle    1x1 board with no rules; exactly two solutions.
poly_squares_puzzle 3x2 board with a polyshape, two blue squares and a
                    dot; used for the observation-format golden.
"""

from __future__ import annotations

from .grid import Polyshape, Puzzle, puzzle_from_tokens

FOUR_STARS_ID = "four-stars-2x2"
OPEN_RING_ID = "open-ring-1x1"
POLY_SQUARES_ID = "poly-squares-3x2"


def four_stars_puzzle() -> Puzzle:
    rows = [
        ["+", "+", "+", "+", "+"],
        ["S", "*-Y", "+", "*-Y", "+"],
        ["+", "+", "+", "+", "+"],
        ["+", "*-K", "+", "*-K", "+"],
        ["+", "+", "E", "+", "+"],
    ]
    return puzzle_from_tokens(rows, puzzle_id=FOUR_STARS_ID, difficulty_score=1.74)


def open_ring_puzzle() -> Puzzle:
    rows = [
        ["S", "+", "+"],
        ["+", "N", "+"],
        ["+", "+", "E"],
    ]
    return puzzle_from_tokens(rows, puzzle_id=OPEN_RING_ID, difficulty_score=1.0)


def poly_squares_puzzle() -> Puzzle:
    rows = [
        ["+", "+", "+", "+", "+", ".", "+"],
        ["S", "N", "+", "P-R-16", "+", "o-B", "+"],
        ["+", "+", "+", "+", "+", "+", "+"],
        ["+", "N", "+", "N", "+", "o-B", "+"],
        ["+", "+", "E", "+", "+", "+", "+"],
    ]
    shapes = {16: Polyshape.from_rows([[1]])}
    return puzzle_from_tokens(rows, shapes=shapes, puzzle_id=POLY_SQUARES_ID,
                              difficulty_score=4.6)


def sample_puzzles() -> dict[str, Puzzle]:
    puzzles = [four_stars_puzzle(), open_ring_puzzle(), poly_squares_puzzle()]
    return {p.puzzle_id: p for p in puzzles}
