"""Fixed agent-facing prompt templates.

Two system prompts exist, one per mode; they differ only in the
Revisiting paragraph and the first Path Constraints item.  The
"{polyshapes}" slot is filled from the puzzle's shape catalog.
"""

from __future__ import annotations

from .grid import Puzzle
from .paths import Mode

_PROMPT_HEAD = """You are an autonomous agent controlling a path-finding puzzle solver.
Your goal is to find a valid path (a continuous line) from the specified
Start Node to the End Node on the provided grid, adhering to all puzzle
rules.

Core Concepts & Grid Basics:
Grid Dimensions: You can find the puzzle grid size in the info
Path: The solution is a single, continuous line connecting adjacent nodes
  either horizontally or vertically.
"""

_REVISITING_STANDARD = """Revisiting: You can not traceback your path. You can not visit a cell
  twice.
"""

_REVISITING_BACKTRACK = """Revisiting: You can traceback your path, but you MUST do so in the same
  way you came, without crossing over your own path. When tracing back,
  you can only move to the last cell you occupied, and then continue from
  there. Also when you traceback, the nodes you no longer use in your
  path are free to be used again.
"""

_PROMPT_CONCEPTS_TAIL = """Rule Cells: Cells containing rule symbols (squares, stars, etc.) have
  coordinates where both x and y are odd. The path goes around these rule
  cells, never on them. They are also marked as gaps.
Regions: The drawn path divides the grid cells into one or more distinct
  enclosed areas (regions). Many rules apply based on the contents of
  these regions.
Valid Path Cells: The path travels along the grid lines (edges between
  nodes). It can only occupy positions marked '+' or '.' in the grid
  layout (these correspond to positions with at least one even
  coordinate).

Symbol Legend (Grid Notation)
  S: Start Node (Path begins here)
  E: End Node (Path ends here)
  V: Visited Node (Path has passed through this cell)
  L: Current Node (Path is currently on this cell)
  +: Valid cell for the path to occupy
  N: Empty rule cell (no rule)
  G: Gap (Path CANNOT cross this cell)
  .: Dot (Path MUST pass through this cell)
  o-X: Square of color X
  *-X: Star of color X
  A-X: Triangle (touch 1 edge)
  B-X: Triangle (touch 2 edges)
  C-X: Triangle (touch 3 edges)
  D-X: Triangle (touch 4 edges)
  P-X-Y: Polyshape (positive) of color X and shape ID Y
  Y-X-Y: Negative Polyshape (ylop) of color X and shape ID Y

Color Codes: R=Red, B=Blue, G=Green, Y=Yellow, W=White, O=Orange,
  P=Purple, K=Black

Detailed Solving Rules:
The drawn path must satisfy ALL applicable constraints:

"""

_PATH_CONSTRAINTS_STANDARD = """1. Path Constraints:
   Path connects adjacent nodes (horizontal/vertical moves only).
   Nodes CAN NOT be revisited. You cannot visit a cell twice.
   Path MUST pass through all Dot cells.
   Path CANNOT pass through any Gap cells.
"""

_PATH_CONSTRAINTS_BACKTRACK = """1. Path Constraints:
   Path connects adjacent nodes (horizontal/vertical moves only).
   Nodes CAN be revisited. But only if you traceback to the last cell
     you occupied (and from there again and again ...). Otherwise you
     CANNOT cross your own path.
   Path MUST pass through all Dot cells.
   Path CANNOT pass through any Gap cells.
"""

_PROMPT_TAIL = """
2. Region-Based Rules (Apply to areas enclosed by the path):
   Squares: All squares within a single region MUST be the same color.
     Squares of different colors MUST be separated into different regions
     by the path.
   Stars: Within a single region, each star symbol MUST be paired with
     exactly ONE other element of the same color. Other colors within the
     region are irrelevant to this specific star's rule.
   Polyshapes (poly): The region containing this symbol MUST be able to
     contain the specified shape (defined in Polyshape Definitions). The
     shape must fit entirely within the region's boundaries. If multiple
     positive polyshapes are in one region, the region must accommodate
     their combined, non-overlapping forms. Rotation of polyshapes is NOT
     allowed. They must fit within the provided space in their given
     orientation.
   Negative Polyshapes (ylop): These subtract shape requirements,
     typically within the same region as corresponding positive
     polyshapes. A negative polyshape cancels out a positive polyshape of
     the exact same shape and color within that region. If all positive
     shapes are canceled, the region has no shape constraint.

3. Path-Based Rules (Edge Touching):
   Triangles: The path MUST touch a specific number of edges of the cell
     containing the triangle symbol.
     (1): Path touches EXACTLY 1 edge of the triangle's cell.
     (2): Path touches EXACTLY 2 edges of the triangle's cell.
     (3): Path touches EXACTLY 3 edges of the triangle's cell.
     (4): Path touches EXACTLY 4 edges (fully surrounds) the cell.

Polyshape Definitions: Shapes are defined by 2D arrays where 1 indicates
  an occupied cell and 0 indicates an empty cell.
{polyshapes}

At each turn you'll receive the current state:
- Step: The current step number
- Current Position: Your current (x, y) location
- Legal Actions: Available moves with format [digit=DIRECTION, ...]
- Grid State: The current grid showing your path progress"""


def polyshape_catalog_text(puzzle: Puzzle) -> str:
    """Shape-catalog text substituted for the {polyshapes} slot."""
    if not puzzle.shapes:
        return "(none)"
    blocks = []
    for shape_id in sorted(puzzle.shapes):
        rows = puzzle.shapes[shape_id].to_lists()
        blocks.append(f"Shape {shape_id}:\n" + "\n".join(str(r) for r in rows))
    return "\n\n".join(blocks)


def system_prompt(puzzle: Puzzle, mode: Mode) -> str:
    if mode is Mode.BACKTRACK:
        revisiting, constraints = _REVISITING_BACKTRACK, _PATH_CONSTRAINTS_BACKTRACK
    else:
        revisiting, constraints = _REVISITING_STANDARD, _PATH_CONSTRAINTS_STANDARD
    template = _PROMPT_HEAD + revisiting + _PROMPT_CONCEPTS_TAIL + constraints + _PROMPT_TAIL
    return template.replace("{polyshapes}", polyshape_catalog_text(puzzle))
