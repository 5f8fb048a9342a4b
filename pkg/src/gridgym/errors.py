"""Exception taxonomy shared across the engine."""


class GridGymError(Exception):
    """Base class for all engine errors."""


class SchemaError(GridGymError):
    """Puzzle document is missing fields or contains unparsable values."""


class GridShapeError(GridGymError):
    """Grid dimensions disagree with cell_cols/cell_rows."""


class SymbolPlacementError(GridGymError):
    """Cell symbol on a path position or path symbol on a cell."""


class MissingShapeError(GridGymError):
    """A Poly/Ylop references a shape id absent from the catalog."""


class EndpointError(GridGymError):
    """Zero or multiple S/E, or S/E off the border."""


class PathFormatError(GridGymError):
    """Path text is neither coordinate nor direction form."""


class IllegalMove(GridGymError):
    """apply_move called with an action outside the legal set."""


class IllegalAction(GridGymError):
    """Environment step with an action outside the legal set."""

    def __init__(self, msg: str, legal: list | None = None):
        super().__init__(msg)
        self.legal = legal or []


class EpisodeOver(GridGymError):
    """Environment step on a terminated episode."""


class NoLegalAction(GridGymError):
    """Policy asked to act in a state with an empty legal set."""


class UnsolvablePuzzle(GridGymError):
    """Process rewards demanded but enumeration proves zero solutions."""


class GenerationExhausted(GridGymError):
    """Generator hit max_attempts without certifying a puzzle."""


class ParseFailure(GridGymError):
    """Base for agent-output parse errors."""


class NoMarker(ParseFailure):
    """Response has no Final: line."""


class UnknownToken(ParseFailure):
    """Final: line carries neither a digit 0-3 nor a direction name."""


class IllegalChoice(ParseFailure):
    """Parsed action is not in the legal set."""


class CorruptLog(GridGymError):
    """Episode log entries are reordered, truncated mid-entry or checksum-broken."""


class UnknownPuzzle(GridGymError):
    """Metrics aggregation saw an episode for a puzzle not in the catalog."""
