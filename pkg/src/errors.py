"""
Exception hierarchy for the lace ground generator.

Library code raises these; the CLI and manager classes turn them into
result dictionaries and exit codes.
"""
from typing import Iterable, Optional


class LaceForgeError(Exception):
    """Base exception for all generator and verification errors."""

    exit_code = 3

    def __init__(self, message: str, user_message: Optional[str] = None):
        super().__init__(message)
        self.user_message = user_message or f"❌ {message}"


class InvalidParams(LaceForgeError):
    """Raised when generator parameters are outside their valid range."""
    pass


class IndexOutOfRange(LaceForgeError):
    """Raised when a line index lies outside its family's index range."""
    pass


class ParallelLines(LaceForgeError):
    """Raised when intersecting two lines with the same direction."""
    pass


class DegenerateIntersection(LaceForgeError):
    """Raised when three or more lines meet within the general-position tolerance."""
    pass


class EmptyArrangement(LaceForgeError):
    """Raised when no line intersection falls inside the clip."""
    pass


class HorizontalEdge(LaceForgeError):
    """Raised when an edge is perpendicular to the up vector."""

    def __init__(self, edge_id: int, message: Optional[str] = None):
        self.edge_id = edge_id
        super().__init__(message or f"edge {edge_id} is perpendicular to the up vector")


class OnGridLine(LaceForgeError):
    """Raised when a point handed to face_ordinals lies on a grid line."""
    pass


class UnknownLine(LaceForgeError):
    """Raised when a stack is requested for a line with no tiles."""
    pass


class MatchingViolationInInput(LaceForgeError):
    """Raised when deflating a patch that breaks the matching rules."""
    pass


class BoundaryVertex(LaceForgeError):
    """Raised when classifying a vertex that is not surrounded by tiles or edges."""
    pass


class UnknownConfiguration(LaceForgeError):
    """Raised when a configuration is absent from the reference catalog."""
    pass


class IncompleteNeighbourhood(LaceForgeError):
    """Raised when a tile lacks one of its four edge neighbours."""
    pass


class TooFewVertices(LaceForgeError):
    """Raised when fewer than two vertices survive the boundary margin."""
    pass


class C1Violation(LaceForgeError):
    """Raised when an interior vertex is not 2-in/2-out with consecutive out-edges."""

    exit_code = 2

    def __init__(self, offenders: Iterable[int], message: Optional[str] = None):
        self.offenders = sorted(int(v) for v in offenders)
        preview = ", ".join(str(v) for v in self.offenders[:10])
        super().__init__(message or f"C1 fails at {len(self.offenders)} vertices ({preview})")


class DegeneratePoints(LaceForgeError):
    """Raised when a line fit receives coincident points only."""
    pass


class UnalignedEdge(LaceForgeError):
    """Raised when an edge direction matches no star direction."""
    pass


class UnmappedClass(LaceForgeError):
    """Raised when a braid map misses vertex classes and has no default."""

    def __init__(self, missing: Iterable, message: Optional[str] = None):
        self.missing = sorted(missing)
        super().__init__(message or f"braid map has no word for {len(self.missing)} classes: {self.missing[:5]}")


class MalformedDocument(LaceForgeError):
    """Raised when a pattern document cannot be parsed or validated."""
    pass


class IoError(LaceForgeError):
    """Raised when an output file cannot be written."""
    pass
