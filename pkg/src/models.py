"""
Core data models shared across the generator, verifier and CLI.
"""
import math
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional, Tuple

GOLDEN_RATIO = (1 + math.sqrt(5)) / 2
SCHEMA_VERSION = 1


@dataclass
class GenerationSettings:
    """Parameters shared by all pattern generators."""
    seed: int = 1
    radius: float = 15.0
    alpha_degrees: float = 60.0
    len_s: float = 1.0
    len_l: float = GOLDEN_RATIO
    fibonacci_level: int = 10
    gp_tolerance: float = 1e-7
    perturb: bool = False


@dataclass
class VerificationThresholds:
    """Thresholds used by the C0-C4 checks."""
    margin: float = 2.0
    tolerance: float = 1e-9
    s_max: Optional[float] = None
    s_max_p3_dual: float = 10.0
    s_max_ammann: float = 14.0
    s_max_multigrid: float = 10.0


@dataclass
class RenderOptions:
    """SVG rendering options."""
    stroke_width: float = 0.06
    vertex_radius: float = 0.08
    margin: float = 1.0
    scale: float = 20.0
    color_paths: bool = False
    glyphs: bool = False
    viewport: Optional[Tuple[float, float, float, float]] = None

    def validate(self) -> List[str]:
        issues = []
        for name in ("stroke_width", "vertex_radius", "scale"):
            if getattr(self, name) <= 0:
                issues.append(f"{name} must be positive")
        if self.margin < 0:
            issues.append("margin must be non-negative")
        if self.viewport is not None:
            x0, y0, x1, y1 = self.viewport
            if x1 <= x0 or y1 <= y0:
                issues.append("viewport must have positive width and height")
        return issues


@dataclass
class C0Metrics:
    """Feature-size metrics of condition C0."""
    min_pair_distance: float
    largest_empty_circle_radius: float
    min_face_inradius: float
    max_face_circumradius: float
    passed: bool


@dataclass
class C1Result:
    passed: bool
    offenders: List[int] = field(default_factory=list)


@dataclass
class C2Result:
    connected: bool
    min_face_degree: int
    passed: bool


@dataclass
class C3Result:
    acyclic: bool
    all_edges_downward: bool
    passed: bool


@dataclass
class C4Metrics:
    """Per-path Deming deviations for condition C4."""
    per_path_max_deviation: List[float]
    per_path_angle_to_up: List[float]
    worst: float
    s_max: float
    passed: bool


@dataclass
class VerificationReport:
    """Aggregated outcome of the five workability conditions."""
    c0: Optional[C0Metrics]
    c1: C1Result
    c2: C2Result
    c3: C3Result
    c4: Optional[C4Metrics]
    boundary_vertices: List[int] = field(default_factory=list)
    boundary_edges: List[int] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(
            self.c0 is not None and self.c0.passed
            and self.c1.passed and self.c2.passed and self.c3.passed
            and self.c4 is not None and self.c4.passed
        )

    def to_dict(self) -> Dict[str, Any]:
        """Plain dictionary with JSON-safe values."""
        def metrics(value):
            return None if value is None else _json_safe(asdict(value))

        return {
            "passed": self.passed,
            "c0": metrics(self.c0),
            "c1": metrics(self.c1),
            "c2": metrics(self.c2),
            "c3": metrics(self.c3),
            "c4": metrics(self.c4),
            "boundaryVertices": list(self.boundary_vertices),
            "boundaryEdges": list(self.boundary_edges),
            "errors": list(self.errors),
        }


def _json_safe(value):
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


@dataclass
class PatternDocument:
    """
    Interchange document for drawings, tilings and lace patterns.

    All fields hold plain JSON values so that a parsed document compares
    equal to the document it was serialized from.
    """
    metadata: Dict[str, Any]
    vertices: List[Dict[str, Any]]
    edges: List[Dict[str, Any]]
    up_vector: List[float] = field(default_factory=lambda: [0.0, 1.0])
    schema_version: int = SCHEMA_VERSION
    faces: Optional[List[List[int]]] = None
    tiles: Optional[List[Dict[str, Any]]] = None
    edge_twists: Optional[List[int]] = None
    vertex_words: Optional[Dict[str, str]] = None
    edge_to_path: Optional[List[int]] = None
    verification: Optional[Dict[str, Any]] = None

    @property
    def kind(self) -> str:
        return self.metadata.get("generator", "unknown")

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "schemaVersion": self.schema_version,
            "metadata": self.metadata,
            "upVector": self.up_vector,
            "vertices": self.vertices,
            "edges": self.edges,
        }
        optional = {
            "faces": self.faces,
            "tiles": self.tiles,
            "edgeTwists": self.edge_twists,
            "vertexWords": self.vertex_words,
            "edgeToPath": self.edge_to_path,
            "verification": self.verification,
        }
        data.update({k: v for k, v in optional.items() if v is not None})
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PatternDocument":
        return cls(
            metadata=data["metadata"],
            vertices=data["vertices"],
            edges=data["edges"],
            up_vector=data.get("upVector", [0.0, 1.0]),
            schema_version=data.get("schemaVersion", SCHEMA_VERSION),
            faces=data.get("faces"),
            tiles=data.get("tiles"),
            edge_twists=data.get("edgeTwists"),
            vertex_words=data.get("vertexWords"),
            edge_to_path=data.get("edgeToPath"),
            verification=data.get("verification"),
        )
