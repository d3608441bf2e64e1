"""
Pattern engine: builds lace ground candidates from generator parameters and
runs the analyses the command line exposes.

Every generator is deterministic for a fixed (kind, parameters, seed).
"""
import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from . import gdm, p3
from .arrangement import (
    LineFamily, Multigrid, OrientedDrawing, WordSpacing, assign_down_orientation, bigrid,
    build_arrangement, clip_from_radius, multigrid, perturb_offsets,
)
from .braid import BraidMap, EdgeTwistLabel, assign_braids, local_class_counts
from .data_manager import document_from_drawing, drawing_from_document
from .errors import DegenerateIntersection, EmptyArrangement, InvalidParams
from .lacecheck import face_shape_classes, osculating_partition, verify_all
from .models import GOLDEN_RATIO, GenerationSettings, PatternDocument, VerificationThresholds, VerificationReport
from .words import (
    SpacingWord, counterexample_words, fibonacci_grid, fibonacci_word, octonacci_word, thue_morse_word,
)

logger = logging.getLogger(__name__)

GENERATOR_KINDS = ("bigrid", "p3-gdm", "p3-deflate", "p3-dual", "ammann", "multigrid-n")
MAX_PERTURB_ATTEMPTS = 5
BIGRID_UP = (0.0, 1.0)
AMMANN_UP = (0.0, 1.0)


class GenerationLifecycleLogger:
    """Structured logging for pattern generation events."""

    @staticmethod
    def log_generation_start(kind: str, seed: int, parameters: Dict[str, Any]) -> None:
        logger.info(
            f"Generation lifecycle: START - {kind}, seed {seed}",
            extra={
                'event_type': 'generation_start',
                'kind': kind,
                'seed': seed,
                'parameters': parameters,
                'timestamp': time.time()
            }
        )

    @staticmethod
    def log_generation_complete(kind: str, num_vertices: int, num_edges: int, start_time: float) -> None:
        elapsed = time.time() - start_time
        logger.info(
            f"Generation lifecycle: COMPLETE - {kind}, {num_vertices} vertices, {num_edges} edges in {elapsed:.3f}s",
            extra={
                'event_type': 'generation_complete',
                'kind': kind,
                'num_vertices': num_vertices,
                'num_edges': num_edges,
                'elapsed': elapsed,
                'timestamp': time.time()
            }
        )

    @staticmethod
    def log_perturb_retry(kind: str, attempt: int, error: Exception) -> None:
        logger.warning(
            f"Generation lifecycle: PERTURB_RETRY - {kind}, attempt {attempt}: {error}",
            extra={
                'event_type': 'generation_perturb_retry',
                'kind': kind,
                'attempt': attempt,
                'error': str(error),
                'timestamp': time.time()
            }
        )

    @staticmethod
    def log_generation_failed(kind: str, error: Exception) -> None:
        logger.error(
            f"Generation lifecycle: FAILED - {kind}: {type(error).__name__}: {error}",
            extra={
                'event_type': 'generation_failed',
                'kind': kind,
                'error_type': type(error).__name__,
                'error': str(error),
                'timestamp': time.time()
            }
        )


@dataclass
class GenerationRequest:
    """Everything a generator needs besides the shared settings."""
    kind: str
    word: str = "fibonacci"
    level: Optional[int] = None
    offsets: Optional[List[float]] = None
    seed_patch: str = "sun"
    steps: int = 4
    families: int = 4


def parse_word_option(option: str, level: int, len_s: float, len_l: float) -> Tuple[SpacingWord, SpacingWord]:
    """
    Spacing words for both bigrid families from a word option:
    fibonacci, octonacci, thue-morse, counterexample:<m> or custom:<SL-string>.
    """
    name, _, arg = option.partition(":")
    name = name.strip().lower()
    if name == "fibonacci":
        word = fibonacci_word(level, len_s, len_l)
        return word, word
    if name == "octonacci":
        word = octonacci_word(level, len_s, len_l)
        return word, word
    if name == "thue-morse":
        word = thue_morse_word(level, len_s, len_l)
        return word, word
    if name == "counterexample":
        try:
            m = int(arg)
        except ValueError:
            raise InvalidParams(f"counterexample level must be an integer, got '{arg}'")
        return counterexample_words(m, len_s, len_l)
    if name == "custom":
        word = SpacingWord.from_string(arg, len_s, len_l)
        return word, word
    raise InvalidParams(f"unknown word option '{option}' "
                        f"(expected fibonacci, octonacci, thue-morse, counterexample:<m> or custom:<SL>)")


def bigrid_s_max(len_s: float, len_l: float, alpha: float) -> float:
    """Deviation bound for paths of a balanced bigrid: (lenL + lenS) sin(alpha) / 2."""
    return 0.5 * (len_l + len_s) * math.sin(alpha) + 1e-9


def ammann_grid(radius: float, rng: np.random.Generator, len_s: float = 1.0, len_l: float = GOLDEN_RATIO,
                gp_tolerance: float = 1e-7) -> Multigrid:
    """
    Five Fibonacci-spaced families with normals at pi*i/5. Family i has its
    line 0 at t.n_i for a seeded translation t, and gap k is the Fibonacci
    grid symbol k with a seeded phase.
    """
    translation = rng.uniform(-0.5, 0.5, size=2)
    phases = rng.uniform(0.0, 1.0, size=5)
    reach = int(math.ceil(radius * math.sqrt(2) / len_s)) + 2
    families = []
    for i in range(5):
        angle = math.pi * i / 5
        normal = np.array([math.cos(angle), math.sin(angle)])
        word = fibonacci_grid(float(phases[i]), -reach, 2 * reach, len_s, len_l)
        families.append(LineFamily(angle, float(translation @ normal), WordSpacing(word, origin=reach)))
    return Multigrid(tuple(families), gp_tolerance)


def _tiling_drawing(t: p3.PenroseTiling) -> OrientedDrawing:
    """Rhomb edges of a P3 patch as a drawing, stored in corner order."""
    pos = t.positions
    ev = t.edge_vertices
    family = gdm.tiling_edge_star_index(pos[ev[:, 1]] - pos[ev[:, 0]], p3.PENTAGRID_STAR) if len(ev) else None
    return OrientedDrawing(
        positions=pos, tails=ev[:, 0], heads=ev[:, 1], boundary=t.boundary_vertices,
        edge_family=family, num_families=5, up=np.asarray(p3.DEFAULT_UP),
    )


class PatternEngine:
    """Runs generators with retry-on-degeneracy and wraps results in documents."""

    def __init__(self, settings: Optional[GenerationSettings] = None):
        self.settings = settings or GenerationSettings()
        self.logger = logging.getLogger(__name__)
        self._generators: Dict[str, Callable[[GenerationRequest, int], PatternDocument]] = {
            "bigrid": self._generate_bigrid,
            "p3-gdm": self._generate_p3_gdm,
            "p3-deflate": self._generate_p3_deflate,
            "p3-dual": self._generate_p3_dual,
            "ammann": self._generate_ammann,
            "multigrid-n": self._generate_multigrid,
        }

    def generate(self, request: GenerationRequest, seed: Optional[int] = None) -> PatternDocument:
        """
        Build the document for one generator request.

        Raises:
            InvalidParams: If the kind or its parameters are invalid
            DegenerateIntersection: If the grid is degenerate and perturbation is off
                or does not help
        """
        seed = self.settings.seed if seed is None else seed
        if request.kind not in self._generators:
            raise InvalidParams(f"unknown generator '{request.kind}' (expected one of {', '.join(GENERATOR_KINDS)})")
        if not self.settings.radius > 0:
            raise InvalidParams(f"radius must be positive, got {self.settings.radius}")

        start = time.time()
        GenerationLifecycleLogger.log_generation_start(request.kind, seed, self._parameters(request))
        try:
            doc = self._generators[request.kind](request, seed)
        except Exception as e:
            GenerationLifecycleLogger.log_generation_failed(request.kind, e)
            raise
        GenerationLifecycleLogger.log_generation_complete(request.kind, len(doc.vertices), len(doc.edges), start)
        return doc

    def _parameters(self, request: GenerationRequest) -> Dict[str, Any]:
        s = self.settings
        params: Dict[str, Any] = {"radius": s.radius, "gpTolerance": s.gp_tolerance}
        if request.kind == "bigrid":
            params.update(alphaDegrees=s.alpha_degrees, lenS=s.len_s, lenL=s.len_l, word=request.word,
                          level=self._level(request))
        elif request.kind == "p3-deflate":
            params = {"seedPatch": request.seed_patch, "steps": request.steps}
        elif request.kind == "multigrid-n":
            params["families"] = request.families
        elif request.kind == "ammann":
            params.update(lenS=s.len_s, lenL=s.len_l)
        if request.offsets is not None and request.kind in ("p3-gdm", "p3-dual", "multigrid-n", "bigrid"):
            params["offsets"] = [float(o) for o in request.offsets]
        return params

    def _level(self, request: GenerationRequest) -> int:
        return self.settings.fibonacci_level if request.level is None else request.level

    def _metadata(self, request: GenerationRequest, seed: int, **extra) -> Dict[str, Any]:
        metadata = {"generator": request.kind, "seed": seed, "parameters": self._parameters(request)}
        metadata.update(extra)
        return metadata

    def _with_retry(self, kind: str, grid: Multigrid, seed: int, build: Callable[[Multigrid], Any]) -> Any:
        """Call build(grid), jittering the offsets on degenerate crossings when perturbation is enabled."""
        rng = np.random.default_rng([seed, 0x5EED])
        attempt = 0
        while True:
            try:
                return build(grid)
            except DegenerateIntersection as e:
                attempt += 1
                if not self.settings.perturb or attempt > MAX_PERTURB_ATTEMPTS:
                    raise
                GenerationLifecycleLogger.log_perturb_retry(kind, attempt, e)
                grid = perturb_offsets(grid, rng)

    def _generate_bigrid(self, request: GenerationRequest, seed: int) -> PatternDocument:
        s = self.settings
        alpha = math.radians(s.alpha_degrees)
        word_a, word_b = parse_word_option(request.word, self._level(request), s.len_s, s.len_l)
        offsets = tuple(request.offsets) if request.offsets is not None else (0.0, 0.0)
        if len(offsets) != 2:
            raise InvalidParams(f"a bigrid takes 2 offsets, got {len(offsets)}")
        grid = bigrid(word_a, word_b, alpha, offsets, s.gp_tolerance)
        arrangement = self._with_retry(request.kind, grid, seed,
                                       lambda g: build_arrangement(g, clip_from_radius(s.radius)))
        drawing = assign_down_orientation(arrangement, BIGRID_UP)
        metadata = self._metadata(request, seed, wordA=str(word_a), wordB=str(word_b),
                                  sMax=bigrid_s_max(s.len_s, s.len_l, alpha))
        return document_from_drawing(drawing, metadata)

    def _pentagrid_tiling(self, request: GenerationRequest, seed: int) -> p3.PenroseTiling:
        s = self.settings
        offsets = request.offsets
        if offsets is None:
            offsets = gdm.default_offsets(5, np.random.default_rng(seed))
        grid = multigrid(5, offsets, gp_tolerance=s.gp_tolerance)
        clip = clip_from_radius(s.radius)

        def dual(g: Multigrid) -> Tuple[Multigrid, Optional[gdm.RhombTiling]]:
            try:
                return g, gdm.gdm_dual(g, clip)
            except EmptyArrangement:
                return g, None

        final, rhombs = self._with_retry(request.kind, grid, seed, dual)
        return p3.p3_from_pentagrid(final, rhombs, jittered=final is not grid)

    def _generate_p3_gdm(self, request: GenerationRequest, seed: int) -> PatternDocument:
        t = self._pentagrid_tiling(request, seed)
        metadata = self._metadata(request, seed, provenance=t.provenance.to_dict(), indexOffset=t.index_offset)
        return document_from_drawing(_tiling_drawing(t), metadata, tiles=t.tile_records())

    def _generate_p3_deflate(self, request: GenerationRequest, seed: int) -> PatternDocument:
        if request.seed_patch not in p3.SEED_NAMES:
            raise InvalidParams(f"unknown seed patch '{request.seed_patch}' (expected one of {', '.join(p3.SEED_NAMES)})")
        if request.steps < 0:
            raise InvalidParams(f"deflation steps must be non-negative, got {request.steps}")
        t = p3.deflate(p3.seed_patch(request.seed_patch), request.steps)
        metadata = self._metadata(request, seed, provenance=t.provenance.to_dict(), indexOffset=t.index_offset,
                                  fragments=int(len(t.fragment_ids)))
        return document_from_drawing(_tiling_drawing(t), metadata, tiles=t.tile_records())

    def _generate_p3_dual(self, request: GenerationRequest, seed: int) -> PatternDocument:
        t = self._pentagrid_tiling(request, seed)
        drawing = p3.centroid_dual(t, p3.DEFAULT_UP)
        metadata = self._metadata(request, seed, provenance=t.provenance.to_dict(), indexOffset=t.index_offset)
        return document_from_drawing(drawing, metadata, tiles=t.tile_records())

    def _generate_ammann(self, request: GenerationRequest, seed: int) -> PatternDocument:
        s = self.settings
        grid = ammann_grid(s.radius, np.random.default_rng(seed), s.len_s, s.len_l, s.gp_tolerance)
        arrangement = self._with_retry(request.kind, grid, seed,
                                       lambda g: build_arrangement(g, clip_from_radius(s.radius)))
        drawing = assign_down_orientation(arrangement, AMMANN_UP)
        return document_from_drawing(drawing, self._metadata(request, seed))

    def _generate_multigrid(self, request: GenerationRequest, seed: int) -> PatternDocument:
        s = self.settings
        n = request.families
        if not isinstance(n, int) or n < 2:
            raise InvalidParams(f"a multigrid needs at least 2 families, got {n}")
        offsets = request.offsets
        if offsets is None:
            offsets = gdm.default_offsets(n, np.random.default_rng(seed))
        grid = multigrid(n, offsets, gp_tolerance=s.gp_tolerance)
        tiling = self._with_retry(request.kind, grid, seed, lambda g: gdm.gdm_dual(g, clip_from_radius(s.radius)))
        drawing = gdm.centroid_dual(tiling, p3.DEFAULT_UP)
        return document_from_drawing(drawing, self._metadata(request, seed))


def default_s_max(doc: PatternDocument, thresholds: VerificationThresholds) -> Optional[float]:
    """
    C4 bound for a document: an explicit threshold wins, then the bound the
    generator recorded, then the frozen value for the generator kind.
    """
    if thresholds.s_max is not None:
        return thresholds.s_max
    recorded = doc.metadata.get("sMax")
    if isinstance(recorded, (int, float)):
        return float(recorded)
    frozen = {
        "p3-dual": thresholds.s_max_p3_dual,
        "ammann": thresholds.s_max_ammann,
        "multigrid-n": thresholds.s_max_multigrid,
    }
    return frozen.get(doc.kind)


def verify_document(doc: PatternDocument, thresholds: Optional[VerificationThresholds] = None,
                    annotate: bool = False) -> Tuple[VerificationReport, PatternDocument]:
    """Run C0-C4 on a document's drawing; with annotate the report is embedded in the returned copy."""
    thresholds = thresholds or VerificationThresholds()
    report = verify_all(drawing_from_document(doc), thresholds, default_s_max(doc, thresholds))
    if annotate:
        doc = replace(doc, verification=report.to_dict())
    return report, doc


def partition_document(doc: PatternDocument) -> PatternDocument:
    """
    Copy of doc annotated with edgeToPath.

    Raises:
        C1Violation: If some interior vertex is not 2-in/2-out with consecutive out-edges
    """
    partition = osculating_partition(drawing_from_document(doc))
    logger.info(f"Partitioned {len(doc.edges)} edges into {len(partition.paths)} osculating paths")
    return replace(doc, edge_to_path=[int(p) for p in partition.edge_to_path])


def braid_document(doc: PatternDocument, braid_map: BraidMap) -> PatternDocument:
    """
    Copy of doc with a braid word on every interior vertex.

    Raises:
        UnmappedClass: If some vertex class has no word and the map has no default
    """
    drawing = drawing_from_document(doc)
    twists = doc.edge_twists if doc.edge_twists is not None else [0] * len(doc.edges)
    pattern = assign_braids(drawing, braid_map, EdgeTwistLabel(np.asarray(twists, dtype=np.int64)))
    return replace(doc, edge_twists=[int(x) for x in pattern.edge_labels.twists],
                   vertex_words=pattern.words_as_strings())


def document_stats(doc: PatternDocument, interior_only: bool = True) -> Dict[str, Any]:
    """Face-shape classes and local vertex classes of a document's drawing."""
    drawing = drawing_from_document(doc)
    faces = drawing.bounded_faces()
    if interior_only:
        faces = [f for f in faces if not drawing.boundary[f].any()]
    classes = face_shape_classes(drawing, faces)
    stats: Dict[str, Any] = {
        "generator": doc.kind,
        "vertices": len(doc.vertices),
        "edges": len(doc.edges),
        "interiorVertices": int((~drawing.boundary).sum()),
        "faces": len(faces),
        "faceShapeClasses": len(classes),
        "faceClassSizes": [len(c.members) for c in classes],
    }
    if drawing.num_families and (drawing.edge_family >= 0).all():
        counts = local_class_counts(drawing)
        stats["vertexClasses"] = len(counts)
        stats["vertexClassCounts"] = counts
    return stats
