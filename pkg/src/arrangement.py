"""
Line multigrids and their intersection drawings.

A multigrid is a list of parallel line families; its arrangement drawing has
a vertex at every crossing inside a clip rectangle and an edge between
consecutive crossings along each line. Orienting every edge downward turns
the drawing into a candidate lace ground.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DegenerateIntersection, EmptyArrangement, HorizontalEdge, IndexOutOfRange,
    InvalidParams, ParallelLines,
)
from .words import SpacingWord

logger = logging.getLogger(__name__)

Clip = Tuple[float, float, float, float]

DEFAULT_TOLERANCE = 1e-9
DEFAULT_GP_TOLERANCE = 1e-7
ANGULAR_TOLERANCE = 1e-9


def clip_from_radius(radius: float) -> Clip:
    """Square clip of half-width radius centred on the origin."""
    if radius <= 0:
        raise InvalidParams(f"radius must be positive, got {radius}")
    return (-radius, -radius, radius, radius)


def _check_clip(clip: Clip) -> None:
    xmin, ymin, xmax, ymax = clip
    if not (xmax > xmin and ymax > ymin):
        raise InvalidParams(f"clip rectangle is degenerate: {clip}")


@dataclass(frozen=True)
class ConstantSpacing:
    """Equal gaps between consecutive lines."""
    step: float = 1.0

    def __post_init__(self):
        if self.step <= 0:
            raise InvalidParams(f"line spacing must be positive, got {self.step}")


@dataclass(frozen=True)
class WordSpacing:
    """
    Gaps read from a spacing word: the gap between lines k and k+1 is the
    symbol at word position origin + k. origin defaults to the word's middle.
    """
    word: SpacingWord
    origin: Optional[int] = None

    def __post_init__(self):
        if len(self.word) == 0:
            raise InvalidParams("word spacing needs a non-empty word")
        if self.origin is not None and not 0 <= self.origin <= len(self.word):
            raise InvalidParams(f"word origin {self.origin} outside word of length {len(self.word)}")

    @property
    def anchor(self) -> int:
        return len(self.word) // 2 if self.origin is None else self.origin

    @cached_property
    def prefix(self) -> np.ndarray:
        return np.concatenate(([0.0], np.cumsum(self.word.lengths())))


Spacing = Union[ConstantSpacing, WordSpacing]


@dataclass(frozen=True)
class LineFamily:
    """Parallel lines x . n = position(k) sharing the unit normal n."""
    normal_angle: float
    offset: float = 0.0
    spacing: Spacing = field(default_factory=ConstantSpacing)
    index_range: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if self.index_range is not None and self.index_range[1] < self.index_range[0]:
            raise InvalidParams(f"index range {self.index_range} is empty")

    @property
    def normal(self) -> np.ndarray:
        return np.array([math.cos(self.normal_angle), math.sin(self.normal_angle)])

    @property
    def direction(self) -> np.ndarray:
        """Unit vector along the lines: the normal turned a quarter counterclockwise."""
        return np.array([-math.sin(self.normal_angle), math.cos(self.normal_angle)])

    def valid_range(self) -> Tuple[Optional[int], Optional[int]]:
        lo, hi = (None, None) if self.index_range is None else self.index_range
        if isinstance(self.spacing, WordSpacing):
            anchor = self.spacing.anchor
            word_lo, word_hi = -anchor, len(self.spacing.word) - anchor
            lo = word_lo if lo is None else max(lo, word_lo)
            hi = word_hi if hi is None else min(hi, word_hi)
        return lo, hi

    def positions(self, ks: np.ndarray) -> np.ndarray:
        """Signed offsets of lines ks along the normal (no range check)."""
        ks = np.asarray(ks)
        if isinstance(self.spacing, ConstantSpacing):
            return self.offset + ks * self.spacing.step
        anchor = self.spacing.anchor
        prefix = self.spacing.prefix
        return self.offset + prefix[anchor + ks] - prefix[anchor]

    def lines_covering(self, lo: float, hi: float) -> np.ndarray:
        """Indices of lines with lo <= position <= hi, respecting the valid range."""
        kmin, kmax = self.valid_range()
        if isinstance(self.spacing, ConstantSpacing):
            step = self.spacing.step
            first = math.floor((lo - self.offset) / step) - 1
            last = math.ceil((hi - self.offset) / step) + 1
            if kmin is not None:
                first = max(first, kmin)
            if kmax is not None:
                last = min(last, kmax)
            ks = np.arange(first, last + 1)
        else:
            ks = np.arange(kmin, kmax + 1)
        if ks.size == 0:
            return ks
        pos = self.positions(ks)
        return ks[(pos >= lo) & (pos <= hi)]


@dataclass(frozen=True)
class Line:
    """A single line x . n = position with n at normal_angle."""
    normal_angle: float
    position: float


def line_position(family: LineFamily, k: int) -> float:
    """
    Offset of line k of the family along its normal. Line 0 sits at the
    family offset; for word spacing it is anchored at the word's middle
    symbol unless WordSpacing.origin says otherwise, so negative k are valid.
    """
    kmin, kmax = family.valid_range()
    if (kmin is not None and k < kmin) or (kmax is not None and k > kmax):
        raise IndexOutOfRange(f"line index {k} outside [{kmin}, {kmax}]")
    return float(family.positions(np.array([k]))[0])


def family_line(family: LineFamily, k: int) -> Line:
    return Line(family.normal_angle, line_position(family, k))


def intersect(line_a: Line, line_b: Line, tolerance: float = ANGULAR_TOLERANCE) -> np.ndarray:
    """Unique common point of two non-parallel lines."""
    det = math.sin(line_b.normal_angle - line_a.normal_angle)
    if abs(det) <= tolerance:
        raise ParallelLines(
            f"lines with normal angles {line_a.normal_angle:.6f} and {line_b.normal_angle:.6f} are parallel"
        )
    ax, ay = math.cos(line_a.normal_angle), math.sin(line_a.normal_angle)
    bx, by = math.cos(line_b.normal_angle), math.sin(line_b.normal_angle)
    ca, cb = line_a.position, line_b.position
    return np.array([(ca * by - cb * ay) / det, (cb * ax - ca * bx) / det])


def star_vectors(n: int) -> List[float]:
    """Normal angles of an n-fold star: 2*pi*i/n for odd n, pi*i/n for even n."""
    if n < 2:
        raise InvalidParams(f"a multigrid needs at least 2 families, got {n}")
    base = 2 * math.pi / n if n % 2 else math.pi / n
    return [i * base for i in range(n)]


@dataclass(frozen=True)
class Multigrid:
    """Ordered line families plus the general-position tolerance."""
    families: Tuple[LineFamily, ...]
    gp_tolerance: float = DEFAULT_GP_TOLERANCE

    def __post_init__(self):
        if len(self.families) < 2:
            raise InvalidParams("a multigrid needs at least two line families")
        angles = [f.normal_angle for f in self.families]
        for a in range(len(angles)):
            for b in range(a + 1, len(angles)):
                if abs(math.sin(angles[b] - angles[a])) <= ANGULAR_TOLERANCE:
                    raise InvalidParams(f"families {a} and {b} share a line direction")

    @property
    def star(self) -> np.ndarray:
        """One unit vector per family, orthogonal to its lines."""
        return np.array([f.normal for f in self.families])

    @property
    def directions(self) -> np.ndarray:
        return np.array([f.direction for f in self.families])

    @property
    def offsets(self) -> List[float]:
        return [f.offset for f in self.families]

    def with_offsets(self, offsets: Sequence[float]) -> "Multigrid":
        families = tuple(replace(f, offset=float(o)) for f, o in zip(self.families, offsets))
        return replace(self, families=families)


def multigrid(n: int, offsets: Optional[Sequence[float]] = None, spacing: Spacing = ConstantSpacing(),
              gp_tolerance: float = DEFAULT_GP_TOLERANCE) -> Multigrid:
    """n families over the standard star with the given offsets."""
    angles = star_vectors(n)
    offsets = [0.0] * n if offsets is None else list(offsets)
    if len(offsets) != n:
        raise InvalidParams(f"expected {n} offsets, got {len(offsets)}")
    return Multigrid(tuple(LineFamily(a, o, spacing) for a, o in zip(angles, offsets)), gp_tolerance)


def bigrid(word_a: SpacingWord, word_b: Optional[SpacingWord] = None, alpha: float = math.pi / 3,
           offsets: Tuple[float, float] = (0.0, 0.0),
           gp_tolerance: float = DEFAULT_GP_TOLERANCE) -> Multigrid:
    """
    Two word-spaced families whose lines meet at angle alpha, symmetric about
    the vertical so that the angle bisector points up.
    """
    if not 0 < alpha < math.pi / 2 + ANGULAR_TOLERANCE:
        raise InvalidParams(f"bigrid angle must lie in (0, pi/2], got {alpha}")
    word_b = word_a if word_b is None else word_b
    fam_a = LineFamily(-alpha / 2, offsets[0], WordSpacing(word_a))
    fam_b = LineFamily(alpha / 2, offsets[1], WordSpacing(word_b))
    return Multigrid((fam_a, fam_b), gp_tolerance)


def perturb_offsets(grid: Multigrid, rng: np.random.Generator, magnitude: Optional[float] = None) -> Multigrid:
    """Jitter every family offset uniformly by up to magnitude (default 10 gp tolerances)."""
    magnitude = 10 * grid.gp_tolerance if magnitude is None else magnitude
    jitter = rng.uniform(-magnitude, magnitude, size=len(grid.families))
    return grid.with_offsets(np.asarray(grid.offsets) + jitter)


@dataclass(eq=False)
class PlanarDrawing:
    """
    Straight-line drawing of a graph with array storage.

    Edge e runs from tails[e] to heads[e]; for an unoriented drawing that
    direction is only a storage convention. Half-edge 2e leaves tails[e],
    half-edge 2e+1 leaves heads[e].
    """
    positions: np.ndarray
    tails: np.ndarray
    heads: np.ndarray
    boundary: Optional[np.ndarray] = None
    edge_family: Optional[np.ndarray] = None
    num_families: int = 0
    vertex_lines: Optional[np.ndarray] = None
    edge_line: Optional[np.ndarray] = None
    clip: Optional[Clip] = None

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 2)
        self.tails = np.asarray(self.tails, dtype=np.int64).reshape(-1)
        self.heads = np.asarray(self.heads, dtype=np.int64).reshape(-1)
        if self.boundary is None:
            self.boundary = np.zeros(len(self.positions), dtype=bool)
        self.boundary = np.asarray(self.boundary, dtype=bool)
        if self.edge_family is None:
            self.edge_family = np.full(len(self.tails), -1, dtype=np.int64)
        self.edge_family = np.asarray(self.edge_family, dtype=np.int64)

    @classmethod
    def from_lists(cls, points: Sequence[Sequence[float]], edges: Sequence[Tuple[int, int]], **kwargs):
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        return cls(np.asarray(points, dtype=float), edges[:, 0], edges[:, 1], **kwargs)

    @property
    def num_vertices(self) -> int:
        return len(self.positions)

    @property
    def num_edges(self) -> int:
        return len(self.tails)

    @property
    def vertices(self) -> List[Tuple[int, Tuple[float, float]]]:
        return [(i, (float(x), float(y))) for i, (x, y) in enumerate(self.positions)]

    @property
    def edges(self) -> List[Tuple[int, int, int]]:
        return [(e, int(t), int(h)) for e, (t, h) in enumerate(zip(self.tails, self.heads))]

    @property
    def interior(self) -> np.ndarray:
        return ~self.boundary

    def edge_vectors(self) -> np.ndarray:
        return self.positions[self.heads] - self.positions[self.tails]

    def degree(self) -> np.ndarray:
        return np.bincount(np.concatenate((self.tails, self.heads)), minlength=self.num_vertices)

    @cached_property
    def half_edge_origin(self) -> np.ndarray:
        out = np.empty(2 * self.num_edges, dtype=np.int64)
        out[0::2] = self.tails
        out[1::2] = self.heads
        return out

    @cached_property
    def half_edge_dest(self) -> np.ndarray:
        return np.stack((self.heads, self.tails), axis=1).reshape(-1)

    @cached_property
    def _rotation(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        origin = self.half_edge_origin
        vec = self.positions[self.half_edge_dest] - self.positions[origin]
        angle = np.arctan2(vec[:, 1], vec[:, 0])
        order = np.lexsort((angle, origin))
        offsets = np.concatenate(([0], np.cumsum(np.bincount(origin, minlength=self.num_vertices))))
        slot = np.empty_like(order)
        slot[order] = np.arange(len(order)) - offsets[origin[order]]
        return order, offsets, slot

    @property
    def rotation_half_edges(self) -> np.ndarray:
        """Half-edges grouped by origin, counterclockwise by outgoing angle."""
        return self._rotation[0]

    @property
    def rotation_offsets(self) -> np.ndarray:
        return self._rotation[1]

    def rotation(self, v: int) -> List[int]:
        """Edge ids around v in counterclockwise order of their direction away from v."""
        order, offsets, _ = self._rotation
        return [int(h // 2) for h in order[offsets[v]:offsets[v + 1]]]

    @cached_property
    def face_next(self) -> np.ndarray:
        """Successor half-edge along the face to the left of each half-edge."""
        order, offsets, slot = self._rotation
        twin = np.arange(2 * self.num_edges) ^ 1
        at = self.half_edge_dest
        deg = offsets[at + 1] - offsets[at]
        return order[offsets[at] + (slot[twin] - 1) % deg]

    @cached_property
    def _faces(self) -> Tuple[List[np.ndarray], np.ndarray]:
        nxt = self.face_next.tolist()
        origin = self.half_edge_origin
        seen = np.zeros(len(nxt), dtype=bool)
        cycles = []
        for start in range(len(nxt)):
            if seen[start]:
                continue
            cycle = []
            h = start
            while not seen[h]:
                seen[h] = True
                cycle.append(h)
                h = nxt[h]
            cycles.append(np.asarray(cycle, dtype=np.int64))
        areas = np.empty(len(cycles))
        for i, cycle in enumerate(cycles):
            p = self.positions[origin[cycle]]
            q = np.roll(p, -1, axis=0)
            areas[i] = 0.5 * float(np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]))
        return cycles, areas

    def face_cycles(self) -> List[np.ndarray]:
        """All face boundaries as half-edge cycles, outer faces included."""
        return self._faces[0]

    def bounded_faces(self, tolerance: float = DEFAULT_TOLERANCE) -> List[np.ndarray]:
        """Vertex cycles (counterclockwise) of faces with positive area."""
        cycles, areas = self._faces
        origin = self.half_edge_origin
        return [origin[c] for c, a in zip(cycles, areas) if a > tolerance]

    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + len(self.face_cycles())

    def bounding_box(self) -> Clip:
        if self.clip is not None:
            return self.clip
        lo = self.positions.min(axis=0)
        hi = self.positions.max(axis=0)
        return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))

    def _field_values(self) -> dict:
        return dict(
            positions=self.positions, tails=self.tails, heads=self.heads, boundary=self.boundary,
            edge_family=self.edge_family, num_families=self.num_families, vertex_lines=self.vertex_lines,
            edge_line=self.edge_line, clip=self.clip,
        )

    def _copy_with(self, **changes):
        values = self._field_values()
        values.update(changes)
        return type(self)(**values)

    def rotated(self, angle: float, family_shift: int = 0) -> "PlanarDrawing":
        """Copy rotated counterclockwise about the origin, relabelling edge families."""
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        family = self.edge_family
        if family_shift and self.num_families:
            family = np.where(family >= 0, (family + family_shift) % self.num_families, family)
        return self._copy_with(positions=self.positions @ rot.T, edge_family=family, clip=None)


@dataclass(eq=False)
class OrientedDrawing(PlanarDrawing):
    """A drawing whose edges are directed tail -> head, with the chosen up vector."""
    up: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0]))

    def __post_init__(self):
        super().__post_init__()
        up = np.asarray(self.up, dtype=float)
        self.up = up / np.linalg.norm(up)

    def _field_values(self) -> dict:
        values = super()._field_values()
        values["up"] = self.up
        return values

    def rotated(self, angle: float, family_shift: int = 0) -> "OrientedDrawing":
        c, s = math.cos(angle), math.sin(angle)
        turned = super().rotated(angle, family_shift)
        turned.up = np.array([c * self.up[0] - s * self.up[1], s * self.up[0] + c * self.up[1]])
        return turned

    def in_degree(self) -> np.ndarray:
        return np.bincount(self.heads, minlength=self.num_vertices)

    def out_degree(self) -> np.ndarray:
        return np.bincount(self.tails, minlength=self.num_vertices)


def _family_lines(grid: Multigrid, clip: Clip) -> List[Tuple[np.ndarray, np.ndarray]]:
    xmin, ymin, xmax, ymax = clip
    corners = np.array([[xmin, ymin], [xmax, ymin], [xmax, ymax], [xmin, ymax]])
    lines = []
    for family in grid.families:
        proj = corners @ family.normal
        ks = family.lines_covering(float(proj.min()), float(proj.max()))
        lines.append((ks, family.positions(ks) if ks.size else np.empty(0)))
    return lines


def build_arrangement(grid: Multigrid, clip: Clip) -> PlanarDrawing:
    """
    Drawing with a vertex at every line crossing strictly inside clip and an
    edge between consecutive crossings on each line.

    Vertices are ordered by (family A, line A, family B, line B); a vertex is
    flagged boundary when it is the first or last crossing on one of its lines.
    """
    _check_clip(clip)
    xmin, ymin, xmax, ymax = clip
    star = grid.star
    lines = _family_lines(grid, clip)

    chunks = []
    n = len(grid.families)
    for a in range(n):
        ks_a, pos_a = lines[a]
        for b in range(a + 1, n):
            ks_b, pos_b = lines[b]
            if ks_a.size == 0 or ks_b.size == 0:
                continue
            (ax, ay), (bx, by) = star[a], star[b]
            det = ax * by - ay * bx
            ca, cb = np.meshgrid(pos_a, pos_b, indexing="ij")
            x = (ca * by - cb * ay) / det
            y = (cb * ax - ca * bx) / det
            inside = (x > xmin) & (x < xmax) & (y > ymin) & (y < ymax)
            ia, ib = np.nonzero(inside)
            if ia.size == 0:
                continue
            chunks.append(np.column_stack((
                np.full(ia.size, a), ks_a[ia], np.full(ia.size, b), ks_b[ib],
            )).astype(np.int64))
            chunks.append(np.column_stack((x[ia, ib], y[ia, ib])))

    if not chunks:
        raise EmptyArrangement(f"no line crossings inside clip {clip}")
    vertex_lines = np.concatenate(chunks[0::2])
    positions = np.concatenate(chunks[1::2])

    close = cKDTree(positions).query_pairs(grid.gp_tolerance, output_type="ndarray")
    if len(close):
        u, v = close[0]
        raise DegenerateIntersection(
            f"{len(close)} crossing pairs closer than {grid.gp_tolerance:g}; "
            f"first at {positions[u].round(6).tolist()} (lines {vertex_lines[u].tolist()} and {vertex_lines[v].tolist()})"
        )

    num_v = len(positions)
    rec_vertex = np.concatenate((np.arange(num_v), np.arange(num_v)))
    rec_family = np.concatenate((vertex_lines[:, 0], vertex_lines[:, 2]))
    rec_line = np.concatenate((vertex_lines[:, 1], vertex_lines[:, 3]))
    rec_param = np.einsum("ij,ij->i", positions[rec_vertex], grid.directions[rec_family])
    order = np.lexsort((rec_param, rec_line, rec_family))
    rec_vertex, rec_family, rec_line = rec_vertex[order], rec_family[order], rec_line[order]

    same_line = (rec_family[1:] == rec_family[:-1]) & (rec_line[1:] == rec_line[:-1])
    tails = rec_vertex[:-1][same_line]
    heads = rec_vertex[1:][same_line]
    boundary = np.zeros(num_v, dtype=bool)
    first = np.concatenate(([True], ~same_line))
    last = np.concatenate((~same_line, [True]))
    boundary[rec_vertex[first | last]] = True

    logger.debug(f"Arrangement of {n} families: {num_v} vertices, {len(tails)} edges")
    return PlanarDrawing(
        positions=positions, tails=tails, heads=heads, boundary=boundary,
        edge_family=rec_family[:-1][same_line], num_families=n, vertex_lines=vertex_lines,
        edge_line=rec_line[:-1][same_line], clip=tuple(float(c) for c in clip),
    )


def assign_down_orientation(d: PlanarDrawing, up: Sequence[float],
                            tolerance: float = ANGULAR_TOLERANCE) -> OrientedDrawing:
    """Direct every edge so that it has a strictly negative component along up."""
    up = np.asarray(up, dtype=float)
    up = up / np.linalg.norm(up)
    vectors = d.edge_vectors()
    norms = np.linalg.norm(vectors, axis=1)
    component = (vectors @ up) / np.where(norms > 0, norms, 1.0)
    flat = np.nonzero(np.abs(component) <= tolerance)[0]
    if flat.size:
        raise HorizontalEdge(int(flat[0]), f"{flat.size} edges perpendicular to up vector {up.round(6).tolist()}, "
                                           f"first is edge {int(flat[0])}")
    flip = component > 0
    tails = np.where(flip, d.heads, d.tails)
    heads = np.where(flip, d.tails, d.heads)
    return OrientedDrawing(
        positions=d.positions, tails=tails, heads=heads, boundary=d.boundary,
        edge_family=d.edge_family, num_families=d.num_families, vertex_lines=d.vertex_lines,
        edge_line=d.edge_line, clip=d.clip, up=up,
    )
