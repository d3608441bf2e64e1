"""
Penrose rhomb (P3) tilings.

Vertices live on the Z^5 lattice: a vertex with integer coordinates n sits
at sum(n_i e_i) with e_i = (cos 2*pi*i/5, sin 2*pi*i/5). Its index
(sum(n) + index_offset) mod 5 lies in 1..4 for a proper P3 patch, and the
arrow decorations are read off the indices: a tile's corners carry indices
(b, b+1, b+2, b+1) with b in {1, 2}. Edges joining indices {1, 2} or {3, 4}
carry a single arrow pointing away from index 1 or 4; edges joining {2, 3}
carry a double arrow from 2 to 3. Deflation acts exactly on the integer
coordinates, so vertex identity never depends on float comparison.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import IntEnum
from functools import cached_property, lru_cache
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
import shapely
from shapely.geometry import Polygon
from shapely.ops import unary_union

from .arrangement import DEFAULT_GP_TOLERANCE, Multigrid, OrientedDrawing, clip_from_radius, multigrid
from .errors import (
    BoundaryVertex, EmptyArrangement, IncompleteNeighbourhood, InvalidParams, MatchingViolationInInput,
    UnknownConfiguration,
)
from .gdm import RhombTiling, default_offsets, edge_table, gdm_dual
from .lacecheck import FaceClass, face_shape_classes, osculating_partition
from .models import GOLDEN_RATIO

logger = logging.getLogger(__name__)

TAU = GOLDEN_RATIO
ANGLE_UNIT = math.pi / 5
PENTAGRID_STAR = np.array([[math.cos(2 * math.pi * i / 5), math.sin(2 * math.pi * i / 5)] for i in range(5)])
DEFAULT_UP = (-math.sin(0.07), math.cos(0.07))

REFERENCE_RADIUS = 14.0
REFERENCE_OFFSETS = (0.1377, -0.2519, 0.3023, -0.0741, -0.1140)


class TileKind(IntEnum):
    THIN = 0
    THICK = 1

    @property
    def label(self) -> str:
        return self.name.capitalize()


class ArrowShape(IntEnum):
    NONE = 0
    SINGLE = 1
    DOUBLE = 2


# side s joins corners s and s+1; corner 0 is the single-arrow corner
_SIDE_SHAPES = np.array([ArrowShape.SINGLE, ArrowShape.DOUBLE, ArrowShape.DOUBLE, ArrowShape.SINGLE], dtype=np.int64)
_SIDE_SENSES = {
    1: np.array([1, 1, -1, -1]),
    2: np.array([1, -1, 1, -1]),
}


@dataclass(frozen=True)
class DecoratedPrototile:
    """Unit rhomb with corner 0 at the origin and side 0 along the x axis."""
    kind: TileKind
    variant: int
    edge_marks: Tuple[Tuple[ArrowShape, int], ...]

    @property
    def acute_angle(self) -> float:
        return ANGLE_UNIT if self.kind == TileKind.THIN else 2 * ANGLE_UNIT

    @property
    def corner_angle(self) -> float:
        """Interior angle at corner 0: acute for thick, obtuse for thin."""
        return 2 * ANGLE_UNIT if self.kind == TileKind.THICK else 4 * ANGLE_UNIT

    @property
    def corners(self) -> np.ndarray:
        side = np.array([math.cos(self.corner_angle), math.sin(self.corner_angle)])
        return np.array([[0.0, 0.0], [1.0, 0.0], [1.0 + side[0], side[1]], side])


@lru_cache(maxsize=None)
def prototile(kind: TileKind, variant: int) -> DecoratedPrototile:
    if variant not in _SIDE_SENSES:
        raise InvalidParams(f"prototile variant must be 1 or 2, got {variant}")
    marks = tuple((ArrowShape(int(s)), int(d)) for s, d in zip(_SIDE_SHAPES, _SIDE_SENSES[variant]))
    return DecoratedPrototile(TileKind(kind), variant, marks)


@dataclass(frozen=True)
class PlacedTile:
    tile_id: int
    prototile: Optional[DecoratedPrototile]
    kind: TileKind
    rotation: int
    translation: Tuple[float, float]
    corners: Tuple[Tuple[float, float], ...]

    def pose_error(self) -> float:
        """Largest distance between the posed prototile corners and the stored corners."""
        if self.prototile is None:
            return math.inf
        angle = self.rotation * ANGLE_UNIT
        c, s = math.cos(angle), math.sin(angle)
        posed = self.prototile.corners @ np.array([[c, s], [-s, c]]) + np.asarray(self.translation)
        return float(np.abs(posed - np.asarray(self.corners)).max())


@dataclass(frozen=True)
class TilingProvenance:
    source: str
    steps: int = 0
    seed_name: Optional[str] = None
    rhomb_tiling: Optional[RhombTiling] = field(default=None, compare=False, repr=False)

    def to_dict(self) -> Dict:
        data = {"source": self.source}
        if self.source == "deflation":
            data["steps"] = self.steps
        if self.seed_name is not None:
            data["seed"] = self.seed_name
        return data


@dataclass(frozen=True)
class MatchingViolation:
    edge: Tuple[int, int]
    tiles: Tuple[int, int]
    marks: Tuple[Tuple[int, int], Tuple[int, int]]


@dataclass(frozen=True)
class VertexConfigClass:
    class_id: int
    canonical_wedges: Tuple[Tuple[int, int, int], ...]


@dataclass(frozen=True)
class CentralTileConfig:
    class_id: int
    central_tile: int
    neighbours: Tuple[int, int, int, int]
    key: Tuple
    decoration: Tuple[int, ...]


def _scale(coords: np.ndarray) -> np.ndarray:
    """Multiplication by tau on Z^5: tau e_k = -(e_{k+2} + e_{k+3})."""
    return -(np.roll(coords, 2, axis=-1) + np.roll(coords, 3, axis=-1))


def _canonical_vertices(flat_coords: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Unique vertices modulo (1,1,1,1,1) and the vertex id of every input row."""
    if len(flat_coords) == 0:
        return np.empty((0, 5), dtype=np.int64), np.empty(0, dtype=np.int64)
    canon = flat_coords - flat_coords[:, 4:5]
    vertices, inverse = np.unique(canon, axis=0, return_inverse=True)
    return vertices, inverse.reshape(-1)


@dataclass(eq=False)
class PenroseTiling:
    """
    Rhomb patch on the Z^5 lattice.

    Tile corners are stored counterclockwise starting at the single-arrow
    corner. Tiles whose corner indices do not follow the P3 pattern stay
    undecorated (variant 0). Fragments are half-rhombs left unpaired at the
    rim of a deflated patch.
    """
    vertex_coords: np.ndarray
    index_offset: int
    corner_ids: np.ndarray
    fragment_ids: np.ndarray = field(default_factory=lambda: np.empty((0, 3), dtype=np.int64))
    fragment_kinds: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    provenance: TilingProvenance = field(default_factory=lambda: TilingProvenance("explicit"))
    flipped_sides: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        self.vertex_coords = np.asarray(self.vertex_coords, dtype=np.int64).reshape(-1, 5)
        self.index_offset = int(self.index_offset) % 5
        self.corner_ids = np.asarray(self.corner_ids, dtype=np.int64).reshape(-1, 4)
        self.fragment_ids = np.asarray(self.fragment_ids, dtype=np.int64).reshape(-1, 3)
        self.fragment_kinds = np.asarray(self.fragment_kinds, dtype=np.int64).reshape(-1)
        self.corner_ids, self.kinds, self.variants = self._orient()

    def _orient(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        ids = self.corner_ids
        num = len(ids)
        if num == 0:
            return ids, np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        p = self.positions[ids]
        clockwise = _cross(p[:, 1] - p[:, 0], p[:, 3] - p[:, 0]) < 0
        ids = np.where(clockwise[:, None], ids[:, [0, 3, 2, 1]], ids)

        idx = self.vertex_index[ids]
        shift = np.full(num, -1, dtype=np.int64)
        variant = np.zeros(num, dtype=np.int64)
        for r in range(4):
            c, s1, o, s2 = (idx[:, (r + q) % 4] for q in range(4))
            low = (c == 1) & (s1 == 2) & (o == 3) & (s2 == 2)
            high = (c == 4) & (s1 == 3) & (o == 2) & (s2 == 3)
            hit = (shift < 0) & (low | high)
            shift[hit] = r
            variant[hit] = np.where(low[hit], 1, 2)
        roll = np.maximum(shift, 0)
        rows = np.arange(num)[:, None]
        ids = ids[rows, (roll[:, None] + np.arange(4)) % 4]

        p = self.positions[ids]
        u, w = p[:, 1] - p[:, 0], p[:, 3] - p[:, 0]
        cosine = np.einsum("ij,ij->i", u, w) / (np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1))
        kinds = np.where(np.abs(cosine) < 0.559, TileKind.THICK, TileKind.THIN).astype(np.int64)
        consistent = np.where(kinds == TileKind.THICK, cosine > 0, cosine < 0)
        clash = (variant > 0) & ~consistent
        if clash.any():
            logger.warning(f"{int(clash.sum())} tiles have corner indices that contradict their shape")
            variant[clash] = 0
        undecorated = int((variant == 0).sum())
        if undecorated:
            logger.warning(f"{undecorated} of {num} tiles carry no P3 decoration")
        return ids, kinds, variant

    # -- geometry ---------------------------------------------------------

    @property
    def num_tiles(self) -> int:
        return len(self.corner_ids)

    @cached_property
    def positions(self) -> np.ndarray:
        return self.vertex_coords.astype(float) @ PENTAGRID_STAR

    @cached_property
    def vertex_index(self) -> np.ndarray:
        return (self.vertex_coords.sum(axis=1) + self.index_offset) % 5

    @property
    def corners(self) -> np.ndarray:
        return self.positions[self.corner_ids]

    @property
    def centroids(self) -> np.ndarray:
        return self.corners.mean(axis=1)

    @cached_property
    def corner_units(self) -> np.ndarray:
        """Interior angle at every corner in multiples of pi/5."""
        p = self.corners
        ahead = np.roll(p, -1, axis=1) - p
        behind = np.roll(p, 1, axis=1) - p
        cosine = np.einsum("tki,tki->tk", ahead, behind) / (
            np.linalg.norm(ahead, axis=2) * np.linalg.norm(behind, axis=2))
        return np.rint(np.arccos(np.clip(cosine, -1.0, 1.0)) / ANGLE_UNIT).astype(np.int64)

    @cached_property
    def side_angles(self) -> np.ndarray:
        ahead = np.roll(self.corners, -1, axis=1) - self.corners
        return np.arctan2(ahead[..., 1], ahead[..., 0])

    def tile_areas(self) -> np.ndarray:
        sines = np.where(self.kinds == TileKind.THICK, math.sin(2 * ANGLE_UNIT), math.sin(ANGLE_UNIT))
        return sines.astype(float)

    def total_area(self) -> float:
        """Area of all tiles plus rim fragments."""
        halves = np.where(self.fragment_kinds == TileKind.THICK, math.sin(2 * ANGLE_UNIT), math.sin(ANGLE_UNIT)) / 2
        return float(self.tile_areas().sum() + halves.sum())

    # -- combinatorics ----------------------------------------------------

    @cached_property
    def _edges(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self.num_tiles == 0:
            empty = np.empty((0, 2), dtype=np.int64)
            return empty, np.empty((0, 4), dtype=np.int64), empty
        return edge_table(self.corner_ids)

    @property
    def edge_vertices(self) -> np.ndarray:
        return self._edges[0]

    @property
    def tile_edges(self) -> np.ndarray:
        return self._edges[1]

    @property
    def edge_tiles(self) -> np.ndarray:
        return self._edges[2]

    @property
    def adjacency(self) -> Dict[Tuple[int, int], Tuple[int, int]]:
        shared = np.nonzero(self.edge_tiles[:, 1] >= 0)[0]
        return {
            (int(self.edge_vertices[e, 0]), int(self.edge_vertices[e, 1])):
                (int(self.edge_tiles[e, 0]), int(self.edge_tiles[e, 1]))
            for e in shared
        }

    def neighbour_counts(self) -> np.ndarray:
        shared = self.edge_tiles[:, 1] >= 0
        return shared[self.tile_edges].sum(axis=1) if self.num_tiles else np.empty(0, dtype=np.int64)

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        mask = np.zeros(len(self.vertex_coords), dtype=bool)
        rim = self.edge_tiles[:, 1] < 0
        mask[self.edge_vertices[rim].reshape(-1)] = True
        return mask

    @cached_property
    def _vertex_corner_index(self) -> Tuple[np.ndarray, np.ndarray]:
        flat = self.corner_ids.reshape(-1)
        order = np.argsort(flat, kind="stable")
        counts = np.bincount(flat, minlength=len(self.vertex_coords))
        return order, np.concatenate(([0], np.cumsum(counts)))

    def vertex_corners(self, v: int) -> Tuple[np.ndarray, np.ndarray]:
        """Tiles meeting at v and the corner slot of v in each."""
        order, offsets = self._vertex_corner_index
        flat = order[offsets[v]:offsets[v + 1]]
        return flat // 4, flat % 4

    # -- decorations ------------------------------------------------------

    @cached_property
    def arrow_shapes(self) -> np.ndarray:
        shapes = np.where(self.variants[:, None] > 0, _SIDE_SHAPES[None, :], ArrowShape.NONE)
        return shapes.astype(np.int64)

    @cached_property
    def arrow_senses(self) -> np.ndarray:
        senses = np.zeros((self.num_tiles, 4), dtype=np.int64)
        for variant, pattern in _SIDE_SENSES.items():
            senses[self.variants == variant] = pattern
        for tile, side in self.flipped_sides:
            senses[tile, side] *= -1
        return senses

    @property
    def arrow_heads(self) -> np.ndarray:
        """Vertex each side's arrow points at."""
        ahead = np.roll(self.corner_ids, -1, axis=1)
        return np.where(self.arrow_senses > 0, ahead, self.corner_ids)

    def flip_arrow(self, tile: int, side: int) -> "PenroseTiling":
        """Copy with the arrow on one tile side reversed."""
        return replace(self, flipped_sides=self.flipped_sides + ((int(tile), int(side)),))

    @property
    def tiles(self) -> List[PlacedTile]:
        out = []
        corners = self.corners
        for i in range(self.num_tiles):
            kind = TileKind(int(self.kinds[i]))
            variant = int(self.variants[i])
            c = corners[i]
            heading = math.atan2(c[1, 1] - c[0, 1], c[1, 0] - c[0, 0])
            out.append(PlacedTile(
                tile_id=i,
                prototile=prototile(kind, variant) if variant else None,
                kind=kind,
                rotation=int(round(heading / ANGLE_UNIT)) % 10,
                translation=(float(c[0, 0]), float(c[0, 1])),
                corners=tuple((float(x), float(y)) for x, y in c),
            ))
        return out

    def tile_records(self) -> List[Dict]:
        """JSON-ready description of every tile."""
        records = []
        for tile in self.tiles:
            records.append({
                "id": tile.tile_id,
                "kind": tile.kind.label,
                "rotation": tile.rotation,
                "translation": [round(v, 9) for v in tile.translation],
                "corners": [[round(x, 9), round(y, 9)] for x, y in tile.corners],
                "decoration": [[int(s), int(d)] for s, d in
                               zip(self.arrow_shapes[tile.tile_id], self.arrow_senses[tile.tile_id])],
            })
        return records


def _cross(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    return u[..., 0] * w[..., 1] - u[..., 1] * w[..., 0]


def tiling_from_corners(corner_coords: np.ndarray, index_offset: int,
                        provenance: Optional[TilingProvenance] = None) -> PenroseTiling:
    """Patch from explicit Z^5 corner coordinates, shape (T, 4, 5), counterclockwise."""
    corner_coords = np.asarray(corner_coords, dtype=np.int64).reshape(-1, 4, 5)
    vertices, inverse = _canonical_vertices(corner_coords.reshape(-1, 5))
    return PenroseTiling(
        vertex_coords=vertices, index_offset=index_offset, corner_ids=inverse.reshape(-1, 4),
        provenance=provenance or TilingProvenance("explicit"),
    )


def _unit(i: int) -> np.ndarray:
    e = np.zeros(5, dtype=np.int64)
    e[i % 5] = 1
    return e


def seed_patch(name: str) -> PenroseTiling:
    """
    Small decorated patches to deflate from: a single thick or thin rhomb,
    or five thick rhombs meeting at a single-arrow (sun) or double-arrow
    (star) centre.
    """
    zero = np.zeros(5, dtype=np.int64)
    e = [_unit(i) for i in range(5)]
    if name == "thick":
        tiles, offset = [[zero, e[0], e[0] + e[1], e[1]]], 1
    elif name == "thin":
        tiles, offset = [[zero, e[0], e[0] + e[2], e[2]]], 1
    elif name == "sun":
        tiles, offset = [[zero, e[i], e[i] + e[(i + 1) % 5], e[(i + 1) % 5]] for i in range(5)], 1
    elif name == "star":
        tiles = [[-(e[i] + e[(i + 1) % 5]), -e[(i + 1) % 5], zero, -e[i]] for i in range(5)]
        offset = 3
    else:
        raise InvalidParams(f"unknown seed patch '{name}' (expected thick, thin, sun or star)")
    return tiling_from_corners(np.array(tiles), offset, TilingProvenance("seed", seed_name=name))


SEED_NAMES = ("thick", "thin", "sun", "star")


def pentagrid_p3(radius: float, offsets: Optional[Sequence[float]] = None, seed: int = 1,
                 gp_tolerance: float = DEFAULT_GP_TOLERANCE) -> PenroseTiling:
    """
    P3 patch dual to the pentagrid inside a square clip of half-width radius.

    Offsets default to seeded values with zero sum. A non-integral offset sum
    gives a generalized Penrose tiling whose tiles stay undecorated where
    the corner indices leave 1..4.

    Raises:
        DegenerateIntersection: If three grid lines meet within gp_tolerance
    """
    if offsets is None:
        offsets = default_offsets(5, np.random.default_rng(seed))
    offsets = [float(o) for o in offsets]
    if len(offsets) != 5:
        raise InvalidParams(f"a pentagrid needs 5 offsets, got {len(offsets)}")

    grid = multigrid(5, offsets, gp_tolerance=gp_tolerance)
    try:
        rhombs = gdm_dual(grid, clip_from_radius(radius))
    except EmptyArrangement:
        logger.info(f"No pentagrid crossings within radius {radius}; returning an empty patch")
        rhombs = None
    return p3_from_pentagrid(grid, rhombs)


def p3_from_pentagrid(grid: Multigrid, rhombs: Optional[RhombTiling], jittered: bool = False) -> PenroseTiling:
    """
    Penrose tiling over the GDM dual of a pentagrid; rhombs None gives an
    empty patch. Grids jittered by perturb_offsets skip the offset-sum warning.
    """
    total = float(sum(grid.offsets))
    shift = int(round(total))
    if abs(total - shift) > 1e-9 and not jittered:
        logger.warning(f"Pentagrid offsets sum to {total:.6f}; the dual is not a P3 tiling")
    if rhombs is None:
        return PenroseTiling(np.empty((0, 5), dtype=np.int64), shift, np.empty((0, 4), dtype=np.int64),
                             provenance=TilingProvenance("gdm"))
    return PenroseTiling(
        vertex_coords=rhombs.vertex_ordinals, index_offset=shift, corner_ids=rhombs.corner_ids,
        provenance=TilingProvenance("gdm", rhomb_tiling=rhombs),
    )


# ----------------------------------------------------------------------------
# Matching rules
# ----------------------------------------------------------------------------

def check_matching(t: PenroseTiling) -> List[MatchingViolation]:
    """Shared edges whose two sides disagree in arrow shape or arrow head."""
    if t.num_tiles == 0:
        return []
    side_edge = t.tile_edges.reshape(-1)
    order = np.argsort(side_edge, kind="stable")
    sorted_edges = side_edge[order]
    shared = np.nonzero(t.edge_tiles[:, 1] >= 0)[0]
    first = order[np.searchsorted(sorted_edges, shared)]
    second = order[np.searchsorted(sorted_edges, shared) + 1]

    shapes = t.arrow_shapes.reshape(-1)
    heads = t.arrow_heads.reshape(-1)
    bad = (shapes[first] != shapes[second]) | (heads[first] != heads[second]) | (shapes[first] == ArrowShape.NONE)
    violations = []
    for e, a, b in zip(shared[bad], first[bad], second[bad]):
        violations.append(MatchingViolation(
            edge=(int(t.edge_vertices[e, 0]), int(t.edge_vertices[e, 1])),
            tiles=(int(a // 4), int(b // 4)),
            marks=((int(shapes[a]), int(heads[a])), (int(shapes[b]), int(heads[b]))),
        ))
    return violations


# ----------------------------------------------------------------------------
# Deflation
# ----------------------------------------------------------------------------

def _half_triangles(patch: PenroseTiling) -> Tuple[np.ndarray, np.ndarray]:
    """Robinson triangles (apex, double corner, single corner) of every tile and fragment."""
    coords = patch.vertex_coords
    c = coords[patch.corner_ids]
    halves = np.concatenate((
        np.stack((c[:, 1], c[:, 2], c[:, 0]), axis=1),
        np.stack((c[:, 3], c[:, 2], c[:, 0]), axis=1),
        coords[patch.fragment_ids],
    ))
    kinds = np.concatenate((patch.kinds, patch.kinds, patch.fragment_kinds))
    return kinds, halves


def _deflate_triangles(kinds: np.ndarray, tri: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    ta, tb, tc = _scale(a), _scale(b), _scale(c)
    thin = kinds == TileKind.THIN
    thick = ~thin

    p = ta + (b - a)
    r = tb + (c - b)
    q = tb + (a - b)
    pieces = [
        (TileKind.THIN, np.stack((tc, p, tb), axis=1)[thin]),
        (TileKind.THICK, np.stack((p, tc, ta), axis=1)[thin]),
        (TileKind.THICK, np.stack((r, tc, ta), axis=1)[thick]),
        (TileKind.THICK, np.stack((q, r, tb), axis=1)[thick]),
        (TileKind.THIN, np.stack((r, q, ta), axis=1)[thick]),
    ]
    out_kinds = np.concatenate([np.full(len(t), int(k), dtype=np.int64) for k, t in pieces])
    out_tri = np.concatenate([t for _, t in pieces])
    return out_kinds, out_tri


def _glue(kinds: np.ndarray, tri: np.ndarray, index_offset: int, provenance: TilingProvenance) -> PenroseTiling:
    """Pair mirror triangles sharing kind, double corner and single corner into rhombs."""
    vertices, inverse = _canonical_vertices(tri.reshape(-1, 5))
    tri_ids = inverse.reshape(-1, 3)
    keys = np.column_stack((kinds, tri_ids[:, 1], tri_ids[:, 2]))
    _, group, counts = np.unique(keys, axis=0, return_inverse=True, return_counts=True)
    group = group.reshape(-1)
    if counts.max(initial=0) > 2:
        raise InvalidParams("deflation produced overlapping half-rhombs")
    order = np.argsort(group, kind="stable")
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))

    paired = counts == 2
    first = order[starts[paired]]
    second = order[starts[paired] + 1]
    apex_a, apex_b = tri_ids[first, 0], tri_ids[second, 0]
    double, single = tri_ids[first, 1], tri_ids[first, 2]
    pos = vertices.astype(float) @ PENTAGRID_STAR
    ccw = _cross(pos[apex_a] - pos[single], pos[double] - pos[single]) > 0
    corner_ids = np.column_stack((
        single, np.where(ccw, apex_a, apex_b), double, np.where(ccw, apex_b, apex_a),
    ))

    lone = order[starts[~paired]]
    return PenroseTiling(
        vertex_coords=vertices, index_offset=index_offset, corner_ids=corner_ids,
        fragment_ids=tri_ids[lone], fragment_kinds=kinds[lone], provenance=provenance,
    )


def deflate(patch: PenroseTiling, steps: int = 1) -> PenroseTiling:
    """
    Scale by tau and subdivide, steps times.

    Each rhomb is cut into two Robinson triangles along the diagonal through
    its single- and double-arrow corners; thin halves split in two, thick
    halves in three, and mirror pairs are glued back into rhombs. Unpaired
    halves at the rim are kept as fragments so that area is conserved.

    Raises:
        MatchingViolationInInput: If the patch breaks the matching rules
    """
    if steps < 0:
        raise InvalidParams(f"deflation steps must be non-negative, got {steps}")
    if steps == 0:
        return patch
    violations = check_matching(patch)
    if violations:
        raise MatchingViolationInInput(f"cannot deflate a patch with {len(violations)} matching violations")
    if (patch.variants == 0).any():
        raise MatchingViolationInInput(f"cannot deflate {int((patch.variants == 0).sum())} undecorated tiles")

    kinds, tri = _half_triangles(patch)
    offset = patch.index_offset
    for _ in range(steps):
        kinds, tri = _deflate_triangles(kinds, tri)
        offset = (-2 * offset) % 5
    previous = patch.provenance.steps if patch.provenance.source == "deflation" else 0
    seed_name = patch.provenance.seed_name
    result = _glue(kinds, tri, offset, TilingProvenance("deflation", previous + steps, seed_name))
    logger.info(f"Deflated {patch.num_tiles} tiles {steps}x into {result.num_tiles} tiles "
                f"and {len(result.fragment_ids)} rim fragments")
    return result


def substitution_counts(thin: int, thick: int, steps: int) -> List[Tuple[int, int]]:
    """Half-rhomb counts (thin, thick) after 0..steps deflations."""
    counts = [(thin, thick)]
    for _ in range(steps):
        thin, thick = thin + thick, thin + 2 * thick
        counts.append((thin, thick))
    return counts


def half_counts(t: PenroseTiling) -> Tuple[int, int]:
    """Number of thin and thick half-rhombs in a patch, fragments included."""
    thin = 2 * int((t.kinds == TileKind.THIN).sum()) + int((t.fragment_kinds == TileKind.THIN).sum())
    thick = 2 * int((t.kinds == TileKind.THICK).sum()) + int((t.fragment_kinds == TileKind.THICK).sum())
    return thin, thick


# ----------------------------------------------------------------------------
# Vertex and central-tile configurations
# ----------------------------------------------------------------------------

def _least_rotation(*sequences: List[Tuple]) -> Tuple:
    best = None
    for seq in sequences:
        for shift in range(len(seq)):
            candidate = tuple(seq[shift:] + seq[:shift])
            if best is None or candidate < best:
                best = candidate
    return best


def _vertex_key(t: PenroseTiling, v: int) -> Tuple:
    tiles, slots = t.vertex_corners(v)
    units = t.corner_units[tiles, slots]
    if t.boundary_vertices[v] or int(units.sum()) != 10:
        raise BoundaryVertex(f"vertex {v} is not surrounded by tiles")
    order = np.argsort(t.side_angles[tiles, slots])
    tiles, slots, units = tiles[order].tolist(), slots[order].tolist(), units[order].tolist()
    shapes, kinds = t.arrow_shapes, t.kinds
    forward = [(int(shapes[i, s]), int(kinds[i]), u) for i, s, u in zip(tiles, slots, units)]
    backward = [(int(shapes[i, (s - 1) % 4]), int(kinds[i]), u)
                for i, s, u in zip(reversed(tiles), reversed(slots), reversed(units))]
    return _least_rotation(forward, backward)


def vertex_keys(t: PenroseTiling) -> Dict[int, Tuple]:
    """Canonical wedge sequence of every fully surrounded vertex."""
    keys = {}
    for v in np.nonzero(~t.boundary_vertices)[0].tolist():
        try:
            keys[v] = _vertex_key(t, v)
        except BoundaryVertex:
            continue
    return keys


@lru_cache(maxsize=1)
def reference_tiling() -> PenroseTiling:
    return pentagrid_p3(REFERENCE_RADIUS, REFERENCE_OFFSETS)


@lru_cache(maxsize=1)
def vertex_catalog() -> Dict[Tuple, int]:
    keys = sorted(set(vertex_keys(reference_tiling()).values()))
    logger.debug(f"Vertex catalog holds {len(keys)} configurations")
    return {key: i + 1 for i, key in enumerate(keys)}


def classify_vertex(t: PenroseTiling, v: int) -> VertexConfigClass:
    """
    Class of the decorated wedge sequence around v, canonical under
    rotation and reflection.

    Raises:
        BoundaryVertex: If the wedges around v do not close up
        UnknownConfiguration: If the configuration is not a P3 vertex
    """
    key = _vertex_key(t, v)
    catalog = vertex_catalog()
    if key not in catalog:
        raise UnknownConfiguration(f"vertex {v} has an unknown configuration {key}")
    return VertexConfigClass(catalog[key], key)


def vertex_configurations(t: PenroseTiling) -> Dict[int, VertexConfigClass]:
    catalog = vertex_catalog()
    out = {}
    for v, key in vertex_keys(t).items():
        if key not in catalog:
            raise UnknownConfiguration(f"vertex {v} has an unknown configuration {key}")
        out[v] = VertexConfigClass(catalog[key], key)
    return out


def _mirror(element: Tuple[int, int]) -> Tuple[int, int]:
    return element[0], 5 - element[1]


def _central_key(t: PenroseTiling, tile: int) -> Tuple[Tuple, Tuple[int, ...], Tuple[int, ...]]:
    neighbours = []
    elements = []
    for side, e in enumerate(t.tile_edges[tile].tolist()):
        a, b = t.edge_tiles[e].tolist()
        other = b if a == tile else a
        if other < 0:
            raise IncompleteNeighbourhood(f"tile {tile} has no neighbour across side {side}")
        slot = int(np.nonzero(t.corner_ids[other] == t.corner_ids[tile, side])[0][0])
        neighbours.append(other)
        elements.append((int(t.kinds[other]), int(t.corner_units[other, slot])))

    e0, e1, e2, e3 = elements
    s0, s1, s2, s3 = (int(s) for s in t.arrow_shapes[tile])
    frames = [
        ((e0, e1, e2, e3), (s0, s1, s2, s3)),
        ((e2, e3, e0, e1), (s2, s3, s0, s1)),
        ((_mirror(e3), _mirror(e2), _mirror(e1), _mirror(e0)), (s3, s2, s1, s0)),
        ((_mirror(e1), _mirror(e0), _mirror(e3), _mirror(e2)), (s1, s0, s3, s2)),
    ]
    best = min(f[0] for f in frames)
    decoration = min(f[1] for f in frames if f[0] == best)
    return (int(t.kinds[tile]),) + best, tuple(neighbours), decoration


def central_keys(t: PenroseTiling) -> Dict[int, Tuple[Tuple, Tuple[int, ...], Tuple[int, ...]]]:
    inner = np.nonzero(t.neighbour_counts() == 4)[0]
    return {int(i): _central_key(t, int(i)) for i in inner}


@lru_cache(maxsize=1)
def central_catalog() -> Dict[Tuple, int]:
    keys = sorted({key for key, _, _ in central_keys(reference_tiling()).values()})
    logger.debug(f"Central-tile catalog holds {len(keys)} configurations")
    return {key: i + 1 for i, key in enumerate(keys)}


def classify_central(t: PenroseTiling, tile: Union[int, PlacedTile]) -> CentralTileConfig:
    """
    Class of a tile together with its four edge neighbours, up to the
    symmetries of the central rhomb.

    Raises:
        IncompleteNeighbourhood: If the tile lacks a neighbour
        UnknownConfiguration: If the configuration is not a P3 configuration
    """
    tile_id = tile.tile_id if isinstance(tile, PlacedTile) else int(tile)
    key, neighbours, decoration = _central_key(t, tile_id)
    catalog = central_catalog()
    if key not in catalog:
        raise UnknownConfiguration(f"tile {tile_id} has an unknown neighbourhood {key}")
    return CentralTileConfig(catalog[key], tile_id, neighbours, key, decoration)


def central_decorations(t: PenroseTiling) -> Dict[int, Set[Tuple[int, ...]]]:
    """Arrow shapes seen around each central class; one per class when decorations are forced."""
    catalog = central_catalog()
    seen: Dict[int, Set[Tuple[int, ...]]] = {}
    for key, _, decoration in central_keys(t).values():
        if key not in catalog:
            raise UnknownConfiguration(f"unknown central configuration {key}")
        seen.setdefault(catalog[key], set()).add(decoration)
    return seen


# ----------------------------------------------------------------------------
# Centroid dual
# ----------------------------------------------------------------------------

def centroid_dual(t: PenroseTiling, up: Sequence[float] = DEFAULT_UP) -> OrientedDrawing:
    """
    Tile centroids joined across shared edges.

    A dual edge crossing a primal edge parallel to e_j follows the downward
    direction of the pentagrid lines orthogonal to e_j, which is the
    orientation the pentagrid itself induces.
    """
    up = np.asarray(up, dtype=float)
    up = up / np.linalg.norm(up)
    shared = np.nonzero(t.edge_tiles[:, 1] >= 0)[0]
    a, b = t.edge_tiles[shared, 0], t.edge_tiles[shared, 1]
    pos = t.positions
    vectors = pos[t.edge_vertices[shared, 1]] - pos[t.edge_vertices[shared, 0]]
    family = np.argmax(np.abs(vectors @ PENTAGRID_STAR.T), axis=1)

    lines = np.column_stack((-PENTAGRID_STAR[:, 1], PENTAGRID_STAR[:, 0]))
    down = np.where((lines @ up)[:, None] > 0, -lines, lines)
    centroids = t.centroids
    forward = np.einsum("ij,ij->i", centroids[b] - centroids[a], down[family]) > 0
    tails = np.where(forward, a, b)
    heads = np.where(forward, b, a)
    return OrientedDrawing(
        positions=centroids, tails=tails, heads=heads, boundary=t.neighbour_counts() < 4,
        edge_family=family, num_families=5, up=up,
    )


def dual_face_classes(d: OrientedDrawing) -> List[FaceClass]:
    """Congruence classes of dual faces whose vertices are all interior."""
    faces = [f for f in d.bounded_faces() if not d.boundary[f].any()]
    return face_shape_classes(d, faces)


def stack_path_containment(t: PenroseTiling, stacks: Sequence[Sequence[int]],
                           up: Sequence[float] = DEFAULT_UP) -> List[bool]:
    """
    For each stack of tiles of t, whether the centroid dual of the once
    deflated patch has an osculating path running inside the stack from its
    second tile to its second-to-last tile.
    """
    refined = deflate(t, 1)
    dual = centroid_dual(refined, up)
    partition = osculating_partition(dual)
    corners = t.corners * TAU
    pos = dual.positions

    results = []
    for stack in stacks:
        stack = list(stack)
        if len(stack) < 3:
            results.append(False)
            continue
        union = unary_union([Polygon(corners[i]) for i in stack])
        top, bottom = Polygon(corners[stack[1]]), Polygon(corners[stack[-2]])
        inside = shapely.contains_xy(union, pos[:, 0], pos[:, 1])
        found = False
        for path in partition.paths:
            verts = np.asarray(path.vertices)
            if not inside[verts].any():
                continue
            mids = (pos[verts[:-1]] + pos[verts[1:]]) / 2
            link = inside[verts[:-1]] & inside[verts[1:]] & shapely.contains_xy(union, mids[:, 0], mids[:, 1])
            breaks = np.nonzero(~link)[0] + 1
            for run in np.split(verts, breaks):
                if not inside[run].all():
                    continue
                xy = pos[run]
                if (shapely.contains_xy(top, xy[:, 0], xy[:, 1]).any()
                        and shapely.contains_xy(bottom, xy[:, 0], xy[:, 1]).any()):
                    found = True
                    break
            if found:
                break
        results.append(found)
    return results
