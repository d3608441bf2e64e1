"""
Generalized dual method: multigrid -> rhomb tiling.

Each multigrid face gets the ordinal tuple p of the lines below it and the
dual vertex f(p) = sum(p_i e_i); each crossing of lines (j, k) and (j', k')
becomes the rhombus spanned by e_j and e_j'. Tiles keep their two source
lines, so stacks (the chains of rhombs dual to one line) can be read back.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .arrangement import (
    Clip, Multigrid, OrientedDrawing, PlanarDrawing, WordSpacing, assign_down_orientation,
    build_arrangement,
)
from .errors import InvalidParams, OnGridLine, UnknownLine
from .lacecheck import deming_fit

logger = logging.getLogger(__name__)

OrdinalTuple = Tuple[int, ...]
GridLine = Tuple[int, int]


def _ordinal_columns(grid: Multigrid, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Ordinals of points in every family plus the distance to the nearest line."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    ordinals = np.empty((len(points), len(grid.families)), dtype=np.int64)
    nearest = np.full(len(points), np.inf)
    for i, family in enumerate(grid.families):
        proj = points @ family.normal
        if isinstance(family.spacing, WordSpacing):
            kmin, kmax = family.valid_range()
            ks = np.arange(kmin, kmax + 1)
            pos = family.positions(ks)
            slot = np.searchsorted(pos, proj, side="left")
            ordinals[:, i] = kmin - 1 + slot
            below = pos[np.clip(slot - 1, 0, len(pos) - 1)]
            above = pos[np.clip(slot, 0, len(pos) - 1)]
            gap = np.minimum(np.abs(proj - below), np.abs(above - proj))
        else:
            step = family.spacing.step
            scaled = (proj - family.offset) / step
            k = np.ceil(scaled).astype(np.int64) - 1
            ordinals[:, i] = k
            gap = np.abs(scaled - np.round(scaled)) * step
        nearest = np.minimum(nearest, gap)
    return ordinals, nearest


def face_ordinals(grid: Multigrid, point: Sequence[float], tolerance: float = 1e-9) -> OrdinalTuple:
    """Largest line index below the point's projection, one per family."""
    ordinals, nearest = _ordinal_columns(grid, np.asarray(point, dtype=float))
    if nearest[0] <= tolerance:
        raise OnGridLine(f"point {list(point)} lies on a grid line")
    return tuple(int(p) for p in ordinals[0])


@dataclass(frozen=True)
class RhombTile:
    grid_a: GridLine
    grid_b: GridLine
    corners: Tuple[Tuple[float, float], ...]
    shape_class: Tuple[int, int]


@dataclass(frozen=True)
class Stack:
    """Tiles dual to one grid line, ordered along the line's direction."""
    family_line: GridLine
    tile_ids: Tuple[int, ...]
    tiles: Tuple[RhombTile, ...]

    def __len__(self) -> int:
        return len(self.tile_ids)


@dataclass(eq=False)
class RhombTiling:
    """
    Edge-to-edge rhomb tiling dual to an arrangement.

    Tile i is dual to arrangement vertex i. Corner vertices carry their
    integer ordinal tuples, which makes vertex identity exact.
    """
    grid: Multigrid
    arrangement: PlanarDrawing
    tile_lines: np.ndarray          # (T, 4): family A, line A, family B, line B
    corner_ids: np.ndarray          # (T, 4) counterclockwise
    vertex_ordinals: np.ndarray     # (V, n)
    edge_vertices: np.ndarray       # (E, 2)
    edge_tiles: np.ndarray          # (E, 2), -1 where the edge is on the patch boundary
    tile_edges: np.ndarray          # (T, 4), edge i joins corners i and i+1

    @property
    def num_tiles(self) -> int:
        return len(self.tile_lines)

    @cached_property
    def vertex_positions(self) -> np.ndarray:
        return self.vertex_ordinals.astype(float) @ self.grid.star

    @property
    def corners(self) -> np.ndarray:
        return self.vertex_positions[self.corner_ids]

    @property
    def centroids(self) -> np.ndarray:
        return self.corners.mean(axis=1)

    @cached_property
    def tiles(self) -> List[RhombTile]:
        corners = self.corners
        out = []
        for i, (ja, ka, jb, kb) in enumerate(self.tile_lines.tolist()):
            out.append(RhombTile(
                grid_a=(ja, ka), grid_b=(jb, kb),
                corners=tuple((float(x), float(y)) for x, y in corners[i]),
                shape_class=(min(ja, jb), max(ja, jb)),
            ))
        return out

    @property
    def adjacency(self) -> Dict[Tuple[int, int], Tuple[int, int]]:
        """Shared edge (sorted vertex ids) -> the two tiles on either side."""
        shared = np.nonzero(self.edge_tiles[:, 1] >= 0)[0]
        return {
            (int(self.edge_vertices[e, 0]), int(self.edge_vertices[e, 1])):
                (int(self.edge_tiles[e, 0]), int(self.edge_tiles[e, 1]))
            for e in shared
        }

    def neighbour_counts(self) -> np.ndarray:
        shared = self.edge_tiles[:, 1] >= 0
        return shared[self.tile_edges].sum(axis=1)


def gdm_dual(grid: Multigrid, clip: Clip) -> RhombTiling:
    """One rhombus per multigrid crossing inside clip, corners at f(p) of the four incident faces."""
    arrangement = build_arrangement(grid, clip)
    lines = arrangement.vertex_lines
    n = len(grid.families)
    num_tiles = len(lines)

    base, _ = _ordinal_columns(grid, arrangement.positions)
    rows = np.arange(num_tiles)
    fa, ka, fb, kb = lines.T
    base[rows, fa] = ka - 1
    base[rows, fb] = kb - 1

    step_a = np.zeros((num_tiles, n), dtype=np.int64)
    step_b = np.zeros((num_tiles, n), dtype=np.int64)
    step_a[rows, fa] = 1
    step_b[rows, fb] = 1
    star = grid.star
    ccw = (star[fa, 0] * star[fb, 1] - star[fa, 1] * star[fb, 0]) > 0
    first = np.where(ccw[:, None], step_a, step_b)
    third = np.where(ccw[:, None], step_b, step_a)
    corners = np.stack((base, base + first, base + step_a + step_b, base + third), axis=1)

    vertex_ordinals, inverse = np.unique(corners.reshape(-1, n), axis=0, return_inverse=True)
    corner_ids = inverse.reshape(num_tiles, 4)
    edge_vertices, tile_edges, edge_tiles = edge_table(corner_ids)

    logger.info(f"GDM dual of {n}-grid: {num_tiles} tiles, {len(vertex_ordinals)} vertices")
    return RhombTiling(
        grid=grid, arrangement=arrangement, tile_lines=lines, corner_ids=corner_ids,
        vertex_ordinals=vertex_ordinals, edge_vertices=edge_vertices, edge_tiles=edge_tiles,
        tile_edges=tile_edges,
    )


def edge_table(corner_ids: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unique undirected tile edges, the edge id of every tile side and the tiles per edge."""
    num_tiles = len(corner_ids)
    sides = np.stack((corner_ids, np.roll(corner_ids, -1, axis=1)), axis=2).reshape(-1, 2)
    sides.sort(axis=1)
    edge_vertices, inverse = np.unique(sides, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    tile_of_side = np.repeat(np.arange(num_tiles), 4)
    order = np.argsort(inverse, kind="stable")
    counts = np.bincount(inverse, minlength=len(edge_vertices))
    if counts.max(initial=0) > 2:
        raise InvalidParams("tiling is not edge-to-edge: an edge borders more than two tiles")
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    edge_tiles = np.full((len(edge_vertices), 2), -1, dtype=np.int64)
    edge_tiles[:, 0] = tile_of_side[order[starts]]
    two = counts == 2
    edge_tiles[two, 1] = tile_of_side[order[starts[two] + 1]]
    return edge_vertices, inverse.reshape(num_tiles, 4), edge_tiles


def vertex_index(t: RhombTiling) -> np.ndarray:
    """de Bruijn index sum(p) of every tiling vertex."""
    return t.vertex_ordinals.sum(axis=1)


def _stack_members(t: RhombTiling, j: int, k: int) -> np.ndarray:
    lines = t.tile_lines
    mask = ((lines[:, 0] == j) & (lines[:, 1] == k)) | ((lines[:, 2] == j) & (lines[:, 3] == k))
    members = np.nonzero(mask)[0]
    if members.size == 0:
        raise UnknownLine(f"no tiles dual to line ({j}, {k})")
    param = t.arrangement.positions[members] @ t.grid.families[j].direction
    return members[np.argsort(param, kind="stable")]


def extract_stack(t: RhombTiling, j: int, k: int) -> Stack:
    """Tiles dual to line (j, k) in order along the line."""
    members = _stack_members(t, j, k)
    tiles = t.tiles
    return Stack((j, k), tuple(int(i) for i in members), tuple(tiles[i] for i in members))


def stack_family(t: RhombTiling, j: int) -> List[Stack]:
    """One stack per line of family j that crosses the clip."""
    if not 0 <= j < len(t.grid.families):
        raise InvalidParams(f"family index {j} out of range")
    lines = t.tile_lines
    ks = np.unique(np.concatenate((lines[lines[:, 0] == j, 1], lines[lines[:, 2] == j, 3])))
    return [extract_stack(t, j, int(k)) for k in ks]


def stack_partner_sequence(t: RhombTiling, stack: Stack) -> np.ndarray:
    """Family of the other line through each tile of the stack."""
    j = stack.family_line[0]
    lines = t.tile_lines[list(stack.tile_ids)]
    return np.where(lines[:, 0] == j, lines[:, 2], lines[:, 0])


def stack_gaps(t: RhombTiling, stack: Stack, family: int) -> List[int]:
    """Number of tiles between consecutive tiles of the given partner family."""
    hits = np.nonzero(stack_partner_sequence(t, stack) == family)[0]
    return (np.diff(hits) - 1).tolist()


def stack_points(t: RhombTiling, stack: Stack) -> np.ndarray:
    ids = np.unique(t.corner_ids[list(stack.tile_ids)])
    return t.vertex_positions[ids]


def centroid_dual(t: RhombTiling, up: Sequence[float]) -> OrientedDrawing:
    """
    Centroid dual of a GDM tiling: tile centroids joined across shared
    edges, each edge oriented like the grid edge it is dual to.
    """
    oriented = assign_down_orientation(t.arrangement, up)
    boundary = oriented.boundary | (t.neighbour_counts() < 4)
    return OrientedDrawing(
        positions=t.centroids, tails=oriented.tails, heads=oriented.heads, boundary=boundary,
        edge_family=oriented.edge_family, num_families=oriented.num_families,
        vertex_lines=oriented.vertex_lines, edge_line=oriented.edge_line, up=oriented.up,
    )


def tiling_edge_star_index(vectors: np.ndarray, star: np.ndarray) -> np.ndarray:
    """Star index of each edge vector (the e_j it is parallel to, up to sign)."""
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    return np.argmax(np.abs((vectors / norms) @ star.T), axis=1)


def default_offsets(n: int, rng: np.random.Generator) -> List[float]:
    """Generic offsets with zero sum."""
    lam = rng.uniform(0.0, 1.0, size=n)
    return (lam - lam.mean()).tolist()


def shape_class_counts(t: RhombTiling) -> Dict[Tuple[int, int], int]:
    fa, fb = t.tile_lines[:, 0], t.tile_lines[:, 2]
    keys, counts = np.unique(np.column_stack((np.minimum(fa, fb), np.maximum(fa, fb))), axis=0, return_counts=True)
    return {(int(a), int(b)): int(c) for (a, b), c in zip(keys, counts)}


def acute_angles(t: RhombTiling) -> np.ndarray:
    """Smallest interior angle of every tile."""
    star = t.grid.star
    cosine = np.abs(np.einsum("ij,ij->i", star[t.tile_lines[:, 0]], star[t.tile_lines[:, 2]]))
    return np.arccos(np.clip(cosine, 0.0, 1.0))


def stack_deviation(t: RhombTiling, stack: Stack) -> float:
    """Largest distance of a stack's tile centroids from their best-fit line."""
    fit = deming_fit(t.centroids[list(stack.tile_ids)], t.grid.families[stack.family_line[0]].direction)
    return fit.max_deviation
