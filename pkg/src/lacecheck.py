"""
Workability checks for oriented drawings.

Five conditions decide whether a drawing can serve as a bobbin lace ground:

    C0  feature size: vertices well spaced, faces of bounded size
    C1  every interior vertex is 2-in/2-out with consecutive out-edges
    C2  the drawing is connected and every face has at least three sides
    C3  the orientation is acyclic
    C4  every osculating path stays within a strip of width s_max

The osculating partition pairs in- and out-edges at each interior vertex
so that paths touch without crossing; it is what C4 and the braid
assignment walk along.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy.optimize import linprog
from scipy.spatial import Delaunay, QhullError, cKDTree
from shapely.geometry import Polygon
from shapely.ops import polylabel

from .arrangement import OrientedDrawing, PlanarDrawing
from .errors import C1Violation, DegeneratePoints, TooFewVertices
from .models import (
    C0Metrics, C1Result, C2Result, C3Result, C4Metrics, VerificationReport, VerificationThresholds,
)

logger = logging.getLogger(__name__)

MIN_FIT_VERTICES = 4
SHAPE_DECIMALS = 6

# out-edge bitmask over the four ccw slots -> slot of the first out-edge
_FIRST_OUT_SLOT = np.full(16, -1, dtype=np.int64)
_FIRST_OUT_SLOT[0b0011] = 0
_FIRST_OUT_SLOT[0b0110] = 1
_FIRST_OUT_SLOT[0b1100] = 2
_FIRST_OUT_SLOT[0b1001] = 3


@dataclass(frozen=True)
class OsculatingPath:
    """Edge ids of one path in traversal order and the vertices it visits."""
    edges: Tuple[int, ...]
    vertices: Tuple[int, ...]
    closed: bool = False

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(eq=False)
class PartitionResult:
    paths: List[OsculatingPath]
    edge_to_path: np.ndarray

    def edge_sets(self, d: PlanarDrawing) -> List[frozenset]:
        """Each path as a set of (tail, head) pairs, independent of edge numbering."""
        return [frozenset((int(d.tails[e]), int(d.heads[e])) for e in p.edges) for p in self.paths]


@dataclass(frozen=True)
class DemingFit:
    centroid: Tuple[float, float]
    direction: Tuple[float, float]
    max_deviation: float


@dataclass(frozen=True)
class FaceClass:
    """Faces congruent up to rotation and reflection, with one representative polygon."""
    signature: Tuple
    members: Tuple[int, ...]
    polygon: np.ndarray


# ----------------------------------------------------------------------------
# C1 and the osculating partition
# ----------------------------------------------------------------------------

def _vertex_slots(d: OrientedDrawing) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Interior degree-4 vertices, their ccw half-edges, the slot of the first
    out-edge (-1 when the out-edges are not consecutive) and all offenders.
    """
    order = d.rotation_half_edges
    offsets = d.rotation_offsets
    degree = np.diff(offsets)
    interior = ~d.boundary
    four = np.nonzero(interior & (degree == 4))[0]
    slots = order[offsets[four][:, None] + np.arange(4)]
    out_mask = ((slots % 2) == 0).astype(np.int64)
    codes = (out_mask << np.arange(4)).sum(axis=1)
    first_out = _FIRST_OUT_SLOT[codes]
    bad_degree = np.nonzero(interior & (degree != 4))[0]
    offenders = np.union1d(bad_degree, four[first_out < 0])
    return four, slots, first_out, offenders


def check_c1(d: OrientedDrawing) -> C1Result:
    """Offending interior vertices, sorted by id."""
    _, _, _, offenders = _vertex_slots(d)
    return C1Result(passed=offenders.size == 0, offenders=offenders.tolist())


def _successor_edges(d: OrientedDrawing) -> np.ndarray:
    four, slots, first_out, offenders = _vertex_slots(d)
    if offenders.size:
        raise C1Violation(offenders)
    rows = np.arange(len(four))
    edge = slots // 2
    o1 = edge[rows, first_out]
    o2 = edge[rows, (first_out + 1) % 4]
    i1 = edge[rows, (first_out + 2) % 4]
    i2 = edge[rows, (first_out + 3) % 4]
    successor = np.full(d.num_edges, -1, dtype=np.int64)
    successor[i1] = o2
    successor[i2] = o1
    return successor


def osculating_partition(d: OrientedDrawing) -> PartitionResult:
    """
    Split the edges into maximal non-crossing paths.

    At each interior vertex the in-edge right after the out-edge pair
    continues into the nearer out-edge, the other in-edge into the farther
    one. Paths end at boundary vertices; closed paths appear only when the
    orientation has cycles.

    Raises:
        C1Violation: If some interior vertex fails C1
    """
    successor = _successor_edges(d)
    num_edges = d.num_edges
    predecessor = np.full(num_edges, -1, dtype=np.int64)
    has_next = np.nonzero(successor >= 0)[0]
    predecessor[successor[has_next]] = has_next

    # pointer doubling towards the first edge of every path
    ids = np.arange(num_edges)
    jump = np.where(predecessor >= 0, predecessor, ids)
    depth = (predecessor >= 0).astype(np.int64)
    for _ in range(max(1, num_edges.bit_length() + 1)):
        doubled = jump[jump]
        if np.array_equal(doubled, jump):
            break
        depth = depth + depth[jump]
        jump = doubled

    starts = np.nonzero(predecessor < 0)[0]
    on_chain = predecessor[jump] < 0
    chain_edges = ids[on_chain]
    chain_path = np.searchsorted(starts, jump[on_chain])
    order = np.lexsort((depth[on_chain], chain_path))
    chain_edges, chain_path = chain_edges[order], chain_path[order]

    edge_to_path = np.full(num_edges, -1, dtype=np.int64)
    edge_to_path[chain_edges] = chain_path
    paths = []
    if chain_edges.size:
        cuts = np.nonzero(np.diff(chain_path))[0] + 1
        for run in np.split(chain_edges, cuts):
            vertices = np.concatenate(([d.tails[run[0]]], d.heads[run]))
            paths.append(OsculatingPath(tuple(run.tolist()), tuple(vertices.tolist())))

    cyclic = ids[~on_chain]
    if cyclic.size:
        logger.warning(f"Osculating partition contains closed paths through {cyclic.size} edges")
        succ = successor.tolist()
        for e in cyclic.tolist():
            if edge_to_path[e] >= 0:
                continue
            cycle = []
            while edge_to_path[e] < 0:
                edge_to_path[e] = len(paths)
                cycle.append(e)
                e = succ[e]
            vertices = tuple(int(d.tails[c]) for c in cycle)
            paths.append(OsculatingPath(tuple(cycle), vertices, closed=True))

    logger.debug(f"Osculating partition: {len(paths)} paths over {num_edges} edges")
    return PartitionResult(paths=paths, edge_to_path=edge_to_path)


# ----------------------------------------------------------------------------
# C4: Deming fits along paths
# ----------------------------------------------------------------------------

def deming_fit_many(points: np.ndarray, labels: np.ndarray, up: Sequence[float] = (0.0, 1.0),
                    tolerance: float = 1e-9) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Orthogonal least-squares line through every labelled group of points.

    Returns centroids (G, 2), unit directions (G, 2) pointing along up and
    the largest perpendicular distance in each group. Isotropic groups, whose
    best line is not unique, take the up direction.
    """
    points = np.asarray(points, dtype=float)
    up = np.asarray(up, dtype=float)
    up = up / np.linalg.norm(up)
    groups, labels = np.unique(np.asarray(labels), return_inverse=True)
    labels = labels.reshape(-1)
    num = len(groups)
    counts = np.bincount(labels, minlength=num).astype(float)
    cx = np.bincount(labels, points[:, 0], num) / counts
    cy = np.bincount(labels, points[:, 1], num) / counts
    dx = points[:, 0] - cx[labels]
    dy = points[:, 1] - cy[labels]
    sxx = np.bincount(labels, dx * dx, num)
    syy = np.bincount(labels, dy * dy, num)
    sxy = np.bincount(labels, dx * dy, num)

    theta = 0.5 * np.arctan2(2 * sxy, sxx - syy)
    directions = np.column_stack((np.cos(theta), np.sin(theta)))
    spread = np.hypot(sxx - syy, 2 * sxy)
    isotropic = spread <= tolerance * np.maximum(sxx + syy, tolerance)
    directions[isotropic] = up
    directions[directions @ up < 0] *= -1

    residual = np.abs(dx * directions[labels, 1] - dy * directions[labels, 0])
    deviation = np.zeros(num)
    np.maximum.at(deviation, labels, residual)
    return np.column_stack((cx, cy)), directions, deviation


def deming_fit(points: Sequence[Sequence[float]], up: Sequence[float] = (0.0, 1.0)) -> DemingFit:
    """
    Total least-squares line through a point set.

    Raises:
        DegeneratePoints: If fewer than two distinct points are given
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < 2 or np.ptp(pts, axis=0).max() == 0:
        raise DegeneratePoints("a line fit needs at least two distinct points")
    centroids, directions, deviation = deming_fit_many(pts, np.zeros(len(pts), dtype=np.int64), up)
    return DemingFit(
        centroid=(float(centroids[0, 0]), float(centroids[0, 1])),
        direction=(float(directions[0, 0]), float(directions[0, 1])),
        max_deviation=float(deviation[0]),
    )


def check_c4(d: OrientedDrawing, s_max: float, partition: Optional[PartitionResult] = None) -> C4Metrics:
    """
    Fit every path with at least four interior vertices and compare the
    worst deviation against s_max. Boundary vertices are left out of fits.
    """
    partition = osculating_partition(d) if partition is None else partition
    vertex_runs = [np.asarray(p.vertices, dtype=np.int64) for p in partition.paths]
    if vertex_runs:
        vertices = np.concatenate(vertex_runs)
        labels = np.repeat(np.arange(len(vertex_runs)), [len(r) for r in vertex_runs])
    else:
        vertices = labels = np.empty(0, dtype=np.int64)
    keep = ~d.boundary[vertices]
    vertices, labels = vertices[keep], labels[keep]
    counts = np.bincount(labels, minlength=len(vertex_runs))
    fitted = counts[labels] >= MIN_FIT_VERTICES
    vertices, labels = vertices[fitted], labels[fitted]

    if vertices.size == 0:
        logger.warning("No path has enough interior vertices for a C4 fit")
        return C4Metrics([], [], 0.0, float(s_max), True)

    _, directions, deviation = deming_fit_many(d.positions[vertices], labels, d.up)
    angles = np.arccos(np.clip(directions @ d.up, -1.0, 1.0))
    worst = float(deviation.max())
    return C4Metrics(
        per_path_max_deviation=deviation.tolist(),
        per_path_angle_to_up=angles.tolist(),
        worst=worst,
        s_max=float(s_max),
        passed=worst <= s_max,
    )


# ----------------------------------------------------------------------------
# C0: feature size
# ----------------------------------------------------------------------------

def _shrunk_box(d: PlanarDrawing, margin: float) -> Tuple[float, float, float, float]:
    xmin, ymin, xmax, ymax = d.bounding_box()
    return xmin + margin, ymin + margin, xmax - margin, ymax - margin


def _inside(points: np.ndarray, box) -> np.ndarray:
    xmin, ymin, xmax, ymax = box
    return (points[:, 0] >= xmin) & (points[:, 0] <= xmax) & (points[:, 1] >= ymin) & (points[:, 1] <= ymax)


def largest_empty_circle(points: np.ndarray, box) -> float:
    """Largest Delaunay circumradius whose centre lies in box (inf without triangles)."""
    try:
        tri = Delaunay(points)
    except (QhullError, ValueError):
        return math.inf
    a, b, c = (points[tri.simplices[:, i]] for i in range(3))
    det = 2 * (a[:, 0] * (b[:, 1] - c[:, 1]) + b[:, 0] * (c[:, 1] - a[:, 1]) + c[:, 0] * (a[:, 1] - b[:, 1]))
    ok = np.abs(det) > 1e-12
    a, b, c, det = a[ok], b[ok], c[ok], det[ok]
    sa, sb, sc = (np.einsum("ij,ij->i", p, p) for p in (a, b, c))
    ux = (sa * (b[:, 1] - c[:, 1]) + sb * (c[:, 1] - a[:, 1]) + sc * (a[:, 1] - b[:, 1])) / det
    uy = (sa * (c[:, 0] - b[:, 0]) + sb * (a[:, 0] - c[:, 0]) + sc * (b[:, 0] - a[:, 0])) / det
    centres = np.column_stack((ux, uy))
    radii = np.linalg.norm(a - centres, axis=1)
    inside = _inside(centres, box)
    return float(radii[inside].max()) if inside.any() else math.inf


def _signed_area(poly: np.ndarray) -> float:
    q = np.roll(poly, -1, axis=0)
    return 0.5 * float(np.sum(poly[:, 0] * q[:, 1] - q[:, 0] * poly[:, 1]))


def polygon_inradius(poly: np.ndarray) -> float:
    """Radius of the largest circle inside a simple polygon."""
    poly = np.asarray(poly, dtype=float)
    area = _signed_area(poly)
    if area < 0:
        poly, area = poly[::-1], -area
    edges = np.roll(poly, -1, axis=0) - poly
    lengths = np.linalg.norm(edges, axis=1)

    if len(poly) == 3:
        return 2 * area / float(lengths.sum())
    if len(poly) == 4 and np.allclose(edges[0], -edges[2]) and np.allclose(edges[1], -edges[3]):
        return area / float(lengths.max()) / 2

    turns = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
    if np.all(turns >= -1e-12):
        # Chebyshev centre: max r with n_i . x + r <= n_i . p_i
        normals = np.column_stack((edges[:, 1], -edges[:, 0])) / lengths[:, None]
        a_ub = np.column_stack((normals, np.ones(len(poly))))
        b_ub = np.einsum("ij,ij->i", normals, poly)
        res = linprog(c=[0.0, 0.0, -1.0], A_ub=a_ub, b_ub=b_ub,
                      bounds=[(None, None), (None, None), (0, None)], method="highs")
        if res.success:
            return float(res.x[2])
        logger.debug(f"Chebyshev LP failed ({res.message}); falling back to polylabel")

    shape = Polygon(poly)
    centre = polylabel(shape, tolerance=1e-6 * math.sqrt(area))
    return float(shape.exterior.distance(centre))


def _circle_through(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> Optional[Tuple[np.ndarray, float]]:
    det = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    if abs(det) < 1e-12:
        return None
    sa, sb, sc = a @ a, b @ b, c @ c
    centre = np.array([
        (sa * (b[1] - c[1]) + sb * (c[1] - a[1]) + sc * (a[1] - b[1])) / det,
        (sa * (c[0] - b[0]) + sb * (a[0] - c[0]) + sc * (b[0] - a[0])) / det,
    ])
    return centre, float(np.linalg.norm(a - centre))


def polygon_circumradius(poly: np.ndarray, tolerance: float = 1e-9) -> float:
    """Radius of the smallest circle enclosing the polygon's corners."""
    pts = np.asarray(poly, dtype=float)
    best = math.inf
    n = len(pts)
    candidates = []
    for i in range(n):
        for j in range(i + 1, n):
            candidates.append(((pts[i] + pts[j]) / 2, float(np.linalg.norm(pts[i] - pts[j])) / 2))
            for k in range(j + 1, n):
                circle = _circle_through(pts[i], pts[j], pts[k])
                if circle is not None:
                    candidates.append(circle)
    for centre, radius in candidates:
        if radius < best and np.all(np.linalg.norm(pts - centre, axis=1) <= radius + tolerance):
            best = radius
    return best


def _cyclic_minimum(pairs: List[Tuple[int, int]]) -> Tuple:
    reflected = [(pairs[i][0], pairs[i - 1][1]) for i in range(len(pairs) - 1, -1, -1)]
    best = None
    for seq in (pairs, reflected):
        for shift in range(len(seq)):
            candidate = tuple(seq[shift:] + seq[:shift])
            if best is None or candidate < best:
                best = candidate
    return best


def face_shape_classes(d: PlanarDrawing, faces: Optional[List[np.ndarray]] = None,
                       decimals: int = SHAPE_DECIMALS) -> List[FaceClass]:
    """
    Group faces by congruence. The signature is the cyclic sequence of
    (edge length, turning angle at the edge's end), quantized and taken
    canonical under rotation, cyclic shift and reflection.
    """
    faces = d.bounded_faces() if faces is None else faces
    scale = 10 ** decimals
    by_signature: Dict[Tuple, List[int]] = {}
    by_degree: Dict[int, List[int]] = {}
    for i, f in enumerate(faces):
        by_degree.setdefault(len(f), []).append(i)

    for k, members in by_degree.items():
        polys = d.positions[np.stack([faces[i] for i in members])]
        edges = np.roll(polys, -1, axis=1) - polys
        lengths = np.linalg.norm(edges, axis=2)
        after = np.roll(edges, -1, axis=1)
        turn = np.arctan2(edges[..., 0] * after[..., 1] - edges[..., 1] * after[..., 0],
                          np.einsum("fki,fki->fk", edges, after))
        rows = np.empty((len(members), 2 * k), dtype=np.int64)
        rows[:, 0::2] = np.rint(lengths * scale)
        rows[:, 1::2] = np.rint(turn * scale)
        unique, inverse = np.unique(rows, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        keys = []
        for row in unique.tolist():
            pairs = list(zip(row[0::2], row[1::2]))
            keys.append(_cyclic_minimum(pairs))
        for local, face in enumerate(members):
            by_signature.setdefault(keys[inverse[local]], []).append(face)

    classes = []
    for signature in sorted(by_signature):
        members = tuple(by_signature[signature])
        classes.append(FaceClass(signature, members, d.positions[faces[members[0]]]))
    return classes


def check_c0(d: PlanarDrawing, margin: float = 2.0) -> C0Metrics:
    """
    Feature-size metrics on the part of the drawing at least margin away
    from the clip: minimum vertex spacing, largest empty circle, and the
    extreme face inradius and circumradius over face congruence classes.

    Raises:
        TooFewVertices: If fewer than two vertices lie inside the margin
    """
    box = _shrunk_box(d, margin)
    inside = _inside(d.positions, box) & ~d.boundary
    kept = np.nonzero(inside)[0]
    if kept.size < 2:
        raise TooFewVertices(f"only {kept.size} vertices lie {margin} or more inside the clip")

    pts = d.positions[kept]
    distances, _ = cKDTree(pts).query(pts, k=2)
    min_pair = float(distances[:, 1].min())
    empty_radius = largest_empty_circle(d.positions, box)

    faces = [f for f in d.bounded_faces() if inside[f].all()]
    inradius, circumradius = math.inf, math.inf
    if faces:
        classes = face_shape_classes(d, faces)
        inradius = min(polygon_inradius(c.polygon) for c in classes)
        circumradius = max(polygon_circumradius(c.polygon) for c in classes)
        logger.debug(f"C0 over {len(faces)} faces in {len(classes)} shape classes")

    values = (empty_radius, inradius, circumradius)
    passed = min_pair > 0 and all(math.isfinite(v) for v in values) and inradius <= circumradius
    return C0Metrics(min_pair, empty_radius, inradius, circumradius, passed)


# ----------------------------------------------------------------------------
# C2, C3
# ----------------------------------------------------------------------------

def to_networkx(d: PlanarDrawing, directed: bool = False) -> nx.Graph:
    graph = nx.DiGraph() if directed else nx.Graph()
    graph.add_nodes_from(range(d.num_vertices))
    graph.add_edges_from(zip(d.tails.tolist(), d.heads.tolist()))
    return graph


def check_c2(d: PlanarDrawing) -> C2Result:
    connected = d.num_vertices > 0 and nx.is_connected(to_networkx(d))
    degrees = [len(f) for f in d.bounded_faces()]
    min_degree = min(degrees) if degrees else 0
    return C2Result(connected=bool(connected), min_face_degree=min_degree,
                    passed=bool(connected) and min_degree >= 3)


def check_c3(d: OrientedDrawing) -> C3Result:
    """Acyclicity decides C3; whether every edge also points down is reported alongside."""
    acyclic = nx.is_directed_acyclic_graph(to_networkx(d, directed=True))
    downward = bool(np.all(d.edge_vectors() @ d.up < 0))
    return C3Result(acyclic=acyclic, all_edges_downward=downward, passed=acyclic)


def topological_order(d: OrientedDrawing) -> List[int]:
    return list(nx.topological_sort(to_networkx(d, directed=True)))


# ----------------------------------------------------------------------------
# All conditions
# ----------------------------------------------------------------------------

def verify_all(d: OrientedDrawing, thresholds: Optional[VerificationThresholds] = None,
               s_max: Optional[float] = None) -> VerificationReport:
    """
    Run C0-C4. Failures inside a single check are recorded in the report's
    errors instead of propagating, so that partial reports stay usable.
    Without an s_max bound C4 is skipped and the report does not pass.
    """
    thresholds = thresholds or VerificationThresholds()
    if thresholds.s_max is not None:
        s_max = thresholds.s_max
    if s_max is None:
        logger.warning("No s_max given; C4 is not evaluated")

    errors = []
    try:
        c0 = check_c0(d, thresholds.margin)
    except TooFewVertices as e:
        c0 = None
        errors.append(str(e))

    c1 = check_c1(d)
    c2 = check_c2(d)
    c3 = check_c3(d)
    c4 = None
    if s_max is None:
        errors.append("C4 skipped: no s_max bound given")
    elif c1.passed:
        c4 = check_c4(d, s_max)
    else:
        errors.append(f"C4 skipped: C1 fails at {len(c1.offenders)} vertices")

    boundary_vertices = np.nonzero(d.boundary)[0]
    boundary_edges = np.nonzero(d.boundary[d.tails] | d.boundary[d.heads])[0]
    report = VerificationReport(
        c0=c0, c1=c1, c2=c2, c3=c3, c4=c4,
        boundary_vertices=boundary_vertices.tolist(),
        boundary_edges=boundary_edges.tolist(),
        errors=errors,
    )
    logger.info(f"Verification {'passed' if report.passed else 'failed'} on "
                f"{d.num_vertices} vertices, {d.num_edges} edges")
    return report
