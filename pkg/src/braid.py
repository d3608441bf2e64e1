"""
Braid words at the vertices of a lace ground.

A lace pattern is a drawing plus one braid word per interior vertex. Words
are opaque sequences of crosses and twists; the only rule enforced is that
every word contains a cross. Vertices are keyed by their local edge pattern
so that one word per (class, rotation) describes the whole pattern.
"""
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .arrangement import OrientedDrawing
from .errors import BoundaryVertex, C1Violation, InvalidParams, UnalignedEdge, UnmappedClass

logger = logging.getLogger(__name__)

DEFAULT_ANGULAR_TOLERANCE = 1e-6


class BraidSymbol(Enum):
    CROSS = "C"
    TWIST_BOTH = "T"
    TWIST_LEFT = "L"
    TWIST_RIGHT = "R"


@dataclass(frozen=True)
class BraidWord:
    symbols: Tuple[BraidSymbol, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "BraidWord":
        """Read a word written in the letters C, T, L and R."""
        try:
            return cls(tuple(BraidSymbol(ch) for ch in text.strip().upper()))
        except ValueError:
            raise InvalidParams(f"braid word '{text}' uses letters other than C, T, L, R")

    def __str__(self) -> str:
        return "".join(s.value for s in self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __add__(self, other: "BraidWord") -> "BraidWord":
        return BraidWord(self.symbols + other.symbols)

    def is_valid(self) -> bool:
        return BraidSymbol.CROSS in self.symbols


def validate_braidword(w: Union[BraidWord, Sequence[BraidSymbol]]) -> bool:
    """True iff the word contains at least one cross."""
    symbols = w.symbols if isinstance(w, BraidWord) else tuple(w)
    return BraidSymbol.CROSS in symbols


@dataclass(eq=False)
class EdgeTwistLabel:
    """Extra twists carried by each edge of a drawing."""
    twists: np.ndarray

    def __post_init__(self):
        self.twists = np.asarray(self.twists, dtype=np.int64).reshape(-1)
        if (self.twists < 0).any():
            raise InvalidParams("edge twist counts must be non-negative")

    @classmethod
    def uniform(cls, num_edges: int, twists: int = 0) -> "EdgeTwistLabel":
        return cls(np.full(num_edges, twists, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.twists)

    def __getitem__(self, edge: int) -> int:
        return int(self.twists[edge])


@dataclass(frozen=True)
class VertexClassKey:
    """
    Cyclic (family label, out flag) sequence around a vertex, relabelled and
    shifted to its lexicographic minimum; rotation_index is the label shift
    that produced it.
    """
    canonical: Tuple[Tuple[int, int], ...]
    rotation_index: int

    @property
    def code(self) -> str:
        return ".".join(f"{label}{'o' if out else 'i'}" for label, out in self.canonical)


@dataclass(eq=False)
class LacePattern:
    drawing: OrientedDrawing
    edge_labels: EdgeTwistLabel
    vertex_words: Dict[int, BraidWord]
    vertex_classes: Dict[int, VertexClassKey] = field(default_factory=dict)

    def words_as_strings(self) -> Dict[str, str]:
        return {str(v): str(w) for v, w in sorted(self.vertex_words.items())}


@dataclass
class BraidMap:
    """Braid word per (class code, rotation); rotation None matches every rotation."""
    entries: Dict[Tuple[str, Optional[int]], BraidWord]
    default: Optional[BraidWord] = None

    def __post_init__(self):
        bad = [f"{code}@{rot}" for (code, rot), w in self.entries.items() if not w.is_valid()]
        if self.default is not None and not self.default.is_valid():
            bad.append("default")
        if bad:
            raise InvalidParams(f"braid words without a cross: {', '.join(bad)}")

    def lookup(self, key: VertexClassKey) -> Optional[BraidWord]:
        word = self.entries.get((key.code, key.rotation_index))
        if word is None:
            word = self.entries.get((key.code, None))
        return word if word is not None else self.default

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BraidMap":
        try:
            entries = {}
            for item in data.get("classes", []):
                rotation = item.get("rotation")
                entries[(str(item["key"]), None if rotation is None else int(rotation))] = BraidWord.parse(item["word"])
            default = data.get("default")
            return cls(entries, BraidWord.parse(default) if default else None)
        except (KeyError, TypeError, AttributeError) as e:
            raise InvalidParams(f"malformed braid map: {e}")

    def to_dict(self) -> Dict[str, Any]:
        classes = []
        for (code, rotation), word in sorted(self.entries.items(), key=lambda kv: (kv[0][0], kv[0][1] is None,
                                                                                   kv[0][1] or 0)):
            item = {"key": code, "word": str(word)}
            if rotation is not None:
                item["rotation"] = rotation
            classes.append(item)
        data: Dict[str, Any] = {"classes": classes}
        if self.default is not None:
            data["default"] = str(self.default)
        return data


def _direction_labels(vectors: np.ndarray, star: np.ndarray, tolerance: float) -> np.ndarray:
    """Index of the star direction each vector is parallel to, up to sign."""
    unit = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    star = star / np.linalg.norm(star, axis=1, keepdims=True)
    alignment = np.abs(unit @ star.T)
    labels = np.argmax(alignment, axis=1)
    off = np.arccos(np.clip(alignment[np.arange(len(unit)), labels], -1.0, 1.0))
    if (off > tolerance).any():
        worst = int(np.argmax(off))
        raise UnalignedEdge(f"edge direction {unit[worst].round(6).tolist()} is {math.degrees(off[worst]):.4f} "
                            f"degrees from every star direction")
    return labels


def _local_sequence(d: OrientedDrawing, v: int, star: Optional[np.ndarray],
                    tolerance: float) -> Tuple[List[int], List[Tuple[int, int]], int]:
    if d.boundary[v]:
        raise BoundaryVertex(f"vertex {v} lies on the drawing boundary")
    edges = d.rotation(v)
    if not edges:
        raise BoundaryVertex(f"vertex {v} has no incident edges")
    edges_arr = np.asarray(edges)
    outgoing = d.tails[edges_arr] == v
    if star is None and d.num_families and (d.edge_family[edges_arr] >= 0).all():
        labels = d.edge_family[edges_arr]
        n = d.num_families
    else:
        if star is None:
            raise UnalignedEdge(f"vertex {v}: drawing has no edge families and no star was given")
        others = np.where(outgoing, d.heads[edges_arr], d.tails[edges_arr])
        labels = _direction_labels(d.positions[others] - d.positions[v], star, tolerance)
        n = len(star)
    return edges, [(int(l), int(o)) for l, o in zip(labels, outgoing)], n


def _canonical(sequence: List[Tuple[int, int]], n: int) -> Tuple[Tuple[Tuple[int, int], ...], int]:
    best, best_r = None, 0
    for r in range(n):
        relabelled = [((label - r) % n, out) for label, out in sequence]
        for shift in range(len(relabelled)):
            candidate = tuple(relabelled[shift:] + relabelled[:shift])
            if best is None or candidate < best:
                best, best_r = candidate, r
    return best, best_r


def classify_vertex_local(d: OrientedDrawing, v: int, star: Optional[Sequence[Sequence[float]]] = None,
                          tolerance: float = DEFAULT_ANGULAR_TOLERANCE) -> VertexClassKey:
    """
    Local class of an interior vertex: its incident edges in ccw order as
    (family label, out flag), canonical over family relabelling j -> j - r
    and cyclic shifts.

    Edge families come from the drawing when it carries them; otherwise
    edge directions are matched against the given star.

    Raises:
        BoundaryVertex: If v is on the boundary
        UnalignedEdge: If an edge direction matches no star direction
    """
    star_arr = None if star is None else np.asarray(star, dtype=float)
    _, sequence, n = _local_sequence(d, v, star_arr, tolerance)
    canonical, rotation = _canonical(sequence, n)
    return VertexClassKey(canonical, rotation)


def classify_all_local(d: OrientedDrawing, star: Optional[Sequence[Sequence[float]]] = None,
                       tolerance: float = DEFAULT_ANGULAR_TOLERANCE) -> Dict[int, VertexClassKey]:
    return {int(v): classify_vertex_local(d, int(v), star, tolerance) for v in np.nonzero(~d.boundary)[0]}


def local_class_counts(d: OrientedDrawing) -> Dict[str, int]:
    """Number of interior vertices per canonical class code."""
    return dict(sorted(Counter(k.code for k in classify_all_local(d).values()).items()))


def assign_braids(d: OrientedDrawing, braid_map: BraidMap,
                  labels: Optional[EdgeTwistLabel] = None) -> LacePattern:
    """
    Give every interior vertex the word its (class, rotation) maps to.

    Raises:
        UnmappedClass: If some class has no word and the map has no default
    """
    labels = EdgeTwistLabel.uniform(d.num_edges) if labels is None else labels
    if len(labels) != d.num_edges:
        raise InvalidParams(f"{len(labels)} twist labels for {d.num_edges} edges")
    classes = classify_all_local(d)
    words, missing = {}, set()
    for v, key in classes.items():
        word = braid_map.lookup(key)
        if word is None:
            missing.add(f"{key.code}@{key.rotation_index}")
        else:
            words[v] = word
    if missing:
        raise UnmappedClass(missing)
    logger.info(f"Assigned braid words to {len(words)} vertices in "
                f"{len({(k.code, k.rotation_index) for k in classes.values()})} class rotations")
    return LacePattern(drawing=d, edge_labels=labels, vertex_words=words, vertex_classes=classes)


def _outgoing_pair(d: OrientedDrawing, v: int) -> Tuple[int, int]:
    """Out-edges of v in ccw order, the first being the one the other follows."""
    edges = d.rotation(v)
    out = [d.tails[e] == v for e in edges]
    if len(edges) == 4 and sum(out) == 2:
        for i in range(4):
            if out[i] and out[(i + 1) % 4]:
                return edges[i], edges[(i + 1) % 4]
    raise C1Violation([v])


def derive_braid_map(d: OrientedDrawing, labels: EdgeTwistLabel,
                     base: Union[BraidWord, str] = "CTC") -> BraidMap:
    """
    One word per (class, rotation): the base word followed by a left twist
    per twist on the first out-edge and a right twist per twist on the
    second. When vertices of one class rotation disagree, the lowest vertex
    id wins.
    """
    base = BraidWord.parse(base) if isinstance(base, str) else base
    entries: Dict[Tuple[str, Optional[int]], BraidWord] = {}
    conflicts = 0
    for v, key in sorted(classify_all_local(d).items()):
        left, right = _outgoing_pair(d, v)
        word = base + BraidWord(
            (BraidSymbol.TWIST_LEFT,) * labels[left] + (BraidSymbol.TWIST_RIGHT,) * labels[right])
        slot = (key.code, key.rotation_index)
        if slot not in entries:
            entries[slot] = word
        elif entries[slot] != word:
            conflicts += 1
    if conflicts:
        logger.warning(f"{conflicts} vertices disagree with the word derived for their class rotation")
    return BraidMap(entries)
