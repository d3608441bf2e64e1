"""
Data manager for loading, validating and saving pattern documents.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from .arrangement import OrientedDrawing
from .braid import BraidMap
from .errors import InvalidParams, IoError, MalformedDocument
from .models import SCHEMA_VERSION, PatternDocument

MAX_DOCUMENT_BYTES = 200 * 1024 * 1024


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def document_issues(data: Any) -> List[str]:
    """
    Structural problems of a parsed pattern document, empty when it is valid.

    Checks the schema version, dense vertex and edge ids, that edges
    reference existing vertices, and that per-edge annotations have one
    entry per edge.
    """
    if not isinstance(data, dict):
        return [f"document must be a JSON object, got {type(data).__name__}"]
    issues = []
    version = data.get("schemaVersion")
    if version != SCHEMA_VERSION:
        issues.append(f"unsupported schemaVersion {version!r} (expected {SCHEMA_VERSION})")
    if not isinstance(data.get("metadata"), dict):
        issues.append("missing 'metadata' object")
    up = data.get("upVector", [0.0, 1.0])
    if not (isinstance(up, list) and len(up) == 2 and all(_is_number(c) for c in up) and any(up)):
        issues.append("'upVector' must be a non-zero pair of numbers")

    vertices = data.get("vertices")
    edges = data.get("edges")
    if not isinstance(vertices, list):
        issues.append("missing 'vertices' list")
        vertices = []
    if not isinstance(edges, list):
        issues.append("missing 'edges' list")
        edges = []

    for i, v in enumerate(vertices):
        if not isinstance(v, dict):
            issues.append(f"vertex {i} is not an object")
            continue
        if v.get("id") != i:
            issues.append(f"vertex at position {i} has id {v.get('id')!r}; ids must be dense from 0")
        if not (_is_number(v.get("x")) and _is_number(v.get("y"))):
            issues.append(f"vertex {i} lacks numeric x and y")
        if len(issues) > 20:
            return issues

    num_v = len(vertices)
    for i, e in enumerate(edges):
        if not isinstance(e, dict):
            issues.append(f"edge {i} is not an object")
            continue
        if e.get("id") != i:
            issues.append(f"edge at position {i} has id {e.get('id')!r}; ids must be dense from 0")
        for end in ("tail", "head"):
            ref = e.get(end)
            if not (isinstance(ref, int) and not isinstance(ref, bool) and 0 <= ref < num_v):
                issues.append(f"edge {i} {end} {ref!r} is not a vertex id")
        if e.get("tail") == e.get("head") and "tail" in e:
            issues.append(f"edge {i} is a loop")
        if len(issues) > 20:
            return issues

    for key in ("edgeTwists", "edgeToPath"):
        values = data.get(key)
        if values is None:
            continue
        if not isinstance(values, list) or len(values) != len(edges):
            issues.append(f"'{key}' must list one entry per edge")
        elif not all(isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in values):
            issues.append(f"'{key}' entries must be non-negative integers")

    words = data.get("vertexWords")
    if words is not None:
        if not isinstance(words, dict):
            issues.append("'vertexWords' must be an object")
        else:
            for key in words:
                if not (key.isdigit() and int(key) < num_v):
                    issues.append(f"'vertexWords' key {key!r} is not a vertex id")
                    break
    return issues


def parse_document(text: str) -> PatternDocument:
    """
    Parse and validate pattern JSON.

    Raises:
        MalformedDocument: If the text is not JSON or the structure is invalid
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedDocument(f"invalid JSON: {e}")
    issues = document_issues(data)
    if issues:
        raise MalformedDocument("; ".join(issues[:5]))
    return PatternDocument.from_dict(data)


def serialize_document(doc: PatternDocument) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def document_from_drawing(d: OrientedDrawing, metadata: Dict[str, Any],
                          tiles: Optional[List[Dict[str, Any]]] = None) -> PatternDocument:
    """Pattern document holding an oriented drawing and optional tile records."""
    metadata = dict(metadata)
    metadata["numFamilies"] = int(d.num_families)
    vertices = [
        {"id": i, "x": float(x), "y": float(y), "boundary": bool(b)}
        for i, ((x, y), b) in enumerate(zip(d.positions, d.boundary))
    ]
    edges = [
        {"id": i, "tail": int(t), "head": int(h), "family": int(f)}
        for i, (t, h, f) in enumerate(zip(d.tails, d.heads, d.edge_family))
    ]
    return PatternDocument(
        metadata=metadata, vertices=vertices, edges=edges,
        up_vector=[float(c) for c in d.up], tiles=tiles,
    )


def drawing_from_document(doc: PatternDocument) -> OrientedDrawing:
    """Rebuild the oriented drawing stored in a document."""
    positions = np.array([[v["x"], v["y"]] for v in doc.vertices], dtype=float).reshape(-1, 2)
    boundary = np.array([bool(v.get("boundary", False)) for v in doc.vertices], dtype=bool)
    tails = np.array([e["tail"] for e in doc.edges], dtype=np.int64)
    heads = np.array([e["head"] for e in doc.edges], dtype=np.int64)
    family = np.array([e.get("family", -1) for e in doc.edges], dtype=np.int64)
    return OrientedDrawing(
        positions=positions, tails=tails, heads=heads, boundary=boundary,
        edge_family=family, num_families=int(doc.metadata.get("numFamilies", 0)),
        up=np.asarray(doc.up_vector, dtype=float),
    )


class DataManager:
    """Manages loading and saving of pattern documents and braid maps."""

    def __init__(self, pattern_directory: str = "./patterns/"):
        """
        Initialize DataManager with pattern directory path.

        Args:
            pattern_directory: Path to directory containing pattern JSON files
        """
        self.pattern_directory = Path(pattern_directory)
        self.loaded_documents: Dict[str, PatternDocument] = {}
        self.logger = logging.getLogger(__name__)
        self.load_errors: List[Dict[str, str]] = []

    def load_document(self, path: str) -> PatternDocument:
        """
        Load a single pattern document.

        Raises:
            MalformedDocument: If the file is missing, too large, or invalid
        """
        file_path = Path(path)
        try:
            size = file_path.stat().st_size
        except OSError as e:
            raise MalformedDocument(f"cannot read {path}: {e}")
        if size > MAX_DOCUMENT_BYTES:
            raise MalformedDocument(f"{path} is too large ({size / 1024 / 1024:.1f}MB)")
        try:
            text = file_path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise MalformedDocument(f"cannot read {path}: {e}")
        doc = parse_document(text)
        self.logger.debug(f"Loaded {doc.kind} document from {path}: "
                          f"{len(doc.vertices)} vertices, {len(doc.edges)} edges")
        return doc

    def save_document(self, doc: PatternDocument, path: str) -> Dict[str, Any]:
        """
        Write a document as canonical JSON.

        Returns:
            Dictionary with success status and message or error
        """
        try:
            out = Path(path)
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(serialize_document(doc), encoding="utf-8")
            self.logger.info(f"Saved {doc.kind} document to {out}")
            return {'success': True, 'message': f"Saved {doc.kind} document to {out}", 'path': str(out)}
        except OSError as e:
            error_msg = f"Cannot write {path}: {e}"
            self.logger.error(error_msg)
            return {'success': False, 'error': error_msg, 'user_message': f"❌ {error_msg}"}

    def write_document(self, doc: PatternDocument, path: str) -> None:
        """Like save_document but raises IoError on failure."""
        result = self.save_document(doc, path)
        if not result['success']:
            raise IoError(result['error'])

    def load_braid_map(self, path: str) -> BraidMap:
        """
        Load a braid map file of the form {"classes": [{"key", "word", "rotation"?}], "default"?}.

        Raises:
            MalformedDocument: If the file cannot be read or describes an invalid map
        """
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
            raise MalformedDocument(f"cannot load braid map {path}: {e}")
        if not isinstance(data, dict):
            raise MalformedDocument(f"braid map {path} must be a JSON object")
        try:
            braid_map = BraidMap.from_dict(data)
        except InvalidParams as e:
            raise MalformedDocument(f"braid map {path}: {e}")
        self.logger.info(f"Loaded braid map with {len(braid_map.entries)} entries from {path}")
        return braid_map

    def _ensure_pattern_directory(self) -> Dict[str, Any]:
        try:
            if not self.pattern_directory.exists():
                self.logger.info(f"Creating pattern directory: {self.pattern_directory}")
                self.pattern_directory.mkdir(parents=True, exist_ok=True)
            if not self.pattern_directory.is_dir():
                return {'success': False, 'error': f"Pattern path exists but is not a directory: {self.pattern_directory}"}
            return {'success': True}
        except OSError as e:
            return {'success': False, 'error': f"Cannot access pattern directory: {e}"}

    def _load_document_safely(self, file_path: Path) -> Dict[str, Any]:
        try:
            return {'success': True, 'document': self.load_document(str(file_path))}
        except MalformedDocument as e:
            return {'success': False, 'error': str(e)}

    def load_pattern_files(self) -> Dict[str, PatternDocument]:
        """
        Load every *.json pattern document in the pattern directory.

        Files that fail to load are skipped and recorded in load_errors.

        Returns:
            Dictionary mapping file stem to document
        """
        self.loaded_documents.clear()
        self.load_errors.clear()

        directory = self._ensure_pattern_directory()
        if not directory['success']:
            self.logger.error(directory['error'])
            self.load_errors.append({'file': str(self.pattern_directory), 'error': directory['error']})
            return {}

        for file_path in sorted(self.pattern_directory.glob("*.json")):
            result = self._load_document_safely(file_path)
            if result['success']:
                self.loaded_documents[file_path.stem] = result['document']
            else:
                self.logger.warning(f"Skipping {file_path.name}: {result['error']}")
                self.load_errors.append({'file': file_path.name, 'error': result['error']})

        self.logger.info(f"Loaded {len(self.loaded_documents)} pattern documents "
                         f"({len(self.load_errors)} failed)")
        return self.loaded_documents.copy()

    def get_document(self, name: str) -> Optional[PatternDocument]:
        return self.loaded_documents.get(name)

    def get_available_documents(self) -> List[str]:
        return sorted(self.loaded_documents)

    def get_load_errors(self) -> List[Dict[str, str]]:
        return self.load_errors.copy()

    def has_load_errors(self) -> bool:
        return bool(self.load_errors)

    def get_loading_summary(self) -> Dict[str, Any]:
        """
        Summary of the last load_pattern_files run.

        Returns:
            Dictionary with counts, names and errors
        """
        kinds: Dict[str, int] = {}
        for doc in self.loaded_documents.values():
            kinds[doc.kind] = kinds.get(doc.kind, 0) + 1
        return {
            'total_documents': len(self.loaded_documents),
            'available_documents': self.get_available_documents(),
            'documents_by_kind': dict(sorted(kinds.items())),
            'has_errors': self.has_load_errors(),
            'error_count': len(self.load_errors),
            'errors': self.get_load_errors(),
            'pattern_directory': str(self.pattern_directory),
        }
