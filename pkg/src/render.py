"""
SVG rendering of pattern documents.

The output has one group per layer (tiles, edges, paths, vertices, glyphs),
y pointing up in pattern coordinates, and stable attribute order so that a
fixed document always renders to the same bytes.
"""
import logging
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .errors import InvalidParams, IoError
from .models import PatternDocument, RenderOptions

logger = logging.getLogger(__name__)

SVG_NS = "http://www.w3.org/2000/svg"
EDGE_COLOR = "#555555"
TILE_FILL = {"thin": "#f3e2c7", "thick": "#c7dbf3"}


def path_color(index: int) -> str:
    """Colour of osculating path number index; distinct for all indices below 2**24."""
    return "#%06x" % ((index * 2654435761) & 0xFFFFFF)


def _fmt(value: float) -> str:
    text = "%.4f" % value
    return "0.0000" if text == "-0.0000" else text


def _viewport(doc: PatternDocument, options: RenderOptions) -> Tuple[float, float, float, float]:
    if options.viewport is not None:
        return tuple(float(v) for v in options.viewport)
    xs = [float(v["x"]) for v in doc.vertices]
    ys = [float(v["y"]) for v in doc.vertices]
    for tile in doc.tiles or []:
        for x, y in tile.get("corners", []):
            xs.append(float(x))
            ys.append(float(y))
    pad = options.margin if options.margin > 0 else 1.0
    if not xs:
        return (-pad, -pad, pad, pad)
    return (min(xs) - pad, min(ys) - pad, max(xs) + pad, max(ys) + pad)


def _line(parent: ET.Element, p: Tuple[float, float], q: Tuple[float, float], **attrs) -> ET.Element:
    el = ET.SubElement(parent, "line", {
        "x1": _fmt(p[0]), "y1": _fmt(-p[1]), "x2": _fmt(q[0]), "y2": _fmt(-q[1]),
    })
    for key, value in attrs.items():
        el.set(key.replace("_", "-"), value)
    return el


def _defs(root: ET.Element) -> None:
    defs = ET.SubElement(root, "defs")
    marker = ET.SubElement(defs, "marker", {
        "id": "arrow", "viewBox": "0 0 10 10", "refX": "10", "refY": "5",
        "markerWidth": "4", "markerHeight": "4", "orient": "auto-start-reverse",
    })
    ET.SubElement(marker, "path", {"d": "M 0 0 L 10 5 L 0 10 z", "fill": "context-stroke"})


def render_svg(doc: PatternDocument, options: Optional[RenderOptions] = None) -> str:
    """
    Render a document to SVG text.

    Args:
        doc: Pattern document; vertices need x and y, edges tail and head
        options: Rendering options, defaults when omitted

    Returns:
        The SVG document as a string

    Raises:
        InvalidParams: If the options have non-positive dimensions
    """
    options = options or RenderOptions()
    issues = options.validate()
    if issues:
        raise InvalidParams("; ".join(issues))

    x0, y0, x1, y1 = _viewport(doc, options)
    width, height = x1 - x0, y1 - y0
    root = ET.Element("svg", {
        "xmlns": SVG_NS,
        "version": "1.1",
        "width": _fmt(width * options.scale),
        "height": _fmt(height * options.scale),
        "viewBox": f"{_fmt(x0)} {_fmt(-y1)} {_fmt(width)} {_fmt(height)}",
    })
    _defs(root)

    points: Dict[int, Tuple[float, float]] = {
        int(v["id"]): (float(v["x"]), float(v["y"])) for v in doc.vertices
    }
    stroke = _fmt(options.stroke_width)

    tiles = ET.SubElement(root, "g", {"id": "tiles", "stroke": "#999999", "stroke-width": _fmt(options.stroke_width / 2)})
    for tile in doc.tiles or []:
        corners = " ".join(f"{_fmt(x)},{_fmt(-y)}" for x, y in tile.get("corners", []))
        ET.SubElement(tiles, "polygon", {
            "points": corners, "fill": TILE_FILL.get(tile.get("kind"), "#eeeeee"),
            "data-tile": str(tile.get("id", "")),
        })

    edges = ET.SubElement(root, "g", {"id": "edges", "stroke": EDGE_COLOR, "stroke-width": stroke})
    for e in doc.edges:
        _line(edges, points[int(e["tail"])], points[int(e["head"])], marker_end="url(#arrow)",
              data_edge=str(e["id"]))

    paths = ET.SubElement(root, "g", {"id": "paths", "stroke-width": _fmt(options.stroke_width * 2)})
    if options.color_paths and doc.edge_to_path is not None:
        by_path: Dict[int, List[int]] = {}
        for edge_id, path_id in enumerate(doc.edge_to_path):
            by_path.setdefault(int(path_id), []).append(edge_id)
        for path_id in sorted(by_path):
            group = ET.SubElement(paths, "g", {
                "class": "path", "data-path": str(path_id), "stroke": path_color(path_id),
            })
            for edge_id in by_path[path_id]:
                e = doc.edges[edge_id]
                _line(group, points[int(e["tail"])], points[int(e["head"])])
    elif options.color_paths:
        logger.warning("Document has no edgeToPath annotation; rendering without path colours")

    vertices = ET.SubElement(root, "g", {"id": "vertices", "stroke": "#000000", "stroke-width": _fmt(options.stroke_width / 2)})
    radius = _fmt(options.vertex_radius)
    for v in doc.vertices:
        hollow = bool(v.get("boundary", False))
        x, y = points[int(v["id"])]
        ET.SubElement(vertices, "circle", {
            "cx": _fmt(x), "cy": _fmt(-y), "r": radius, "fill": "none" if hollow else "#000000",
        })

    glyphs = ET.SubElement(root, "g", {"id": "glyphs", "font-family": "monospace",
                                        "font-size": _fmt(options.vertex_radius * 3)})
    if options.glyphs and doc.vertex_words:
        for key in sorted(doc.vertex_words, key=int):
            x, y = points[int(key)]
            text = ET.SubElement(glyphs, "text", {
                "x": _fmt(x + options.vertex_radius * 1.5), "y": _fmt(-y - options.vertex_radius * 1.5),
            })
            text.text = doc.vertex_words[key]

    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def write_svg(doc: PatternDocument, out_path: str, options: Optional[RenderOptions] = None) -> Path:
    """Render doc and write it to out_path; raises IoError when the file cannot be written."""
    text = render_svg(doc, options)
    path = Path(out_path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write SVG to {out_path}: {e}")
    logger.info(f"Wrote SVG with {len(doc.vertices)} vertices and {len(doc.edges)} edges to {path}")
    return path
