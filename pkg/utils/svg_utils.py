"""Static SVG rendering of a constellation snapshot (equirectangular map)."""

import math
from pathlib import Path
from typing import List, Tuple, Union
from xml.sax.saxutils import quoteattr

from constellation.models import ConstellationConfig
from constellation.orbits import subpoint
from constellation.snapshot import node_positions, snapshot
from utils.text_utils import save_text_to_file

MAP_WIDTH = 720
MAP_HEIGHT = 360

_STYLE = (
    ".frame{fill:#0b1e33;stroke:#8899aa;stroke-width:1}"
    ".isl{stroke:#4aa3df;stroke-width:0.6}"
    ".gsl{stroke:#e6a23c;stroke-width:0.6}"
    ".sat{fill:#ffffff}"
    ".gs{fill:#e74c3c}"
)


def _project(lat: float, lon: float) -> Tuple[float, float]:
    x = (math.degrees(lon) + 180.0) / 360.0 * MAP_WIDTH
    y = (90.0 - math.degrees(lat)) / 180.0 * MAP_HEIGHT
    return x, y


def _num(value: float) -> str:
    text = f"{value:.2f}"
    return "0.00" if text == "-0.00" else text


def _segments(a: Tuple[float, float], b: Tuple[float, float]) -> List[Tuple[float, float, float, float]]:
    """Line pieces between two map points, wrapped across the antimeridian."""
    (xa, ya), (xb, yb) = a, b
    if abs(xb - xa) <= MAP_WIDTH / 2:
        return [(xa, ya, xb, yb)]
    shift = MAP_WIDTH if xb < xa else -MAP_WIDTH
    return [(xa, ya, xb + shift, yb), (xa - shift, ya, xb, yb)]


def render_svg(config: ConstellationConfig, t: float) -> str:
    """
    Render satellites, ground stations, ISLs and GSLs at time ``t``.

    Output bytes depend only on (config, t). Lines that cross the
    antimeridian are drawn twice, shifted by one map width, and clipped to
    the map frame.

    Args:
        config: Constellation to draw
        t: Seconds since epoch

    Returns:
        SVG document text
    """
    consts = config.constants
    nodes = config.node_ids()
    positions = node_positions(config, t)
    points = [_project(*subpoint(positions[node], t, consts)) for node in nodes]
    logical = snapshot(config, t)

    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{MAP_WIDTH}" height="{MAP_HEIGHT}" '
        f'viewBox="0 0 {MAP_WIDTH} {MAP_HEIGHT}">',
        f"<style>{_STYLE}</style>",
        f'<defs><clipPath id="map"><rect x="0" y="0" width="{MAP_WIDTH}" height="{MAP_HEIGHT}"/>'
        "</clipPath></defs>",
        f'<rect class="frame" x="0" y="0" width="{MAP_WIDTH}" height="{MAP_HEIGHT}"/>',
        '<g clip-path="url(#map)">',
    ]
    for edge in logical.edges:
        cls = "isl" if nodes[edge.u].is_satellite and nodes[edge.v].is_satellite else "gsl"
        for x1, y1, x2, y2 in _segments(points[edge.u], points[edge.v]):
            lines.append(
                f'<line class="{cls}" x1="{_num(x1)}" y1="{_num(y1)}" x2="{_num(x2)}" y2="{_num(y2)}"/>'
            )
    for node, (x, y) in zip(nodes, points):
        title = f"<title>{node.name}</title>"
        if node.is_satellite:
            lines.append(f'<circle class="sat" cx="{_num(x)}" cy="{_num(y)}" r="1.5">{title}</circle>')
        else:
            lines.append(
                f'<rect class="gs" x="{_num(x - 3)}" y="{_num(y - 3)}" width="6" height="6" '
                f"data-name={quoteattr(node.name)}/>"
            )
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_svg(config: ConstellationConfig, t: float, output_path: Union[str, Path]) -> Path:
    return save_text_to_file(render_svg(config, t), output_path)
