"""SVG rendering of needle traces, target windows and rotation points.

Coordinates are written verbatim in scaled units inside a group that flips
the y axis, so plotted points can be compared exactly against trace data.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Sequence

from .game import TargetSpec

Point = tuple[int, int]

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Figure:
    paths: list[tuple[list[Point], str]] = field(default_factory=list)
    markers: list[Point] = field(default_factory=list)
    targets: list[TargetSpec] = field(default_factory=list)
    title: str = ""

    def add_path(self, points: Sequence[Point], color: str | None = None) -> None:
        if color is None:
            color = PALETTE[len(self.paths) % len(PALETTE)]
        self.paths.append(([(int(x), int(y)) for x, y in points], color))

    def bounds(self) -> tuple[int, int, int, int]:
        xs, ys = [], []
        for pts, _ in self.paths:
            xs.extend(p[0] for p in pts)
            ys.extend(p[1] for p in pts)
        for t in self.targets:
            xs += [t.tx - t.dev, t.tx + t.dev]
            ys += [t.ty - t.dev, t.ty + t.dev]
        xs += [m[0] for m in self.markers]
        ys += [m[1] for m in self.markers]
        if not xs:
            return (0, 0, 1, 1)
        return (min(xs), min(ys), max(xs), max(ys))


def render(fig: Figure, width: int = 800) -> str:
    x0, y0, x1, y1 = fig.bounds()
    span = max(x1 - x0, y1 - y0, 1)
    pad = span // 20 + 1
    vw, vh = x1 - x0 + 2 * pad, y1 - y0 + 2 * pad
    height = max(1, round(width * vh / vw))
    stroke = max(1, span // 400)

    root = ET.Element("svg", {
        "xmlns": "http://www.w3.org/2000/svg",
        "width": str(width),
        "height": str(height),
        # y is flipped below, so the box spans [-y1 - pad, -y0 + pad]
        "viewBox": f"{x0 - pad} {-y1 - pad} {vw} {vh}",
    })
    if fig.title:
        ET.SubElement(root, "title").text = fig.title
    g = ET.SubElement(root, "g", {"transform": "scale(1,-1)", "fill": "none"})
    for t in fig.targets:
        ET.SubElement(g, "rect", {
            "class": "target",
            "x": str(t.tx - t.dev),
            "y": str(t.ty - t.dev),
            "width": str(2 * t.dev),
            "height": str(2 * t.dev),
            "stroke": "#444444",
            "stroke-width": str(stroke),
        })
    for pts, color in fig.paths:
        ET.SubElement(g, "polyline", {
            "points": " ".join(f"{x},{y}" for x, y in pts),
            "stroke": color,
            "stroke-width": str(stroke),
        })
    for x, y in fig.markers:
        ET.SubElement(g, "circle", {
            "class": "rotation",
            "cx": str(x),
            "cy": str(y),
            "r": str(3 * stroke),
            "fill": "#000000",
        })
    ET.indent(root)
    return ET.tostring(root, encoding="unicode") + "\n"


def parse_polylines(svg_text: str) -> list[list[Point]]:
    """Point lists of every polyline in a rendered figure."""
    root = ET.fromstring(svg_text)
    out = []
    for el in root.iter("{http://www.w3.org/2000/svg}polyline"):
        pts = []
        for pair in el.get("points", "").split():
            x, y = pair.split(",")
            pts.append((int(x), int(y)))
        out.append(pts)
    return out


def count_elements(svg_text: str, tag: str, cls: str | None = None) -> int:
    root = ET.fromstring(svg_text)
    return sum(
        1 for el in root.iter(f"{{http://www.w3.org/2000/svg}}{tag}")
        if cls is None or el.get("class") == cls
    )
