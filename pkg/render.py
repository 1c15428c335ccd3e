"""
SVG pictures of double-lattice packings

Copies of a polygon under a double lattice, scaled into a fixed viewport and
written as SVG 1.1 with xml.etree. Output depends only on the inputs:
copies are emitted in group-element order and every number goes through the
same fixed format.
"""

import logging
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from config import RENDER_CONFIG
from geometry2d import ConvexPolygon, DoubleLattice2D, build_double_lattice, double_lattice_density
from utils import InputError, format_coordinate

logger = logging.getLogger(__name__)

SVG_NS = 'http://www.w3.org/2000/svg'


@dataclass
class SvgScene:
    """Outlines in model coordinates plus the styling they are drawn with."""

    outlines: List[np.ndarray]
    inverted: List[bool]
    viewport: int = RENDER_CONFIG['viewport']
    margin: float = RENDER_CONFIG['margin']
    style: Dict = field(default_factory=lambda: dict(RENDER_CONFIG))

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        points = np.vstack(self.outlines)
        return points.min(axis=0), points.max(axis=0)

    def to_viewport(self, points: np.ndarray) -> np.ndarray:
        """Uniform scale into the square viewport; y grows downwards."""
        lo, hi = self.bounds()
        span = float(np.max(hi - lo)) or 1.0
        scale = (self.viewport - 2 * self.margin) / span
        out = (points - lo) * scale + self.margin
        out[:, 1] = self.viewport - out[:, 1]
        return out

    def to_element(self) -> ET.Element:
        size = str(self.viewport)
        root = ET.Element('svg', {
            'xmlns': SVG_NS,
            'version': '1.1',
            'width': size,
            'height': size,
            'viewBox': f'0 0 {size} {size}',
        })
        group = ET.SubElement(root, 'g', {
            'stroke': self.style['stroke'],
            'stroke-width': str(self.style['stroke_width']),
            'stroke-linejoin': 'round',
        })
        for outline, inverted in zip(self.outlines, self.inverted):
            pts = self.to_viewport(outline)
            ET.SubElement(group, 'polygon', {
                'points': ' '.join(f'{format_coordinate(x)},{format_coordinate(y)}' for x, y in pts),
                'fill': self.style['fill_inverted'] if inverted else self.style['fill'],
            })
        return root

    def to_svg(self) -> str:
        element = self.to_element()
        ET.indent(element)
        return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(element, encoding='unicode') + '\n'


def packing_scene(K: ConvexPolygon, lattice: Optional[DoubleLattice2D] = None,
                  shells: Optional[int] = None) -> SvgScene:
    """Scene with the copies of K within `shells` of the identity; lattice=None computes the optimal one."""
    shells = RENDER_CONFIG['default_shells'] if shells is None else shells
    if shells < 0:
        raise ValueError("shells must be nonnegative")
    if lattice is None:
        result = double_lattice_density(K)
        lattice = build_double_lattice(K, result.parallelogram)
    outlines, inverted = [], []
    for inv, t in lattice.isometries(shells):
        outlines.append(lattice.image(K, inv, t))
        inverted.append(inv)
    logger.info(f"scene with {len(outlines)} copies")
    return SvgScene(outlines, inverted)


def write_svg(scene: SvgScene, path) -> Path:
    path = Path(path)
    try:
        path.write_text(scene.to_svg(), encoding='utf-8')
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    logger.info(f"wrote {path}")
    return path
