"""Tests for the SVG packing pictures."""

import xml.etree.ElementTree as ET

import numpy as np
import pytest
from shapely.geometry import Polygon

from geometry2d import DoubleLattice2D
from render import SVG_NS, SvgScene, packing_scene, write_svg
from utils import InputError

NS = {'svg': SVG_NS}


def test_scene_copies(heptagon):
    scene = packing_scene(heptagon, shells=1)
    assert len(scene.outlines) == 2 * 9
    assert sum(scene.inverted) == 9


def test_svg_document(square, tmp_path):
    lattice = DoubleLattice2D(np.array([1.0, 0.0]), np.array([0.0, 2.0]), np.array([0.5, 1.0]))
    scene = packing_scene(square, lattice, shells=1)
    path = write_svg(scene, tmp_path / 'square.svg')
    root = ET.parse(path).getroot()
    assert root.tag == f'{{{SVG_NS}}}svg'
    assert root.get('viewBox') == '0 0 1000 1000'
    polygons = root.findall('.//svg:polygon', NS)
    assert len(polygons) == 18
    fills = {p.get('fill') for p in polygons}
    assert len(fills) == 2


def test_coordinates_fill_the_viewport(square):
    lattice = DoubleLattice2D(np.array([1.0, 0.0]), np.array([0.0, 2.0]), np.array([0.5, 1.0]))
    scene = packing_scene(square, lattice, shells=0)
    points = np.vstack([scene.to_viewport(o) for o in scene.outlines])
    assert points.min() == pytest.approx(scene.margin)
    assert points.max() == pytest.approx(scene.viewport - scene.margin)


def test_output_is_deterministic(heptagon):
    first = packing_scene(heptagon, shells=1).to_svg()
    second = packing_scene(heptagon, shells=1).to_svg()
    assert first == second
    assert first.startswith('<?xml')
    assert '-0.0000' not in first


def test_negative_shells(heptagon):
    with pytest.raises(ValueError):
        packing_scene(heptagon, shells=-1)


def test_unwritable_path(square, tmp_path):
    scene = SvgScene([square.vertices], [False])
    with pytest.raises(InputError):
        write_svg(scene, tmp_path / 'missing' / 'out.svg')


def test_heptagon_packing_two_shells(heptagon, tmp_path):
    scene = packing_scene(heptagon, shells=2)
    assert len(scene.outlines) == 2 * 25
    shapes = [Polygon(o) for o in scene.outlines]
    worst = max(
        a.intersection(b, grid_size=1e-12).area
        for k, a in enumerate(shapes) for b in shapes[k + 1:]
    )
    assert worst <= 1e-10
    first = write_svg(scene, tmp_path / 'a.svg').read_bytes()
    second = write_svg(packing_scene(heptagon, shells=2), tmp_path / 'b.svg').read_bytes()
    assert first == second
