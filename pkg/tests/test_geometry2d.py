"""Tests for the double-lattice density of convex polygons."""

import numpy as np
import pandas as pd
import pytest

from exactfield import U, V, parse
from geometry2d import (
    ConvexityError, ConvexPolygon, DegenerateDirectionError, DoubleLattice2D, HalfLengthParallelogram,
    InvalidParallelogramError, OriginNotInteriorError, brute_force_delta, build_double_lattice,
    builtin_polygon, check_parallelogram, chord_profile, containment_epsilon, delta_at, delta_min,
    delta_profile, double_lattice_density, half_length_parallelogram, length_in_direction, length_minima,
    level_offsets, radial_function, random_convex_polygon, regular_polygon, verify_admissible,
)

HEPTAGON_DELTA = float((-19 + 2 * U + 56 * U * U) * V / 8)
HEPTAGON_DENSITY = float(parse('(2/97)(-111 + 492u - 356u^2)'))


# ----- polygons -----

def test_clockwise_input_is_reoriented():
    K = ConvexPolygon([[0, 0], [0, 1], [1, 1], [1, 0]])
    assert K.area == pytest.approx(1.0)


def test_collinear_and_repeated_vertices_are_dropped():
    K = ConvexPolygon([[0, 0], [0.5, 0], [1, 0], [1, 1], [0, 1], [0, 0]])
    assert K.n == 4


@pytest.mark.parametrize('vertices', [
    [[0, 0], [1, 0]],
    [[0, 0], [1, 0], [2, 0]],
    [[0, 0], [2, 0], [1, 0.2], [1, 2]],
    [[0, 0], [1, 0], [0, 1], [1, 1]],
])
def test_invalid_polygons(vertices):
    with pytest.raises(ConvexityError):
        ConvexPolygon(vertices)


def test_from_points_takes_the_hull(rng):
    points = rng.random((40, 2))
    K = ConvexPolygon.from_points(points)
    assert K.to_shapely().area == pytest.approx(K.area)
    assert K.n <= 40


@pytest.mark.parametrize('name, area', [
    ('square', 1.0),
    ('triangle', np.sqrt(3) / 4),
    ('heptagon', 3.5 * np.sin(2 * np.pi / 7)),
    ('ngon:6', 1.5 * np.sqrt(3)),
])
def test_builtins(name, area):
    assert builtin_polygon(name).area == pytest.approx(area, rel=1e-12)


@pytest.mark.parametrize('name', ['pentagram', 'ngon:x', 'ngon:2', 'disk:'])
def test_unknown_builtins(name):
    with pytest.raises(ValueError):
        builtin_polygon(name)


# ----- chords and lengths -----

def test_heptagon_length_along_axis(heptagon):
    assert length_in_direction(heptagon, 0.0) == pytest.approx(1 + float(U), abs=1e-12)


def test_square_diagonal_length(square):
    assert length_in_direction(square, np.pi / 4) == pytest.approx(np.sqrt(2), abs=1e-12)


def test_level_offsets_square(square):
    profile = chord_profile(square.vertices, np.array([1.0, 0.0]))
    s_minus, s_plus = level_offsets(profile, 0.5)
    assert s_minus == pytest.approx(0.0)
    assert s_plus == pytest.approx(1.0)
    with pytest.raises(DegenerateDirectionError):
        level_offsets(profile, 2.0)


def test_level_offsets_triangle(triangle):
    # chord length falls linearly from 1 at the base to 0 at the apex
    profile = chord_profile(triangle.vertices, np.array([1.0, 0.0]))
    s_minus, s_plus = level_offsets(profile, 0.5)
    assert s_plus - s_minus == pytest.approx(np.sqrt(3) / 4)


# ----- half-length parallelogram -----

def test_heptagon_rectangle(heptagon):
    p = half_length_parallelogram(heptagon, 0.0)
    assert p.area == pytest.approx(HEPTAGON_DELTA, abs=1e-12)
    assert p.length == pytest.approx(1 + float(U), abs=1e-12)
    check_parallelogram(heptagon, p)
    # rectangle: the chords sit straight above each other
    assert p.chord_plus[:, 0] == pytest.approx(p.chord_minus[:, 0], abs=1e-12)


def test_square_side_direction(square):
    p = half_length_parallelogram(square, 0.0)
    assert p.area == pytest.approx(0.5)
    assert np.linalg.norm(p.chord_plus[0] - p.chord_plus[1]) == pytest.approx(0.5)
    check_parallelogram(square, p)


def test_check_parallelogram_rejects_interior_chords(square):
    p = half_length_parallelogram(square, 0.0)
    moved = HalfLengthParallelogram(p.theta, p.length, p.chord_plus - [0, 0.25], p.chord_minus, p.area)
    with pytest.raises(InvalidParallelogramError):
        check_parallelogram(square, moved)


def test_delta_is_pi_periodic(heptagon):
    for theta in (0.1, 0.7, 1.3):
        assert delta_at(heptagon, theta) == pytest.approx(delta_at(heptagon, theta + np.pi), rel=1e-12)


# ----- minimum and density -----

def test_heptagon_delta_min(heptagon):
    delta, theta, _ = delta_min(heptagon)
    assert delta == pytest.approx(HEPTAGON_DELTA, abs=1e-9)
    # minima sit on the seven vertex-to-opposite-edge axes, all multiples of pi/7
    k = theta / (np.pi / 7)
    assert abs(k - round(k)) < 1e-6


def test_heptagon_density(heptagon):
    result = double_lattice_density(heptagon)
    assert result.density == pytest.approx(0.892691, abs=1e-6)
    assert result.density == pytest.approx(HEPTAGON_DENSITY, abs=1e-9)
    assert set(result.to_dict()) == {'density', 'delta', 'area', 'minimizing_direction', 'parallelogram'}


@pytest.mark.parametrize('name', ['square', 'triangle'])
def test_tiling_polygons_have_density_one(name):
    assert double_lattice_density(builtin_polygon(name)).density == pytest.approx(1.0, abs=1e-9)


def test_triangle_delta(triangle):
    delta, _, _ = delta_min(triangle)
    assert delta == pytest.approx(np.sqrt(3) / 8, abs=1e-12)


@pytest.mark.slow
def test_disk_density():
    result = double_lattice_density(builtin_polygon('disk:4096'))
    assert result.density == pytest.approx(np.pi / np.sqrt(12), abs=1e-4)


def test_density_is_affine_invariant(heptagon):
    sheared = heptagon.transform([[2.0, 0.7], [0.1, 0.5]], offset=(3.0, -1.0))
    assert double_lattice_density(sheared).density == pytest.approx(HEPTAGON_DENSITY, abs=1e-8)


def test_random_polygon_density_is_affine_invariant(rng):
    for _ in range(10):
        K = random_convex_polygon(rng)
        A = rng.normal(size=(2, 2))
        while abs(np.linalg.det(A)) < 0.2:
            A = rng.normal(size=(2, 2))
        image = K.transform(A, offset=rng.normal(size=2))
        assert double_lattice_density(image).density == pytest.approx(double_lattice_density(K).density, abs=1e-6)


def test_random_polygons_respect_the_lower_bound(rng):
    for _ in range(60):
        K = random_convex_polygon(rng)
        density = double_lattice_density(K).density
        assert np.sqrt(3) / 2 - 1e-6 <= density <= 1 + 1e-9


@pytest.mark.slow
def test_random_polygon_optima_are_admissible_packings(rng):
    for _ in range(500):
        K = random_convex_polygon(rng)
        result = double_lattice_density(K)
        assert np.sqrt(3) / 2 - 1e-6 <= result.density <= 1 + 1e-9
        lattice = build_double_lattice(K, result.parallelogram)
        assert verify_admissible(K, lattice, shells=3).max_overlap <= 1e-9


def test_copies_sharing_an_edge_do_not_overlap():
    # these hulls put a lattice copy edge to edge with K; an unsnapped overlay reported area(K)
    rng = np.random.default_rng(99)
    polygons = [random_convex_polygon(rng) for _ in range(225)]
    for index in (117, 118, 119, 217, 218, 219, 222, 223, 224):
        K = polygons[index]
        result = double_lattice_density(K)
        report = verify_admissible(K, build_double_lattice(K, result.parallelogram), shells=3)
        assert report.admissible, (index, report.max_overlap)
        assert report.max_overlap <= 1e-9


@pytest.mark.slow
def test_delta_min_matches_brute_force(rng):
    for _ in range(100):
        K = random_convex_polygon(rng)
        delta, _, _ = delta_min(K)
        oracle, _ = brute_force_delta(K, 1_000_000)
        assert delta <= oracle + 1e-9
        assert delta == pytest.approx(oracle, rel=1e-5)


@pytest.mark.slow
def test_delta_profile_is_continuous(rng):
    # a jump keeps its size under grid refinement, a continuous profile halves its steps
    for _ in range(5):
        K = random_convex_polygon(rng, min_points=12)
        steps = []
        for samples in (10_000, 20_000):
            delta = delta_profile(K, samples)['delta'].to_numpy()
            steps.append(np.abs(np.diff(np.append(delta, delta[0]))).max())
        coarse, fine = steps
        assert coarse / (np.pi / 10_000) < 100 * delta.max()
        assert fine <= 0.6 * coarse


def test_length_minima():
    assert length_minima(builtin_polygon('square')) == pytest.approx([0.0, np.pi / 2], abs=1e-6)
    assert len(length_minima(builtin_polygon('heptagon'))) == 7


def test_delta_profile_frame(heptagon):
    df = delta_profile(heptagon, samples=64)
    assert isinstance(df, pd.DataFrame)
    assert list(df.columns) == ['theta', 'length', 'delta']
    assert len(df) == 64
    assert df['delta'].min() >= HEPTAGON_DELTA - 1e-12


# ----- double lattices -----

def test_heptagon_double_lattice(heptagon):
    result = double_lattice_density(heptagon)
    lattice = build_double_lattice(heptagon, result.parallelogram)
    assert heptagon.area / lattice.mean_area == pytest.approx(HEPTAGON_DENSITY, abs=1e-9)
    report = verify_admissible(heptagon, lattice, shells=2)
    assert report.admissible
    assert report.pairs_checked == 2 * 25 - 1


@pytest.mark.parametrize('name', ['square', 'triangle', 'ngon:5', 'ngon:8'])
def test_builtin_lattices_are_admissible(name):
    K = builtin_polygon(name)
    result = double_lattice_density(K)
    lattice = build_double_lattice(K, result.parallelogram)
    assert verify_admissible(K, lattice).admissible
    assert K.area / lattice.mean_area == pytest.approx(result.density, rel=1e-9)


def test_unit_lattice_square(square):
    lattice = DoubleLattice2D(np.array([1.0, 0.0]), np.array([0.0, 2.0]), np.array([0.5, 1.0]))
    assert lattice.mean_area == pytest.approx(1.0)
    assert verify_admissible(square, lattice, shells=2).max_overlap <= 1e-12


def test_overlapping_lattice_is_rejected(square):
    lattice = DoubleLattice2D(np.array([0.5, 0.0]), np.array([0.0, 2.0]), np.array([0.5, 1.0]))
    report = verify_admissible(square, lattice, shells=1)
    assert not report.admissible
    assert report.max_overlap == pytest.approx(0.5)


def test_parallel_generators_rejected():
    with pytest.raises(InvalidParallelogramError):
        DoubleLattice2D(np.array([1.0, 0.0]), np.array([2.0, 0.0]), np.zeros(2))


def test_shells_must_be_positive(square):
    lattice = DoubleLattice2D(np.array([1.0, 0.0]), np.array([0.0, 2.0]), np.array([0.5, 1.0]))
    with pytest.raises(ValueError):
        verify_admissible(square, lattice, shells=0)


# ----- containment -----

def test_containment_of_scaled_copy(heptagon):
    assert containment_epsilon(heptagon, heptagon.scaled(1.01)) == pytest.approx(0.01, abs=1e-12)
    assert containment_epsilon(heptagon, heptagon) == pytest.approx(0.0, abs=1e-12)


def test_containment_matches_dense_sampling(heptagon):
    rotated = heptagon.rotated(np.radians(1.0))
    angles = np.linspace(0, 2 * np.pi, 100_000, endpoint=False)
    ratio = radial_function(rotated, angles) / radial_function(heptagon, angles)
    oracle = max(ratio.max() - 1, 1 - ratio.min())
    eps = containment_epsilon(heptagon, rotated)
    assert oracle - 1e-12 <= eps <= oracle + 5e-6


def test_containment_needs_interior_origin(heptagon):
    shifted = heptagon.transform(np.eye(2), offset=(5.0, 0.0))
    with pytest.raises(OriginNotInteriorError):
        containment_epsilon(heptagon, shifted)


def test_regular_polygon_needs_three_vertices():
    with pytest.raises(ConvexityError):
        regular_polygon(2)
