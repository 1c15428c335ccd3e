"""Tests for the regular heptagon local-minimum certificate."""

import json

import numpy as np
import pytest

from exactfield import FieldParseError, ONE, parse
from geometry2d import builtin_polygon
from heptagon_certificate import (
    A_COEF, AREA, B_COEF, CHECKS, DELTA, DENSITY, TABLES_PATH, W_FIXED, W_FREE, ConvexityViolation,
    DegenerateGeometryError, DomainError, alpha, check_cone_triviality, check_convention, check_density_identity,
    check_farkas, check_gradient, check_hessian, check_hessian_symmetry_exact, check_local_minimum,
    check_null_sum, check_phi2_gradient, check_phi2_reduction, check_positive_definite, check_psi_vanishing,
    check_rectangle, check_round_trip, check_solution_space, check_tangent_index_map, farkas_certificate,
    hbound, heptagon_rectangle, load_tables, perturbed_vertices, phi, phi2, psi, psi_family, replacement_frame,
    replacement_polygon, run_certificate,
)


@pytest.fixture(scope='module')
def tables():
    return load_tables()


@pytest.fixture
def broken_tables_path(tmp_path):
    raw = json.loads(TABLES_PATH.read_text(encoding='utf-8'))
    raw['f0'][1] = '1'
    path = tmp_path / 'tables.json'
    path.write_text(json.dumps(raw), encoding='utf-8')
    return path


# ----- exact constants -----

def test_density_constant():
    value, bound = DENSITY.to_float(6)
    assert float(value) == pytest.approx(0.892691, abs=1e-6)
    assert AREA * (2 * DELTA).invert() == DENSITY
    assert check_density_identity().passed


def test_barycentric_weights_are_proper():
    assert float(A_COEF) == pytest.approx(0.12651, abs=1e-5)
    assert float(B_COEF) == pytest.approx(0.31174, abs=1e-5)
    assert B_COEF.sign() == 1
    assert (ONE - A_COEF).sign() == 1


def test_rectangle_matches_the_float_computation(heptagon):
    from geometry2d import half_length_parallelogram

    assert check_rectangle().passed
    corners = heptagon_rectangle()
    p = half_length_parallelogram(heptagon, 0.0)
    p1 = np.array([float(c) for c in corners['p1']])
    assert min(np.linalg.norm(p.corners - p1, axis=1)) < 1e-10


# ----- tables -----

def test_tables_load(tables):
    assert len(tables.f0) == 14
    assert len(tables.F0) == 14 and all(len(row) == 14 for row in tables.F0)
    assert len(tables.f0_prime) == 42
    assert sorted(tables.g_representatives) == [1, 8, 15, 22, 29, 36]
    assert tables.f0[0] == parse('-(2/679)(419 - 452u + 40u^2)')


def test_tables_cycle(tables):
    assert tables.f(7) == tables.f(0)
    assert tables.f(1)[2:] == tables.f0[:12]
    assert tables.F(0) == tables.F0
    assert tables.g_prime(1) == tables.g_representatives[1]
    with pytest.raises(IndexError):
        tables.g_prime(43)


@pytest.mark.parametrize('check', [
    check_null_sum, check_hessian_symmetry_exact, check_round_trip, check_solution_space,
])
def test_exact_table_checks(tables, check):
    result = check(tables)
    assert result.passed, result.detail


def test_solution_vectors_lie_in_w(tables):
    for k in W_FIXED:
        assert tables.u1[k].is_zero() and tables.u2[k].is_zero()
    assert len(W_FREE) == 8


def test_mutated_tables_fail_null_sum(broken_tables_path):
    broken = load_tables(broken_tables_path)
    assert not check_null_sum(broken).passed
    report = run_certificate(['null-sum'], tables=broken)
    assert not report.passed
    assert report.failures == ['null-sum']


def test_bad_entry_names_its_table(tmp_path):
    raw = json.loads(TABLES_PATH.read_text(encoding='utf-8'))
    raw['u1'][0] = '(1/2)(3 + w)'
    path = tmp_path / 'tables.json'
    path.write_text(json.dumps(raw), encoding='utf-8')
    with pytest.raises(FieldParseError, match='u1'):
        load_tables(path)


# ----- perturbed heptagon -----

def test_unperturbed_vertices(heptagon):
    V = perturbed_vertices(np.zeros(14))
    assert V == pytest.approx(heptagon.vertices, abs=1e-15)
    with pytest.raises(ValueError):
        perturbed_vertices(np.zeros(14), 'stretched')


def test_phi_vanishes_at_the_heptagon():
    for i in range(7):
        assert phi(i, np.zeros(14)) == pytest.approx(0.0, abs=1e-13)


def test_phi_rejects_nonconvex_input():
    x = np.zeros(14)
    x[0] = -0.9
    with pytest.raises(ConvexityViolation):
        phi(0, x)


def test_phi_is_scale_invariant():
    x = np.zeros(14)
    x[0::2] = 1e-3
    assert max(abs(phi(i, x)) for i in range(7)) < 1e-12


def test_alpha_is_twice_the_oriented_area():
    p, q, r = np.array([0.0, 0.0]), np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert alpha(p, q, r) == pytest.approx(1.0)
    assert alpha(p, r, q) == pytest.approx(-1.0)
    assert alpha(p, q, 2 * q) == pytest.approx(0.0)


def test_psi_family_layout():
    assert psi_family(1) == (0, 3, 0)
    assert psi_family(8) == (1, 3, 0)
    assert psi_family(42) == (5, 2, 6)
    with pytest.raises(IndexError):
        psi_family(0)


def test_psi_vanishes_without_replacement():
    assert check_psi_vanishing(np.random.default_rng(3)).passed


def test_replacement_frame_shape():
    with pytest.raises(DegenerateGeometryError):
        replacement_frame(np.zeros(14), np.zeros(41))
    fr = replacement_frame(np.zeros(14), np.zeros(42))
    polygon = replacement_polygon(fr)
    assert polygon.shape == (42, 2)
    heptagon = builtin_polygon('heptagon')
    x, y = polygon[:, 0], polygon[:, 1]
    area = 0.5 * (np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))
    assert area == pytest.approx(heptagon.area, abs=1e-12)


def test_psi_single_value_matches_frame():
    xp = np.zeros(42)
    xp[14] = 1e-3
    direct = psi(3, np.zeros(14), xp)
    framed = psi(3, None, None, frame=replacement_frame(np.zeros(14), xp))
    assert direct == framed


def test_phi2_reduces_to_phi():
    assert check_phi2_reduction(np.random.default_rng(4)).passed
    assert phi2(2, np.zeros(14), np.zeros(42)) == pytest.approx(0.0, abs=1e-10)


@pytest.mark.parametrize('t, t0, h0, expected', [
    (0.0, 0.5, 1.0, (0.0, 2.0)),
    (0.25, 0.5, 2.0, (1.0, 3.0)),
    (1.0, 0.5, 1.0, (0.0, 2.0)),
])
def test_hbound(t, t0, h0, expected):
    assert hbound(t, t0, h0) == pytest.approx(expected)


def test_hbound_at_the_rectangle_weights():
    a, b = float(A_COEF), float(B_COEF)
    lo, hi = hbound(b, a, 1.0)
    assert lo == pytest.approx(min(b / a, (1 - b) / (1 - a)))
    assert hi == pytest.approx(max(b / a, (1 - b) / (1 - a)))


@pytest.mark.parametrize('args', [(0.5, 0.0, 1.0), (0.5, 1.0, 1.0), (1.5, 0.5, 1.0), (0.5, 0.5, -1.0)])
def test_hbound_domain(args):
    with pytest.raises(DomainError):
        hbound(*args)


# ----- numeric checks against the tables -----

def test_plain_convention_matches(tables):
    result = check_convention(tables)
    assert result.data['chosen'] == 'plain'
    assert result.passed, result.detail


@pytest.mark.parametrize('i', [0, 3])
def test_gradient(tables, i):
    result = check_gradient(tables, i)
    assert result.passed, result.detail


@pytest.mark.slow
@pytest.mark.parametrize('i', range(7))
def test_gradient_every_vertex(tables, i):
    result = check_gradient(tables, i)
    assert result.passed, result.detail


@pytest.mark.slow
@pytest.mark.parametrize('i', range(7))
def test_hessian(tables, i):
    result = check_hessian(tables, i)
    assert result.passed, result.detail


def test_positive_definite(tables):
    result = check_positive_definite(tables)
    assert result.passed, result.detail
    assert result.residual > 0


def test_phi2_gradient(tables):
    result = check_phi2_gradient(tables, 0)
    assert result.passed, result.detail


@pytest.mark.slow
def test_tangent_index_map(tables):
    result = check_tangent_index_map(tables)
    assert result.passed, result.detail


def test_farkas_certificate(tables):
    cert = farkas_certificate(tables)
    assert cert.mu > 0
    assert np.all(cert.c > 0) and np.all(cert.d > 0)
    assert cert.c.sum() + cert.d.sum() == pytest.approx(1.0)
    assert cert.residual <= 1e-10
    assert check_farkas(tables).passed


def test_cone_is_trivial(tables):
    result = check_cone_triviality(tables)
    assert result.passed, result.detail


@pytest.mark.slow
def test_density_grows_under_small_perturbations(tables):
    result = check_local_minimum(tables, n=10_000, rng=np.random.default_rng(5))
    assert result.passed, result.detail


# ----- driver -----

def test_run_selected_checks(tables):
    report = run_certificate(['minimal-polynomial', 'rectangle', 'null-sum'], tables=tables)
    assert report.passed
    assert [c.name for c in report.checks] == ['minimal-polynomial', 'rectangle', 'null-sum']
    frame = report.to_frame()
    assert list(frame.columns) == ['check', 'status', 'residual', 'tolerance', 'detail']
    data = report.to_json()
    assert data['passed'] is True
    assert {c['status'] for c in data['checks']} == {'pass'}
    assert 'PASS' in report.to_text()


def test_checks_run_in_fixed_order(tables):
    report = run_certificate(['null-sum', 'minimal-polynomial'], tables=tables)
    assert [c.name for c in report.checks] == ['minimal-polynomial', 'null-sum']


def test_unknown_check(tables):
    with pytest.raises(ValueError):
        run_certificate(['no-such-check'], tables=tables)
    assert 'farkas' in CHECKS
