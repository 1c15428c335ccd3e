"""Tests for exact arithmetic in Q(cos pi/7, sin pi/7)."""

import math
from decimal import Decimal
from fractions import Fraction

import pytest

from exactfield import (
    ONE, U, V, ZERO, FieldElement, FieldParseError, check_minimal_polynomial, chebyshev_t, cis,
    heptagon_vertex, parse,
)

Q = Fraction
U_FLOAT = math.cos(math.pi / 7)
V_FLOAT = math.sin(math.pi / 7)


def test_minimal_polynomial_identity():
    assert check_minimal_polynomial()
    assert chebyshev_t(2) == [-1, 0, 2]
    assert chebyshev_t(3) == [0, -3, 0, 4]


def test_reduction_rules():
    assert U ** 3 == FieldElement(Q(-1, 8), Q(1, 2), Q(1, 2))
    assert V * V == ONE - U * U
    assert 8 * U ** 3 - 4 * U ** 2 - 4 * U + 1 == ZERO


def test_ring_axioms_on_sample_elements():
    x = parse('(1/3)(2 - u + 5u^2) + v(1 - 2u)')
    y = parse('-7 + u^2 v')
    z = parse('(2/5)u - 3v')
    assert (x + y) * z == x * z + y * z
    assert (x * y) * z == x * (y * z)
    assert x * y == y * x
    assert x - x == ZERO


def _random_element(rng):
    return FieldElement(*(Q(int(n), int(d)) for n, d in zip(rng.integers(-50, 51, 6), rng.integers(1, 20, 6))))


def test_ring_axioms_on_random_elements(rng):
    for _ in range(25):
        x, y, z = (_random_element(rng) for _ in range(3))
        assert (x * y) * z == x * (y * z)
        assert x * (y + z) == x * y + x * z
        if not x.is_zero():
            assert x * x.invert() == ONE
        if x != y:
            assert not (x - y).is_zero()
            assert any(c != 0 for c in (x - y).coeffs)


def test_inverse():
    x = parse('419 - 452u + 40u^2')
    assert x * x.invert() == ONE
    assert (ONE / x) * x == ONE
    y = parse('(1/1609)(-1171 + 1296u + 3652u^2)v')
    assert y * y.invert() == ONE
    with pytest.raises(ZeroDivisionError):
        ZERO.invert()
    with pytest.raises(ZeroDivisionError):
        x / 0


def test_float_values():
    assert float(U) == pytest.approx(U_FLOAT, abs=1e-15)
    assert float(V) == pytest.approx(V_FLOAT, abs=1e-15)
    assert float(U * V) == pytest.approx(U_FLOAT * V_FLOAT, abs=1e-15)


def test_to_float_error_bound():
    value, bound = (U * U - V).to_float(30)
    assert isinstance(value, Decimal)
    assert bound <= Decimal('1e-30')
    assert float(value) == pytest.approx(U_FLOAT ** 2 - V_FLOAT, abs=1e-15)
    with pytest.raises(ValueError):
        U.to_float(0)


def test_sign_is_exact():
    assert ZERO.sign() == 0
    assert (U - Q(9, 10)).sign() == 1
    assert (U - Q(91, 100)).sign() == -1
    # 2uv = sin(2pi/7) = 0.781831482468029...
    assert (2 * U * V - Q('0.78183148246802')).sign() == 1


def test_heptagon_rectangle_sides_and_density_sign():
    a = Q(7, 4) - 2 * U * U
    b = Q(-1, 2) + U * U
    assert a + b == Q(5, 4) - U * U
    assert (-111 + 492 * U - 356 * U * U).sign() == 1
    value, bound = U.to_float(10)
    assert bound <= Decimal('1e-10')
    assert abs(value - Decimal('0.9009688679')) <= Decimal('1e-10')


def test_cis_and_heptagon_vertices():
    c, s = cis(7)
    assert c == -ONE and s == ZERO
    c, s = cis(-1)
    assert c == U and s == -V
    for i in range(7):
        x, y = heptagon_vertex(i)
        assert x * x + y * y == ONE
        assert float(x) == pytest.approx(math.cos(2 * math.pi * i / 7), abs=1e-14)
        assert float(y) == pytest.approx(math.sin(2 * math.pi * i / 7), abs=1e-14)
    assert heptagon_vertex(7) == heptagon_vertex(0)


def test_conjugate_mirrors():
    x, y = heptagon_vertex(2)
    xc, yc = heptagon_vertex(-2)
    assert x.conjugate() == xc
    assert y.conjugate() == yc


@pytest.mark.parametrize('text, expected', [
    ('0', ZERO),
    ('1', ONE),
    ('u', U),
    ('-(2/7)', FieldElement(Q(-2, 7))),
    ('u^2 v', FieldElement(0, 0, 0, 0, 0, 1)),
    ('(1/2)(1 + u)v', FieldElement(0, 0, 0, Q(1, 2), Q(1, 2), 0)),
    ('3 − 2u²', FieldElement(3, 0, -2)),
])
def test_parse(text, expected):
    assert parse(text) == expected


@pytest.mark.parametrize('text', ['', '2 +', '(1 + u', 'u^v', 'w', '1 2)'])
def test_parse_errors(text):
    with pytest.raises(FieldParseError):
        parse(text)


def test_json_form():
    x = parse('-(2/679)(419 - 452u + 40u^2)')
    data = x.to_json()
    assert len(data) == 6
    assert all('/' in item for item in data)
    assert FieldElement.from_json(data) == x
    with pytest.raises(FieldParseError):
        FieldElement.from_json(['1/2'] * 5)
    with pytest.raises(FieldParseError):
        FieldElement.from_json(['1/0'] * 6)


def test_immutable_and_hashable():
    with pytest.raises(AttributeError):
        U.anything = 1
    assert len({U, parse('u'), V}) == 2
