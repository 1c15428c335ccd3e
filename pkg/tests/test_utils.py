"""Tests for formatting, JSON I/O and seeding helpers."""

from fractions import Fraction

import pandas as pd
import pytest

from schemas import PolygonModel
from utils import (
    InputError, format_coordinate, format_float, format_fraction, frame_to_text, load_json, load_model,
    make_rng, report_frame, resolve_seed, write_json,
)


def test_format_float():
    assert format_float(0.8926906) == '0.892691'
    assert format_float(None) == 'n/a'
    assert format_float(1.0, 2) == '1.00'


def test_format_fraction():
    assert format_fraction(Fraction(10, 72)) == '5/36'
    assert format_fraction(Fraction(3)) == '3/1'


def test_format_coordinate_has_no_negative_zero():
    assert format_coordinate(-0.00001) == '0.0000'
    assert format_coordinate(12.5) == '12.5000'
    assert format_coordinate(-3.25) == '-3.2500'


def test_load_json_reports_position(tmp_path):
    path = tmp_path / 'bad.json'
    path.write_text('{\n  "vertices": [1, 2,]\n}\n', encoding='utf-8')
    with pytest.raises(InputError, match=r'bad\.json:2:'):
        load_json(path)


def test_load_json_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_json(tmp_path / 'nope.json')


def test_load_model_validates(tmp_path):
    path = tmp_path / 'polygon.json'
    path.write_text('{"vertices": [[0, 0], [1, 0]]}', encoding='utf-8')
    with pytest.raises(InputError, match='vertices'):
        load_model(path, PolygonModel)
    path.write_text('{"vertices": [[0, 0], [1, 0], [0, 1]]}', encoding='utf-8')
    assert len(load_model(path, PolygonModel).vertices) == 3


def test_write_json_sorts_keys(tmp_path):
    path = tmp_path / 'out.json'
    write_json(path, {'b': 1, 'a': [1.5]})
    text = path.read_text(encoding='utf-8')
    assert text.index('"a"') < text.index('"b"')
    assert load_json(path) == {'a': [1.5], 'b': 1}


def test_seed_resolution(monkeypatch):
    monkeypatch.delenv('PESSIMAL_SEED', raising=False)
    assert resolve_seed(5) == 5
    assert resolve_seed() == 20140101
    monkeypatch.setenv('PESSIMAL_SEED', '42')
    assert resolve_seed() == 42
    assert resolve_seed(7) == 7
    monkeypatch.setenv('PESSIMAL_SEED', 'abc')
    with pytest.raises(InputError):
        resolve_seed()


def test_make_rng_is_reproducible():
    assert make_rng(3).random() == make_rng(3).random()


def test_report_frame():
    df = report_frame([{'quantity': 'density', 'value': 0.5}])
    assert isinstance(df, pd.DataFrame)
    assert '0.500000' in frame_to_text(df)
    assert frame_to_text(report_frame([])) == ''
