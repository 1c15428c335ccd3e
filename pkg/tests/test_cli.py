"""End-to-end tests of the command line."""

import json

import pytest

import cli
from config import TOLERANCES
from heptagon_certificate import TABLES_PATH


@pytest.fixture(autouse=True)
def restore_tolerances():
    saved = dict(TOLERANCES)
    yield
    TOLERANCES.clear()
    TOLERANCES.update(saved)


def test_density2d_heptagon(capsys, tmp_path):
    out = tmp_path / 'result.json'
    assert cli.main(['--json', str(out), 'density2d', '--builtin', 'heptagon']) == 0
    assert 'density:    0.892691' in capsys.readouterr().out
    data = json.loads(out.read_text(encoding='utf-8'))
    assert data['density'] == pytest.approx(0.892691, abs=1e-6)
    assert data['admissibility']['admissible'] is True


def test_density2d_square(capsys):
    assert cli.main(['density2d', '--builtin', 'square']) == 0
    assert 'density:    1.000000' in capsys.readouterr().out


def test_density2d_polygon_file(capsys, tmp_path):
    path = tmp_path / 'triangle.json'
    path.write_text(json.dumps({'vertices': [[0, 0], [1, 0], [0, 1]]}), encoding='utf-8')
    profile = tmp_path / 'profile.csv'
    assert cli.main(['density2d', '--polygon', str(path), '--samples', '256', '--profile', str(profile)]) == 0
    assert 'density:    1.000000' in capsys.readouterr().out
    assert profile.read_text(encoding='utf-8').startswith('theta,length,delta')


@pytest.mark.parametrize('argv', [
    ['density2d', '--builtin', 'pentagram'],
    ['density2d', '--builtin', 'square', '--samples', '0'],
    ['--tol', 'nonsense=1', 'density2d', '--builtin', 'square'],
    ['--tol', 'overlap=-1', 'density2d', '--builtin', 'square'],
    ['schema', 'nothing'],
    ['ball3d'],
    ['ball3d', '--builtin', 'box:1,2'],
])
def test_bad_input_exits_2(argv, capsys):
    assert cli.main(argv) == 2
    assert 'error:' in capsys.readouterr().err


def test_malformed_polygon_file(tmp_path, capsys):
    path = tmp_path / 'broken.json'
    path.write_text('{"vertices": [[0, 0], [1, 0]', encoding='utf-8')
    assert cli.main(['density2d', '--polygon', str(path)]) == 2
    assert 'broken.json:1:' in capsys.readouterr().err


def test_nonconvex_polygon_file(tmp_path):
    path = tmp_path / 'dart.json'
    path.write_text(json.dumps({'vertices': [[0, 0], [2, 0], [1, 0.2], [1, 2]]}), encoding='utf-8')
    assert cli.main(['density2d', '--polygon', str(path)]) == 2


def test_tolerance_override_is_scoped_to_one_run(tmp_path, capsys):
    lattice = tmp_path / 'lattice.json'
    lattice.write_text(json.dumps({'t1': [0.5, 0], 't2': [0, 2], 'inversion_center': [0.5, 1],
                                   'mean_area': 0.5}), encoding='utf-8')
    argv = ['render', '--builtin', 'square', '--lattice', str(lattice), '--out', str(tmp_path / 'sq.svg')]
    before = TOLERANCES['overlap']
    # overlap 0.5 passes only while the override is in force
    assert cli.main(['--tol', 'overlap=1.0'] + argv) == 0
    assert TOLERANCES['overlap'] == before
    assert cli.main(argv) == 1


def test_certificate_geometry_error_exits_1(monkeypatch, capsys):
    import heptagon_certificate

    def broken(*args, **kwargs):
        raise heptagon_certificate.ConvexityViolation("perturbed heptagon is not convex")

    monkeypatch.setattr(heptagon_certificate, 'run_certificate', broken)
    assert cli.main(['certify-heptagon', '--checks', 'null-sum']) == 1
    assert 'ConvexityViolation' in capsys.readouterr().err


def test_certify_selected_checks(capsys):
    code = cli.main(['certify-heptagon', '--checks', 'minimal-polynomial,density-identity,null-sum',
                     '--format', 'json'])
    assert code == 0
    data = json.loads(capsys.readouterr().out)
    assert data['passed'] is True
    assert [c['name'] for c in data['checks']] == ['minimal-polynomial', 'density-identity', 'null-sum']


def test_certify_mutated_tables_exit_1(tmp_path, capsys):
    raw = json.loads(TABLES_PATH.read_text(encoding='utf-8'))
    raw['f0'][1] = '1'
    path = tmp_path / 'tables.json'
    path.write_text(json.dumps(raw), encoding='utf-8')
    assert cli.main(['certify-heptagon', '--tables', str(path), '--checks', 'null-sum']) == 1
    assert 'null-sum' in capsys.readouterr().err


def test_certify_unknown_check(capsys):
    assert cli.main(['certify-heptagon', '--checks', 'everything']) == 2


@pytest.mark.slow
def test_certify_full_run(capsys):
    assert cli.main(['certify-heptagon', '--probe-samples', '20']) == 0
    assert 'PASS' in capsys.readouterr().out


def test_ball3d_legendre(tmp_path, capsys):
    csv = tmp_path / 'legendre.csv'
    assert cli.main(['ball3d', '--legendre', '30', '--csv', str(csv), '--residues', '30']) == 0
    out = capsys.readouterr().out
    assert 'zero exactly at l = [1, 2]' in out
    assert 'holds' in out
    assert len(csv.read_text(encoding='utf-8').splitlines()) == 32


def test_ball3d_ball(tmp_path, capsys):
    out = tmp_path / 'ball.json'
    assert cli.main(['--json', str(out), 'ball3d', '--builtin', 'ball', '--lambda', '0.5']) == 0
    data = json.loads(out.read_text(encoding='utf-8'))
    assert data['bound']['lambda'] == 0.5
    assert data['bound']['bound'] == pytest.approx(0.740480, abs=1e-6)
    assert data['mean_volume'] == pytest.approx(5.656854, abs=1e-6)


def test_render(tmp_path, capsys):
    out = tmp_path / 'heptagon.svg'
    assert cli.main(['render', '--builtin', 'heptagon', '--shells', '1', '--out', str(out)]) == 0
    assert out.read_text(encoding='utf-8').count('<polygon') == 18


def test_render_overlapping_lattice(tmp_path, capsys):
    lattice = tmp_path / 'lattice.json'
    lattice.write_text(json.dumps({'t1': [0.5, 0], 't2': [0, 2], 'inversion_center': [0.5, 1],
                                   'mean_area': 0.5}), encoding='utf-8')
    out = tmp_path / 'square.svg'
    assert cli.main(['render', '--builtin', 'square', '--lattice', str(lattice), '--out', str(out)]) == 1
    assert out.exists()


def test_schema(capsys):
    assert cli.main(['schema', 'density']) == 0
    schema = json.loads(capsys.readouterr().out)
    assert 'density' in schema['properties']
