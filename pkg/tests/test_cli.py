import pytest
import yaml

from meshing.mesh_io import load_mesh
from spinning_cavity import build_parser, main, overrides_from_args


def test_mesh_command_writes_file(tmp_path, capsys):
    path = tmp_path / 'ball.mesh'
    assert main(['mesh', '--semi-axes', '1,1,1', '--out', str(path)]) == 0
    assert load_mesh(path).n_tets == 1280
    assert 'Mesh Measures' in capsys.readouterr().out


def test_mesh_command_rejects_bad_axes(capsys):
    assert main(['mesh', '--semi-axes', '1,1']) == 2
    assert 'semi-axes' in capsys.readouterr().out


def test_mesh_command_refinement_limit(capsys):
    assert main(['mesh', '--refine', '9']) == 2
    assert 'RefinementLimitError' in capsys.readouterr().out


def test_overrides_from_flags():
    args = build_parser().parse_args([
        'sweep-nu', '--tilted', '--nu', '0.02', '--refine', '1', '--values', '0.1,0.05',
        '--set', 'solver.theta=1', '--no-plots', '-o', 'out',
    ])
    assert args.preset == 'tilted'
    assert overrides_from_args(args) == {
        'kind': 'sweep-nu',
        'solver': {'theta': 1},
        'output': {'directory': 'out', 'plots': False},
        'mesh': {'refinement': 1},
        'liquid': {'viscosity': 0.02},
        'sweep': {'viscosities': [0.1, 0.05]},
    }


def test_stability_flags():
    args = build_parser().parse_args(['stability', '--spin', '2', '--perturbation', '0.1,0,0'])
    assert overrides_from_args(args)['stability'] == {'spin': 2.0, 'perturbation': [0.1, 0.0, 0.0]}


def test_validate_prints_normalized_config(tmp_path, capsys):
    path = tmp_path / 'experiment.yaml'
    path.write_text(yaml.dump({
        'body': {'inertia': {'mode': 'target_total', 'values': [3.0, 3.0, 3.0]}},
        'initial': {'omega': [0.0, 0.0, 1.0]},
    }))
    assert main(['validate', str(path)]) == 0
    data = yaml.safe_load(capsys.readouterr().out)
    assert data['solver']['gyroscopic'] == 'midpoint'
    assert data['mesh']['shape']['kind'] == 'ellipsoid'


def test_invalid_config_exits_with_two(tmp_path, capsys):
    path = tmp_path / 'experiment.yaml'
    path.write_text(yaml.dump({
        'body': {'inertia': {'mode': 'target_total', 'values': [3.0, 3.0, 3.0]}},
        'initial': {'omega': [0.0, 0.0, 1.0]},
        'solver': {'relaxation': 1.2},
    }))
    assert main(['validate', str(path)]) == 2
    assert main(['run', '-c', str(path), '-o', str(tmp_path / 'out')]) == 2
    assert 'solver.relaxation' in capsys.readouterr().out


def test_missing_config_exits_with_two(tmp_path):
    assert main(['run', '-c', str(tmp_path / 'missing.yaml')]) == 2


def test_published_attainability(tmp_path):
    assert main(['attainability', '--published', '-o', str(tmp_path)]) == 0
    report = (tmp_path / 'report.txt').read_text(encoding='utf-8')
    assert 'large_rotation.verdict: violated' in report
    assert 'status: ok' in report


def test_spherical_run(tmp_path):
    code = main(['run', '--spherical', '-o', str(tmp_path), '--no-plots',
                 '--set', 'solver.final_time=0.15', '--set', 'solver.time_step=0.05'])
    assert code == 0
    assert (tmp_path / 'timeseries.csv').read_text().count('\n') == 5
    assert 'status: ok' in (tmp_path / 'report.txt').read_text(encoding='utf-8')


def test_run_dumps_operators(tmp_path):
    dump = tmp_path / 'operators'
    code = main(['run', '--spherical', '-o', str(tmp_path), '--no-plots', '--dump-operators', str(dump),
                 '--set', 'solver.final_time=0.05', '--set', 'solver.time_step=0.05'])
    assert code == 0
    assert any(dump.iterdir())


def test_unknown_command_is_rejected():
    with pytest.raises(SystemExit):
        main(['spin'])
