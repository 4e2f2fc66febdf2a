import io
import json
import math

import pandas as pd
import pytest
from django.core.management import CommandError, call_command

from hardy.constants import FAIL, PASS
from hardy.services.runs.run_service import RunService
from hardy.services.verification.report import TrialRecord, VerificationReport
from processors.special_functions import Parameters, critical_coupling


def run(*args: str) -> str:
    out = io.StringIO()
    call_command('hardycalc', *args, stdout=out, no_color=True)
    return out.getvalue()


@pytest.fixture
def isolated_fixtures(monkeypatch, corridor_file):
    """Corridor file chosen by the test, whatever the environment says."""
    monkeypatch.setenv('HARDY_CALC_FIXTURES', str(corridor_file))
    return corridor_file


def _report(name: str, verdict: str) -> VerificationReport:
    report = VerificationReport(name, Parameters(d=3, alpha=1.0), verdict=verdict, corridor=(1.0, 1.5))
    report.trials = [TrialRecord.measure(1.0, 1.5, 1.0)]
    return report


def test_constants_in_three_dimensions() -> None:
    document = json.loads(run('constants'))
    assert document['a_star'] == pytest.approx(-0.6366198, abs=1e-7)
    assert document['hardy_c_p2'] == pytest.approx(0.7978846, abs=1e-7)
    assert document['riesz_c'] == pytest.approx(0.0506606, abs=1e-7)
    assert document['delta'] == 0.0
    assert document['free_kernel_tail'] == pytest.approx(1 / math.pi ** 2)


def test_kernel_table() -> None:
    frame = pd.read_csv(io.StringIO(run('kernel', '--t', '1', '--r', '0,1')))
    assert list(frame.columns) == ['t', 'r', 'value']
    assert frame['value'][0] == pytest.approx(0.1013212, abs=1e-7)
    assert frame['value'][1] == pytest.approx(1 / (4 * math.pi ** 2), rel=1e-6)


def test_envelope_reports_difference_bounds() -> None:
    document = json.loads(run('envelope', '--t', '1', '--x', '1', '--y', '2', '--a', '1'))
    assert document['dist'] == 1.0
    assert document['envelope_shape'] > 0
    assert {'L', 'M'} <= set(document)


def test_hormander_norm_of_constant_multiplier() -> None:
    document = json.loads(run('hormander-norm', '--multiplier', 'constant', '--s', '1.5'))
    assert document['variation'] <= 1e-6
    assert 'beta' not in document


def test_list_checks() -> None:
    lines = run('list-checks').splitlines()
    assert len(lines) == 13
    assert lines[0].startswith('bernstein')


def test_config_file_with_overriding_flag(tmp_path) -> None:
    config = tmp_path / 'options.json'
    config.write_text(json.dumps({'d': 2, 'alpha': 0.5}))
    document = json.loads(run('constants', '--config', str(config), '--alpha', '1'))
    assert document['a_star'] == pytest.approx(critical_coupling(2, 1.0))


@pytest.mark.parametrize('content', ['{"d": 2, "colour": "red"}', 'not json'])
def test_bad_config_file(tmp_path, content: str) -> None:
    config = tmp_path / 'options.json'
    config.write_text(content)
    with pytest.raises(CommandError) as excinfo:
        run('constants', '--config', str(config))
    assert excinfo.value.returncode == 2


@pytest.mark.parametrize('content, field', [('{"d": "three"}', 'd'), ('{"alpha": null}', 'alpha'),
                                            ('{"grid_n": "many"}', 'grid_n')])
def test_config_field_of_wrong_type(tmp_path, content: str, field: str) -> None:
    config = tmp_path / 'options.json'
    config.write_text(content)
    with pytest.raises(CommandError, match=f'field {field} expects') as excinfo:
        run('constants', '--config', str(config))
    assert excinfo.value.returncode == 2


def test_config_numbers_given_as_strings(tmp_path) -> None:
    config = tmp_path / 'options.json'
    config.write_text(json.dumps({'d': '2', 'alpha': '1'}))
    document = json.loads(run('constants', '--config', str(config)))
    assert document['a_star'] == pytest.approx(critical_coupling(2, 1.0))


@pytest.mark.parametrize('args', [('constants', '--alpha', '2.5'), ('kernel', '--t', '-1'),
                                  ('semigroup', '--a', '-0.1'), ('lp-decompose', '--bands', '3')])
def test_domain_errors_exit_with_two(args: tuple) -> None:
    with pytest.raises(CommandError) as excinfo:
        run(*args)
    assert excinfo.value.returncode == 2


def test_verify_schur(isolated_fixtures) -> None:
    output = run('verify', 'schur', '--a', '1')
    summary, _, document = output.partition('\n')
    assert summary.split()[:2] == ['schur', PASS]
    assert json.loads(document)['reports'][0]['check'] == 'schur'


def test_failing_check_exits_with_one(mocker, isolated_fixtures) -> None:
    mocker.patch.object(RunService, 'run_one', return_value=_report('hardy', FAIL))
    with pytest.raises(CommandError) as excinfo:
        run('verify', 'hardy')
    assert excinfo.value.returncode == 1


def test_verify_all_writes_artifacts(mocker, tmp_path, isolated_fixtures) -> None:
    mock_run_all = mocker.patch.object(RunService, 'run_all',
                                       return_value=[_report('hardy', PASS), _report('schur', PASS)])
    run('verify-all', '--out', str(tmp_path / 'out'), '--jobs', '2')
    assert mock_run_all.call_args.args[2] == isolated_fixtures
    assert mock_run_all.call_args.kwargs['jobs'] == 2
    content = json.loads((tmp_path / 'out' / 'reports.json').read_text())
    assert [report['check'] for report in content['reports']] == ['hardy', 'schur']
    metadata = json.loads((tmp_path / 'out' / 'metadata.json').read_text())
    assert metadata['command'] == 'verify-all'
    assert metadata['options']['jobs'] == 2
    assert (tmp_path / 'out' / 'schur_trials.csv').exists()


def test_certify_writes_fixture(mocker, isolated_fixtures) -> None:
    mocker.patch('hardy.services.corridors.corridor_service.run_check',
                 side_effect=[_report('norm-equivalence', PASS), _report('norm-equivalence', PASS)])
    output = run('certify', 'norm-equivalence')
    assert output.startswith('Froze norm-equivalence|d=3|alpha=1.0|a=0.0|s=1.0|p=2.0')
    content = json.loads(isolated_fixtures.read_text())
    assert content['corridors']['norm-equivalence|d=3|alpha=1.0|a=0.0|s=1.0|p=2.0'] == [1.5 / 1.25, 1.5 * 1.25]
