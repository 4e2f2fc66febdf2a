import json
import math
from pathlib import Path

import pytest

from hardy.constants import FAIL, PASS
from hardy.services.corridors.corridor_service import CorridorService
from hardy.services.verification.context import CheckContext
from hardy.services.verification.report import TrialRecord, VerificationReport, judge_corridor
from processors.exceptions import DomainError


def _report(params, ratios) -> VerificationReport:
    report = VerificationReport('norm-equivalence', params, verdict=PASS)
    report.trials = [TrialRecord.measure(float(i), ratio, 1.0) for i, ratio in enumerate(ratios)]
    return report


@pytest.fixture
def context(grid3):
    return CheckContext(grid=grid3)


@pytest.fixture
def mock_run_check(mocker, hardy_params):
    """Coarse run measures [1, 2], the refined run [1.01, 2.02]."""
    return mocker.patch('hardy.services.corridors.corridor_service.run_check',
                        side_effect=[_report(hardy_params, [1.0, 2.0]), _report(hardy_params, [1.01, 2.02])])


def test_corridor_key(hardy_params) -> None:
    assert CorridorService.corridor_key('hardy', hardy_params) == 'hardy|d=3|alpha=1.0|a=1.0|s=1.0|p=2.0'


def test_missing_file_has_no_corridors(tmp_path) -> None:
    assert CorridorService.load(tmp_path / 'absent.json') == {}


def test_save_and_load(corridor_file) -> None:
    CorridorService.save(corridor_file, {'b|x': (0.5, 2.0), 'a|x': (1.0, 1.5)})
    content = json.loads(corridor_file.read_text())
    assert list(content['corridors']) == ['a|x', 'b|x']
    assert CorridorService.load(corridor_file) == {'a|x': (1.0, 1.5), 'b|x': (0.5, 2.0)}


@pytest.mark.parametrize('text', [
    'not json',
    '{"schema_version": 2, "corridors": {}}',
    '{"schema_version": 1, "corridors": {"k": [2.0, 1.0]}}',
    '{"schema_version": 1, "corridors": {"k": [1.0]}}',
])
def test_malformed_fixtures(tmp_path, text: str) -> None:
    path = tmp_path / 'corridors.json'
    path.write_text(text)
    with pytest.raises(DomainError, match='fixtures'):
        CorridorService.load(path)


def test_certify_freezes_widened_corridor(mock_run_check, hardy_params, context, corridor_file) -> None:
    certified = CorridorService.certify('norm-equivalence', hardy_params, context, corridor_file, slack=2.0)
    assert certified.corridor == (0.5, 4.0)
    assert CorridorService.lookup(corridor_file, 'norm-equivalence', hardy_params) == (0.5, 4.0)
    coarse_context = mock_run_check.call_args_list[0].args[2]
    assert coarse_context.corridor is None and coarse_context.refine is False
    refined_context = mock_run_check.call_args_list[1].args[2]
    assert refined_context.grid.n_points == 2 * context.grid.n_points - 1


def test_certify_rejects_drifting_corridor(mocker, hardy_params, context, corridor_file) -> None:
    mocker.patch('hardy.services.corridors.corridor_service.run_check',
                 side_effect=[_report(hardy_params, [1.0, 2.0]), _report(hardy_params, [1.0, 3.0])])
    with pytest.raises(DomainError, match='refinement'):
        CorridorService.certify('norm-equivalence', hardy_params, context, corridor_file)
    assert CorridorService.load(corridor_file) == {}


def test_certify_rejects_degenerate_corridor(mocker, hardy_params, context, corridor_file) -> None:
    mocker.patch('hardy.services.corridors.corridor_service.run_check',
                 return_value=_report(hardy_params, [0.0, 2.0]))
    with pytest.raises(DomainError, match='cannot be frozen'):
        CorridorService.certify('norm-equivalence', hardy_params, context, corridor_file)


def test_certify_arguments(hardy_params, context, corridor_file) -> None:
    with pytest.raises(DomainError, match='no ratio corridor'):
        CorridorService.certify('schur', hardy_params, context, corridor_file)
    with pytest.raises(DomainError, match='slack'):
        CorridorService.certify('bernstein', hardy_params, context, corridor_file, slack=0.5)


SHIPPED = Path(__file__).resolve().parent.parent / 'fixtures' / 'corridors.json'


def test_shipped_corridors_hold_the_closed_form_bounds(hardy_params, poisson_params) -> None:
    corridors = CorridorService.load(SHIPPED)
    assert len(corridors) == 4
    # 1 <= ||L^{1/2} f|| / ||p|^{1/2} f|| <= (1 + a pi / 2)^{1/2}
    low, high = corridors[CorridorService.corridor_key('norm-equivalence', hardy_params)]
    assert low < 1.0 and high > math.sqrt(1 + math.pi / 2)
    low, high = corridors[CorridorService.corridor_key('norm-equivalence', poisson_params)]
    assert low < 1.0 < high
    # || |x|^{-1/2} f || / ||L^{1/2} f|| <= (2 / pi + a)^{-1/2}
    _, high = corridors[CorridorService.corridor_key('generalized-hardy', hardy_params)]
    assert high > (2 / math.pi + 1) ** -0.5
    _, high = corridors[CorridorService.corridor_key('generalized-hardy', poisson_params)]
    assert high > math.sqrt(math.pi / 2)


@pytest.mark.parametrize('ratio, verdict', [(1.4142, PASS), (1e6, FAIL), (1e-6, FAIL), (0.5, FAIL)])
def test_shipped_corridor_judges_ratios(hardy_params, ratio: float, verdict: str) -> None:
    frozen = CorridorService.lookup(SHIPPED, 'norm-equivalence', hardy_params)
    report = _report(hardy_params, [1.2, ratio])
    judge_corridor(report, frozen)
    assert report.verdict == verdict


def test_unlisted_parameters_have_no_shipped_corridor(hardy_params) -> None:
    assert CorridorService.lookup(SHIPPED, 'norm-equivalence', hardy_params.with_(p=3.0)) is None
