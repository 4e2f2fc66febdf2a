import pytest

from hardy.constants import FAIL, INCONCLUSIVE, PASS
from hardy.services.corridors.corridor_service import CorridorService
from hardy.services.runs.run_service import RunService
from hardy.services.verification.context import CheckContext
from hardy.services.verification.registry import CHECKS
from hardy.services.verification.report import VerificationReport
from processors.exceptions import NumericalError, UndersampledError, UnsupportedError


@pytest.fixture
def context(grid3):
    return CheckContext(grid=grid3, refine=False)


@pytest.fixture
def fake_run_check(mocker):
    """Records the corridor each check sees; 'sandwich' is not applicable, 'holder' fails."""
    seen = {}

    def run(name, params, context, options=None):
        seen[name] = context.corridor
        if name == 'sandwich':
            raise UnsupportedError('not for these parameters')
        return VerificationReport(name, params, verdict=FAIL if name == 'holder' else PASS)

    mocker.patch('hardy.services.runs.run_service.run_check', side_effect=run)
    return seen


def test_run_one_uses_frozen_corridor(fake_run_check, hardy_params, context, corridor_file) -> None:
    key = CorridorService.corridor_key('bernstein', hardy_params)
    CorridorService.save(corridor_file, {key: (0.5, 2.0)})
    report = RunService.run_one('bernstein', hardy_params, context, corridor_file)
    assert report.verdict == PASS
    assert fake_run_check['bernstein'] == (0.5, 2.0)
    RunService.run_one('hardy', hardy_params, context, corridor_file)
    assert fake_run_check['hardy'] is None


def test_run_all_orders_and_classifies(fake_run_check, hardy_params, context, corridor_file) -> None:
    reports = RunService.run_all(hardy_params, context, corridor_file, jobs=3)
    assert [report.check_name for report in reports] == sorted(CHECKS)
    verdicts = {report.check_name: report.verdict for report in reports}
    assert verdicts['sandwich'] == INCONCLUSIVE
    assert verdicts['holder'] == FAIL
    assert verdicts['hardy'] == PASS
    sandwich = next(report for report in reports if report.check_name == 'sandwich')
    assert sandwich.notes[0].startswith('not applicable')
    assert RunService.exit_status(reports) == 1


def test_run_all_with_selected_names(fake_run_check, hardy_params, context, corridor_file) -> None:
    reports = RunService.run_all(hardy_params, context, corridor_file, names=['schur', 'hardy'])
    assert [report.check_name for report in reports] == ['hardy', 'schur']
    assert RunService.exit_status(reports) == 0


def test_exit_status_ignores_inconclusive(hardy_params) -> None:
    reports = [VerificationReport('hardy', hardy_params, verdict=INCONCLUSIVE),
               VerificationReport('schur', hardy_params, verdict=PASS)]
    assert RunService.exit_status(reports) == 0
    assert RunService.exit_status([]) == 0


@pytest.mark.parametrize('error, verdict, first_note', [
    (NumericalError('gamma tail too heavy', {'tail_share': 0.4}), FAIL, 'numerical failure: gamma tail too heavy'),
    (UndersampledError('dilation 64 beyond the sampled multiplier'), INCONCLUSIVE, 'undersampled'),
])
def test_run_all_survives_broken_check(mocker, hardy_params, context, corridor_file, error, verdict: str,
                                       first_note: str) -> None:
    def run(name, params, context, options=None):
        if name == 'bernstein':
            raise error
        return VerificationReport(name, params, verdict=PASS)

    mocker.patch('hardy.services.runs.run_service.run_check', side_effect=run)
    reports = RunService.run_all(hardy_params, context, corridor_file, jobs=2)
    assert len(reports) == len(CHECKS)
    broken = reports[0]
    assert broken.check_name == 'bernstein'
    assert broken.verdict == verdict
    assert broken.notes[0].startswith(first_note)
    assert all(report.verdict == PASS for report in reports[1:])


def test_numerical_failure_keeps_diagnostics(mocker, hardy_params, context, corridor_file) -> None:
    mocker.patch('hardy.services.runs.run_service.run_check',
                 side_effect=NumericalError('quadrature stalled', {'tail_share': 0.4, 'nodes': 64}))
    reports = RunService.run_all(hardy_params, context, corridor_file, names=['heat-bounds'])
    assert reports[0].notes == ['numerical failure: quadrature stalled', 'tail_share=0.4', 'nodes=64']
    assert RunService.exit_status(reports) == 1
