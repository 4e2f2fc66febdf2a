import math

import pytest

from hardy.constants import FAIL, INCONCLUSIVE, PASS
from hardy.services.verification.report import (TrialRecord, VerificationReport, dilation_drift, judge_corridor,
                                                 refinement_drift)


@pytest.fixture
def report(hardy_params):
    report = VerificationReport('hardy', hardy_params)
    report.trials = [TrialRecord.measure(scale, ratio, 1.0) for scale, ratio in ((0.5, 1.2), (1.0, 1.5), (2.0, 1.3))]
    return report


def test_measure_edge_cases() -> None:
    assert TrialRecord.measure(1.0, 0.0, 0.0).ratio == 0.0
    assert TrialRecord.measure(1.0, 2.0, 0.0).ratio == math.inf
    record = TrialRecord.measure(1.0, 3.0, 2.0, 'inside')
    assert record.as_dict() == {'scale': 1.0, 'label': 'inside', 'lhs': 3.0, 'rhs': 2.0, 'ratio': 1.5}


def test_measured_corridor(report) -> None:
    assert report.measured_corridor() == (1.2, 1.5)
    report.trials.append(TrialRecord.measure(4.0, 1.0, 0.0))
    # infinite ratios are ignored
    assert report.measured_corridor() == (1.2, 1.5)
    assert all(math.isnan(bound) for bound in VerificationReport('hardy', None).measured_corridor())


def test_as_dict(report) -> None:
    report.note('first')
    content = report.as_dict()
    assert content['check'] == 'hardy'
    assert content['params']['a'] == 1.0
    assert content['verdict'] == INCONCLUSIVE
    assert len(content['trials']) == 3
    assert content['notes'] == ['first']


def test_unfrozen_corridor_is_inconclusive(report) -> None:
    judge_corridor(report, None)
    assert report.verdict == INCONCLUSIVE
    assert 'corridor not frozen' in report.notes
    assert report.corridor == (1.2, 1.5)


@pytest.mark.parametrize('frozen, verdict', [((1.0, 2.0), PASS), ((1.25, 2.0), FAIL), ((1.0, 1.4), FAIL)])
def test_frozen_corridor(report, frozen: tuple, verdict: str) -> None:
    judge_corridor(report, frozen)
    assert report.verdict == verdict


def test_refinement_drift_makes_report_inconclusive(report) -> None:
    judge_corridor(report, (1.0, 2.0), refined_ratios=[1.2, 1.5, 1.6])
    assert report.verdict == INCONCLUSIVE
    assert any('refinement drift exceeds' in note for note in report.notes)


def test_non_finite_ratio_fails(report) -> None:
    report.trials.append(TrialRecord.measure(4.0, 1.0, 0.0))
    judge_corridor(report, None)
    assert report.verdict == FAIL


def test_empty_report_is_inconclusive(hardy_params) -> None:
    report = VerificationReport('hardy', hardy_params)
    judge_corridor(report, None)
    assert report.verdict == INCONCLUSIVE


def test_drifts(report) -> None:
    assert refinement_drift([1.0, 2.0], [1.1, 2.0]) == pytest.approx(0.1)
    assert refinement_drift([], []) == 0.0
    assert dilation_drift(report.trials) == pytest.approx(0.25)
    assert dilation_drift(report.trials[:1]) == 0.0
