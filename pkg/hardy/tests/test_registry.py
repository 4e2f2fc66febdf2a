from pathlib import Path

import pytest

from hardy.config import VerificationConfig
from hardy.constants import PASS
from hardy.services.verification.context import CheckContext
from hardy.services.verification.registry import CHECKS, CheckOptions, build_family, check_names, get_check, run_check
from processors.exceptions import DomainError


def test_check_names() -> None:
    assert check_names() == ['bernstein', 'difference-bound', 'generalized-hardy', 'hardy', 'heat-bounds', 'holder',
                             'hormander', 'kernel-integrability', 'negative-window', 'norm-equivalence',
                             'reverse-hardy', 'sandwich', 'schur']
    assert all(check.description for check in CHECKS.values())


def test_unknown_check() -> None:
    with pytest.raises(DomainError, match='check: unknown'):
        get_check('energy')


@pytest.mark.parametrize('family, kind, count', [
    ('gaussian', 'gaussian_bump', 5),
    ('plateau', 'plateau_bump', 5),
    ('power_tail', 'power_tail', 5),
    ('near_extremal', 'near_extremal', 1),
])
def test_build_family(family: str, kind: str, count: int) -> None:
    trials = build_family(CheckOptions(family=family))
    assert trials.kind == kind
    assert len(trials.scale_set) == count


def test_build_family_rejects_unknown_name() -> None:
    with pytest.raises(DomainError, match='family'):
        build_family(CheckOptions(family='triangle'))


def test_run_check_dispatches(hardy_params, grid3) -> None:
    report = run_check('schur', hardy_params, CheckContext(grid=grid3))
    assert report.check_name == 'schur'
    assert report.verdict == PASS


def test_context_refinement(grid3) -> None:
    context = CheckContext(grid=grid3, n_steps=8)
    fine = context.refined()
    assert fine.n_steps == 16 and fine.refine is False
    assert fine.grid == grid3.refined()


def test_context_from_config() -> None:
    context = CheckContext.from_config(2, n_steps=4)
    assert context.grid.d == 2
    assert context.grid.n_points == VerificationConfig.GRID_N
    assert context.n_steps == 4
    assert context.band_range.j_min == VerificationConfig.BAND_MIN


def test_fixtures_path_precedence(monkeypatch, tmp_path) -> None:
    monkeypatch.delenv('HARDY_CALC_FIXTURES', raising=False)
    assert VerificationConfig.fixtures_path() == Path(__file__).resolve().parent.parent / 'fixtures' / 'corridors.json'
    assert VerificationConfig.fixtures_path(str(tmp_path / 'mine.json')) == tmp_path / 'mine.json'
    monkeypatch.setenv('HARDY_CALC_FIXTURES', str(tmp_path / 'env.json'))
    assert VerificationConfig.fixtures_path(str(tmp_path / 'mine.json')) == tmp_path / 'env.json'
