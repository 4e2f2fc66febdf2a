import math
from dataclasses import dataclass, field

import numpy as np

from hardy.constants import FAIL, INCONCLUSIVE, PASS, REFINEMENT_DRIFT
from processors.special_functions import Parameters

UNFROZEN = 'corridor not frozen'


@dataclass(frozen=True)
class TrialRecord:
    scale: float
    lhs: float
    rhs: float
    ratio: float
    label: str = ''

    @classmethod
    def measure(cls, scale: float, lhs: float, rhs: float, label: str = '') -> 'TrialRecord':
        """Ratio lhs/rhs; a vanishing pair counts as ratio 0, a vanishing rhs alone as infinity."""
        if rhs == 0:
            ratio = 0.0 if lhs == 0 else math.inf
        else:
            ratio = lhs / rhs
        return cls(scale, float(lhs), float(rhs), float(ratio), label)

    def as_dict(self) -> dict:
        return {'scale': self.scale, 'label': self.label, 'lhs': self.lhs, 'rhs': self.rhs, 'ratio': self.ratio}


@dataclass
class VerificationReport:
    check_name: str
    params: Parameters | None
    trials: list[TrialRecord] = field(default_factory=list)
    verdict: str = INCONCLUSIVE
    corridor: tuple[float, float] = (math.nan, math.nan)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def judgeable(self) -> bool:
        """Passed, or inconclusive only for want of a frozen corridor."""
        return self.passed or (self.verdict == INCONCLUSIVE and UNFROZEN in self.notes)

    @property
    def ratios(self) -> np.ndarray:
        return np.array([record.ratio for record in self.trials])

    def note(self, message: str) -> None:
        self.notes.append(message)

    def measured_corridor(self) -> tuple[float, float]:
        ratios = self.ratios[np.isfinite(self.ratios)]
        if ratios.size == 0:
            return math.nan, math.nan
        return float(ratios.min()), float(ratios.max())

    def as_dict(self) -> dict:
        return {
            'check': self.check_name,
            'params': self.params.as_dict() if self.params is not None else None,
            'trials': [record.as_dict() for record in self.trials],
            'corridor': list(self.corridor),
            'verdict': self.verdict,
            'notes': list(self.notes),
        }


def refinement_drift(coarse: list[float], fine: list[float]) -> float:
    """Largest relative change of paired ratios between two resolutions."""
    coarse, fine = np.asarray(coarse, dtype=float), np.asarray(fine, dtype=float)
    scale = np.maximum(np.abs(coarse), 1e-300)
    return float(np.max(np.abs(fine - coarse) / scale)) if coarse.size else 0.0


def judge_corridor(report: VerificationReport, frozen: tuple[float, float] | None,
                   refined_ratios: list[float] | None = None, drift_limit: float = REFINEMENT_DRIFT) -> None:
    """
    Sets the verdict of a corridor check: every ratio finite, refinement drift
    below drift_limit (else inconclusive) and every ratio inside the frozen
    corridor. Without a frozen corridor the verdict stays inconclusive.
    """
    ratios = report.ratios
    report.corridor = report.measured_corridor()
    if ratios.size == 0:
        report.verdict = INCONCLUSIVE
        report.note('no trials')
        return
    if not np.all(np.isfinite(ratios)):
        report.verdict = FAIL
        report.note('non-finite ratio')
        return
    if refined_ratios is not None:
        drift = refinement_drift(list(ratios), refined_ratios)
        report.note(f'refinement drift {drift:.3e}')
        if drift > drift_limit:
            report.verdict = INCONCLUSIVE
            report.note(f'refinement drift exceeds {drift_limit:g}')
            return
    if frozen is None:
        report.verdict = INCONCLUSIVE
        report.note(UNFROZEN)
        return
    low, high = frozen
    inside = bool(np.all((ratios >= low) & (ratios <= high)))
    report.verdict = PASS if inside else FAIL
    report.note(f'frozen corridor [{low:.6g}, {high:.6g}]')


def dilation_drift(records: list[TrialRecord]) -> float:
    """max/min - 1 over the positive ratios of a dilation family."""
    ratios = np.array([record.ratio for record in records if record.ratio > 0])
    if ratios.size < 2:
        return 0.0
    return float(ratios.max() / ratios.min() - 1)
