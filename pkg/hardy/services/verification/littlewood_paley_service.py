import logging

import numpy as np

from hardy.constants import BAND_TAIL_LIMIT, DILATION_DRIFT, FAIL, INCONCLUSIVE, PASS
from hardy.services.verification.context import CheckContext
from hardy.services.verification.hardy_inequality_service import trial_members
from hardy.services.verification.report import TrialRecord, VerificationReport, dilation_drift, judge_corridor
from processors.exceptions import DomainError
from processors.radial_core import RadialFunction, hankel_transform, lp_norm
from processors.spectral_calculus import (BandRange, DyadicBand, hormander_norms, hormander_refinement_sweep,
                                          imaginary_power, littlewood_paley_decomposition, lp_projection,
                                          riesz_mean, sharp_band_symbol)
from processors.special_functions import Parameters

logger = logging.getLogger(__name__)

SHARP_BRACKET_SLACK = 1e-6


def _weighted_bands(bands: list[DyadicBand], alpha: float, s: float) -> np.ndarray:
    return np.array([band.frequency ** (alpha * s / 2) * band.projected.values for band in bands])


class LittlewoodPaleyService:
    """Checks built on dyadic frequency bands of the Hardy operator."""

    @staticmethod
    def _reverse_records(members, params: Parameters, context: CheckContext) -> tuple[list[TrialRecord], float]:
        free = params.with_(a=0.0)
        records, worst_tail = [], 0.0
        for scale, f in members:
            free_bands = _weighted_bands(littlewood_paley_decomposition(
                f, free, context.band_range, context.n_steps, context.jobs), params.alpha, params.s)
            if params.a == 0:
                hardy_bands = free_bands
            else:
                hardy_bands = _weighted_bands(littlewood_paley_decomposition(
                    f, params, context.band_range, context.n_steps, context.jobs), params.alpha, params.s)
            difference = np.sqrt(np.sum(free_bands ** 2, axis=0)) - np.sqrt(np.sum(hardy_bands ** 2, axis=0))
            lhs = lp_norm(f.with_values(difference), params.p)
            rhs = lp_norm(f, params.p, -params.alpha * params.s / 2)
            records.append(TrialRecord.measure(scale, lhs, rhs))
            if lhs > 0:
                extremes = free_bands[[0, -1]] - hardy_bands[[0, -1]]
                tail = lp_norm(f.with_values(np.sqrt(np.sum(extremes ** 2, axis=0))), params.p)
                worst_tail = max(worst_tail, tail / lhs)
        return records, worst_tail

    @staticmethod
    def verify_reverse_hardy(trials, params: Parameters, context: CheckContext) -> VerificationReport:
        """
        || S_0 f - S_a f ||_p <~ || |x|^{-alpha s/2} f ||_p with S the square functions of
        the free and the Hardy operator over the configured band range.
        """
        params.require_littlewood_paley()
        if not 0 < params.s < 2:
            raise DomainError(f"reverse Hardy requires s in (0, 2), got s={params.s}")
        report = VerificationReport('reverse-hardy', params)
        report.trials, tail = LittlewoodPaleyService._reverse_records(
            trial_members(trials, context.grid, params), params, context)
        report.note(f'bands {context.band_range.j_min}..{context.band_range.j_max}, extreme-band share {tail:.3e}')
        if params.a == 0:
            report.corridor = report.measured_corridor()
            report.verdict = PASS if all(record.lhs == 0 for record in report.trials) else FAIL
            return report
        if tail > BAND_TAIL_LIMIT:
            report.corridor = report.measured_corridor()
            report.verdict = INCONCLUSIVE
            report.note(f'band truncation tail exceeds {BAND_TAIL_LIMIT:g} of the left-hand side')
            return report
        refined = None
        if context.refine:
            fine = context.refined()
            refined = [r.ratio for r in LittlewoodPaleyService._reverse_records(
                trial_members(trials, fine.grid, params), params, fine)[0]]
        judge_corridor(report, context.corridor, refined)
        drift = dilation_drift(report.trials)
        report.note(f'dilation drift {drift:.3e}')
        if report.judgeable and drift > DILATION_DRIFT:
            report.verdict = FAIL
        return report

    @staticmethod
    def _bernstein_records(members, params: Parameters, p: float, q: float,
                           context: CheckContext) -> list[TrialRecord]:
        records = []
        for scale, f in members:
            norm = lp_norm(f, p)
            for j in context.band_range:
                N = 2.0 ** j
                projected = lp_projection(f, N, params, context.n_steps)
                records.append(TrialRecord.measure(N, lp_norm(projected, q),
                                                   N ** (params.d * (1 / p - 1 / q)) * norm, f'scale={scale:g}'))
        return records

    @staticmethod
    def sharp_band_ratios(f: RadialFunction, params: Parameters, band_range: BandRange) -> list[tuple[int, float]]:
        """N^{alpha s/2} ||P~_N f||_2 / || |p|^{alpha s/2} P~_N f ||_2 per band, computed on the transform."""
        transformed = hankel_transform(f, 'forward')
        k = transformed.grid.nodes
        order = params.alpha * params.s / 2
        ratios = []
        for j in band_range:
            N = 2.0 ** j
            band = transformed.values * sharp_band_symbol(k ** params.alpha, N, params.alpha)
            if not np.any(band):
                continue
            numerator = N ** order * lp_norm(transformed.with_values(band), 2.0)
            denominator = lp_norm(transformed.with_values(k ** order * band), 2.0)
            ratios.append((j, numerator / denominator))
        return ratios

    @staticmethod
    def verify_bernstein(trials, params: Parameters, p: float, q: float, context: CheckContext) -> VerificationReport:
        """
        ||P_N f||_q / (N^{d(1/p - 1/q)} ||f||_p) uniformly bounded over the band range; for
        a = 0 also the bracket [2^{-s/2}, 2^{alpha s/2}] of the sharp-band Bernstein ratio.
        """
        params.require_littlewood_paley()
        if not 1 < p <= q:
            raise DomainError(f"Bernstein check requires 1 < p <= q, got p={p}, q={q}")
        report = VerificationReport('bernstein', params)
        members = trial_members(trials, context.grid, params)
        report.trials = LittlewoodPaleyService._bernstein_records(members, params, p, q, context)
        refined = None
        if context.refine:
            fine = context.refined()
            refined = [r.ratio for r in LittlewoodPaleyService._bernstein_records(
                trial_members(trials, fine.grid, params), params, p, q, fine)]
        judge_corridor(report, context.corridor, refined)
        if params.a == 0:
            low = 2 ** (-params.s / 2) * (1 - SHARP_BRACKET_SLACK)
            high = 2 ** (params.alpha * params.s / 2) * (1 + SHARP_BRACKET_SLACK)
            for scale, f in members:
                outside = [j for j, ratio in LittlewoodPaleyService.sharp_band_ratios(f, params, context.band_range)
                           if not low <= ratio <= high]
                if outside:
                    report.verdict = FAIL
                    report.note(f'sharp-band ratio outside [{low:.6g}, {high:.6g}] at scale {scale} bands {outside}')
        return report

    @staticmethod
    def verify_hormander(s: float, n_points: int = 4096) -> VerificationReport:
        """
        Hormander functional of F = 1, F = lam^{i}, and the Riesz means (1 - lam)_+^beta
        with beta = s - 1/2 -+ 0.3; the Riesz mean must blow up under refinement exactly
        below the threshold.
        """
        report = VerificationReport('hormander', None)
        verdict = PASS
        for label, F in (('constant', lambda lam: np.ones_like(lam)), ('imaginary-power', imaginary_power(1.0))):
            norms = hormander_norms(F, s, n_points)
            variation = float(norms.max() / norms.min() - 1)
            report.trials.append(TrialRecord.measure(0.0, float(norms.max()), float(norms.min()), label))
            if variation > 1e-6:
                verdict = FAIL
                report.note(f'{label}: variation over t {variation:.3e}')
        for beta in (s - 0.5 - 0.3, s - 0.5 + 0.3):
            if beta <= 0:
                continue
            sweep = hormander_refinement_sweep(riesz_mean(beta), s)
            report.trials.append(TrialRecord.measure(beta, sweep.norms[-1], sweep.norms[0], f'riesz-mean beta={beta:g}'))
            expect_unbounded = beta < s - 0.5
            report.note(f'riesz mean beta={beta:g}: unbounded={sweep.unbounded}')
            if sweep.unbounded != expect_unbounded:
                verdict = FAIL
        report.corridor = report.measured_corridor()
        report.verdict = verdict
        return report
