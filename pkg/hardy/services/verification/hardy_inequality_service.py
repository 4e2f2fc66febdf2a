import logging
import math
from typing import NamedTuple

import numpy as np
from scipy import integrate

from hardy.constants import (DILATION_DRIFT, FAIL, GROWTH_PER_STEP, INCONCLUSIVE, INEQUALITY_SLACK, PASS,
                             WINDOW_EDGE)
from hardy.services.verification.context import CheckContext
from hardy.services.verification.report import TrialRecord, VerificationReport, dilation_drift, judge_corridor
from processors.exceptions import DomainError
from processors.radial_core import RadialFunction, RadialGrid, lp_norm, multiplier_apply
from processors.spectral_calculus import fractional_power_apply, generator_apply
from processors.special_functions import Parameters, lp_hardy_constant, negative_coupling_window, sphere_area
from processors.trial_families import TrialFamily, plateau

logger = logging.getLogger(__name__)

FAILURE_STEPS = 4
FAILURE_R_MAX = 4.0
FAILURE_DECADES = 250


class SchurIntegral(NamedTuple):
    value: float
    converges: bool


def trial_members(trials, grid: RadialGrid, params: Parameters) -> list[tuple[float, RadialFunction]]:
    """Accepts a TrialFamily or explicit (scale, profile) pairs."""
    if isinstance(trials, TrialFamily):
        return trials.members(grid, params.alpha, params.p)
    return list(trials)


class HardyInequalityService:
    """Hardy-type inequalities measured on trial families."""

    @staticmethod
    def verify_hardy(trials, params: Parameters, context: CheckContext) -> VerificationReport:
        """
        ||(-Delta)^{alpha/4} f||_p >= C(d, alpha, p) || |x|^{-alpha/2} f ||_p on every trial.
        :param trials: TrialFamily or (scale, RadialFunction) pairs
        :param params: d, alpha and p are used
        :param context: grid on which trials are sampled
        """
        constant = lp_hardy_constant(params.d, params.alpha, params.p)
        report = VerificationReport('hardy', params)
        report.note(f'sharp constant {constant:.17g}, slack {INEQUALITY_SLACK:g}')
        holds = True
        for scale, f in trial_members(trials, context.grid, params):
            lhs = lp_norm(multiplier_apply(f, lambda k: k ** (params.alpha / 2)), params.p)
            rhs = constant * lp_norm(f, params.p, -params.alpha / 2)
            report.trials.append(TrialRecord.measure(scale, lhs, rhs))
            holds = holds and lhs >= rhs * (1 - INEQUALITY_SLACK)
        report.corridor = report.measured_corridor()
        report.verdict = PASS if holds else FAIL
        logger.info(f"verify_hardy {params.as_dict()}: {report.verdict} corridor {report.corridor}")
        return report

    @staticmethod
    def generalized_hardy_window(params: Parameters) -> tuple[float, float]:
        """Range of d/p on which || |x|^{-alpha s/2} f ||_p <~ || L^{s/2} f ||_p holds."""
        return params.alpha * params.s / 2 + params.delta, params.d - params.delta

    @staticmethod
    def failure_profile(params: Parameters, grid: RadialGrid) -> RadialFunction:
        """r^{-delta} cut off by the plateau; L-harmonic near the origin."""
        return RadialFunction(grid, grid.nodes ** -params.delta * plateau(grid.nodes))

    @staticmethod
    def failure_decades(params: Parameters) -> int:
        """Decades per step after which the divergent part of || |x|^{-alpha s/2} f ||_p^p has grown fourfold."""
        excess = params.p * (params.alpha * params.s / 2 + params.delta) - params.d
        return max(1, math.ceil(math.log10(4.0) / excess))

    @staticmethod
    def failure_grids(params: Parameters, steps: int = FAILURE_STEPS) -> list[RadialGrid]:
        """Grids reaching r_min = 10^{-m (k+1)} for k < steps, m = failure_decades."""
        decades = HardyInequalityService.failure_decades(params)
        grids = []
        for k in range(steps):
            exponent = decades * (k + 1)
            grids.append(RadialGrid(10.0 ** -exponent, FAILURE_R_MAX, max(64, 16 * (exponent + 1)), params.d))
        return grids

    @staticmethod
    def _failure_records(params: Parameters, context: CheckContext) -> list[TrialRecord]:
        rhs = lp_norm(fractional_power_apply(HardyInequalityService.failure_profile(params, context.grid),
                                             params.s, 'positive', params, context.n_steps), params.p)
        records = []
        for grid in HardyInequalityService.failure_grids(params):
            lhs = lp_norm(HardyInequalityService.failure_profile(params, grid), params.p,
                          -params.alpha * params.s / 2)
            records.append(TrialRecord.measure(grid.r_min, lhs, rhs))
        return records

    @staticmethod
    def _generalized_ratios(members, params: Parameters, context: CheckContext) -> list[TrialRecord]:
        records = []
        for scale, f in members:
            lhs = lp_norm(f, params.p, -params.alpha * params.s / 2)
            rhs = lp_norm(fractional_power_apply(f, params.s, 'positive', params, context.n_steps), params.p)
            records.append(TrialRecord.measure(scale, lhs, rhs))
        return records

    @staticmethod
    def verify_generalized_hardy(trials, params: Parameters, context: CheckContext) -> VerificationReport:
        """
        Inside the window the ratio || |x|^{-alpha s/2} f ||_p / || L^{s/2} f ||_p stays in a
        corridor; below it (d/p < alpha s/2 + delta) the weighted norm of the L-harmonic
        profile grows as r_min shrinks while || L^{s/2} f ||_p stays finite.
        """
        params.require_littlewood_paley()
        report = VerificationReport('generalized-hardy', params)
        lower, upper = HardyInequalityService.generalized_hardy_window(params)
        position = params.d / params.p
        if min(abs(position - lower), abs(position - upper)) <= WINDOW_EDGE:
            report.verdict = INCONCLUSIVE
            report.note(f'd/p={position} lies on the window boundary ({lower}, {upper})')
            return report
        if lower < position < upper:
            report.trials = HardyInequalityService._generalized_ratios(
                trial_members(trials, context.grid, params), params, context)
            refined = None
            if context.refine:
                fine = context.refined()
                refined = [r.ratio for r in HardyInequalityService._generalized_ratios(
                    trial_members(trials, fine.grid, params), params, fine)]
            judge_corridor(report, context.corridor, refined)
            return report

        if position >= upper:
            raise DomainError(f"d/p={position} exceeds the upper window edge d - delta = {upper}")
        depth = HardyInequalityService.failure_decades(params) * FAILURE_STEPS
        if depth > FAILURE_DECADES:
            report.verdict = INCONCLUSIVE
            report.note(f'failure regime needs r_min = 1e-{depth}, below 1e-{FAILURE_DECADES}')
            return report
        report.trials = HardyInequalityService._failure_records(params, context)
        report.corridor = report.measured_corridor()
        rhs = report.trials[0].rhs
        if not (math.isfinite(rhs) and rhs > 0):
            report.verdict = FAIL
            report.note(f'|| L^(s/2) f ||_p = {rhs} on the harmonic profile')
            return report
        energies = [record.ratio ** params.p for record in report.trials]
        growth = [later / earlier for earlier, later in zip(energies, energies[1:])]
        report.note(f'outside window: p-th power growth per step {["%.3f" % g for g in growth]}')
        report.verdict = PASS if all(g >= GROWTH_PER_STEP for g in growth) else FAIL
        return report

    @staticmethod
    def norm_equivalence_windows(params: Parameters) -> tuple[bool, bool]:
        """(item 1: || |p|^{alpha s/2} f || <~ || L^{s/2} f ||, item 2: the reverse)."""
        position = params.d / params.p
        order = params.alpha * params.s / 2
        first = order + params.delta < position < min(params.d, params.d - params.delta)
        second = order < position < params.d
        return first, second

    @staticmethod
    def _equivalence_records(members, params: Parameters, context: CheckContext) -> list[TrialRecord]:
        records = []
        for scale, f in members:
            free = lp_norm(multiplier_apply(f, lambda k: k ** (params.alpha * params.s / 2)), params.p)
            hardy = lp_norm(fractional_power_apply(f, params.s, 'positive', params, context.n_steps), params.p)
            records.append(TrialRecord.measure(scale, hardy, free))
        return records

    @staticmethod
    def verify_norm_equivalence(trials, params: Parameters, context: CheckContext) -> VerificationReport:
        """
        Ratios || L^{s/2} f ||_p / || |p|^{alpha s/2} f ||_p on every trial; both directions
        bounded and the ratio invariant under dyadic dilation within 3%.
        """
        params.require_littlewood_paley()
        first, second = HardyInequalityService.norm_equivalence_windows(params)
        if not (first or second):
            raise DomainError(f"d/p={params.d / params.p} lies outside both equivalence windows for "
                              f"{params.as_dict()}")
        report = VerificationReport('norm-equivalence', params)
        report.note(f'windows: item 1 {first}, item 2 {second}')
        members = trial_members(trials, context.grid, params)
        report.trials = HardyInequalityService._equivalence_records(members, params, context)

        if params.s == 2:
            for scale, f in members:
                generated = lp_norm(generator_apply(f, params), params.p)
                split = (lp_norm(multiplier_apply(f, lambda k: k ** params.alpha), params.p)
                         + abs(params.a) * lp_norm(f, params.p, -params.alpha))
                if generated > split * (1 + 1e-9):
                    report.verdict = FAIL
                    report.note(f'triangle inequality violated at scale {scale}')
                    report.corridor = report.measured_corridor()
                    return report

        refined = None
        if context.refine and params.a != 0:
            fine = context.refined()
            refined = [r.ratio for r in HardyInequalityService._equivalence_records(
                trial_members(trials, fine.grid, params), params, fine)]
        judge_corridor(report, context.corridor, refined)
        drift = dilation_drift(report.trials)
        report.note(f'dilation drift {drift:.3e}')
        if report.judgeable and drift > DILATION_DRIFT:
            report.verdict = FAIL
            report.note(f'dilation drift exceeds {DILATION_DRIFT:g}')
        return report

    @staticmethod
    def schur_integral(delta_plus: float, beta: float, p: float, d: int) -> SchurIntegral:
        """
        int_{R^d} (1 v |z|)^{2 delta_+ - d} |z|^{-delta_+ - beta/p} dz, split at |z| = 1.
        Finite iff delta_+ + beta/p < d and beta/p > delta_+; otherwise (inf, False).
        """
        weight = beta / p
        if not (delta_plus + weight < d and weight > delta_plus):
            return SchurIntegral(math.inf, False)
        inner, _ = integrate.quad(lambda r: r ** (d - 1 - delta_plus - weight), 0.0, 1.0, limit=200)
        outer, _ = integrate.quad(lambda r: r ** (delta_plus - weight - 1), 1.0, math.inf, limit=200)
        return SchurIntegral(sphere_area(d) * (inner + outer), True)

    @staticmethod
    def verify_negative_coupling_window(params: Parameters, context: CheckContext) -> VerificationReport:
        """
        For a < 0 the lower envelope |x|^{-delta} of e^{-L} phi near the origin has finite
        L^p norm for p < d/delta and a grid-divergent norm beyond. Envelope level only.
        """
        if params.a >= 0:
            raise DomainError(f"negative coupling window requires a < 0, got a={params.a}")
        low, high = negative_coupling_window(params)
        report = VerificationReport('negative-window', params)
        report.note(f'window ({low:.6g}, {high:.6g}); lower edge follows by duality')
        inside = 0.5 * (low + high)
        outside = 1.2 * high
        verdict = PASS
        for p, expect_growth in ((inside, False), (outside, True)):
            norms = []
            for exponent in (4, 6, 8):
                grid = RadialGrid(10.0 ** -exponent, 4.0, 64 * (exponent + 1), params.d)
                envelope = np.maximum(1.0, 1.0 / grid.nodes) ** params.delta * plateau(grid.nodes)
                norms.append(lp_norm(RadialFunction(grid, envelope), p))
            growth = norms[-1] / norms[0]
            report.trials.append(TrialRecord.measure(p, norms[-1], norms[0], 'outside' if expect_growth else 'inside'))
            if expect_growth and growth < 1.2 or not expect_growth and growth > 1.05:
                verdict = FAIL
        report.verdict = verdict
        report.corridor = report.measured_corridor()
        return report

    @staticmethod
    def verify_schur(params: Parameters, samples: int = 9) -> VerificationReport:
        """
        Schur integrals over the admissible weight range (p v p') delta_+ < beta <
        (p ^ p')(d - delta_+) are finite, and the finiteness flag agrees with the
        exponent test on both sides of the range.
        """
        p, d, delta_plus = params.p, params.d, params.delta_plus
        conjugate = p / (p - 1)
        low, high = max(p, conjugate) * delta_plus, min(p, conjugate) * (d - delta_plus)
        report = VerificationReport('schur', params)
        report.note(f'admissible beta range ({low:.6g}, {high:.6g})')
        if not low < high:
            report.verdict = INCONCLUSIVE
            report.note('empty admissible range')
            return report
        verdict = PASS
        for beta in np.linspace(low, high, samples + 2)[1:-1]:
            result = HardyInequalityService.schur_integral(delta_plus, beta, p, d)
            report.trials.append(TrialRecord.measure(beta, result.value, 1.0, 'inside'))
            verdict = verdict if result.converges and math.isfinite(result.value) else FAIL
        for beta in (p * (d - delta_plus) * 1.05, p * delta_plus * 0.95):
            result = HardyInequalityService.schur_integral(delta_plus, beta, p, d)
            report.trials.append(TrialRecord.measure(beta, result.value, 1.0, 'outside'))
            verdict = verdict if not result.converges else FAIL
        report.corridor = report.measured_corridor()
        report.verdict = verdict
        return report
