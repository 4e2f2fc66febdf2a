import logging
import math

import numpy as np

from hardy.constants import (CANCELLATION_FACTOR, CANCELLATION_RADIUS, FAIL, HEAT_CORRIDOR_DRIFT, INCONCLUSIVE,
                             MAX_DROPPED_SHARE, ORDER_SLACK, PASS, TROTTER_NOISE)
from hardy.services.verification.context import CheckContext
from hardy.services.verification.report import TrialRecord, VerificationReport, judge_corridor
from processors.exceptions import DomainError
from processors.heat_kernels import (KernelSample, PotentialSpec, difference_kernel_column, free_heat_kernel,
                                     hardy_kernel_column, hardy_semigroup_apply, heat_envelope_shape,
                                     holder_cancellation, kernel_l2_mass, kernel_moment_integral, lm_bounds,
                                     spherical_mean)
from processors.radial_core import RadialFunction, lp_norm
from processors.special_functions import Parameters, delta_from_coupling, free_kernel_l2_constant

logger = logging.getLogger(__name__)

DEFAULT_TIMES = (0.5, 1.0, 2.0)
DEFAULT_CENTERS = (0.5, 1.0, 2.0)


class HeatKernelService:
    """Two-sided heat kernel bounds and the kernel integrals behind them."""

    @staticmethod
    def free_samples(params: Parameters, times, radii) -> list[KernelSample]:
        """Samples of the free kernel at |x - y| = r with y = 0."""
        samples = []
        for t in times:
            for r in radii:
                value = free_heat_kernel(t, r, params.d, params.alpha)
                samples.append(KernelSample(t, r, 0.0, r, value))
        return samples

    @staticmethod
    def column_samples(params: Parameters, context: CheckContext, times=DEFAULT_TIMES,
                       centers=DEFAULT_CENTERS, stride: int = 4, span: float = 16.0) -> list[KernelSample]:
        """
        Spherical-mean kernel values read off semigroup columns at grid nodes within
        a factor `span` of each center; envelopes are averaged the same way.
        """
        grid = context.grid
        samples = []
        for t in times:
            for y in centers:
                column = hardy_kernel_column(t, y, params, context.n_steps, grid)
                picked = np.nonzero((grid.nodes >= y / span) & (grid.nodes <= y * span))[0][::stride]
                for i in picked:
                    x = float(grid.nodes[i])
                    shape = spherical_mean(lambda dist: heat_envelope_shape(t, x, y, dist, params), x, y, params.d)
                    samples.append(KernelSample(t, x, y, abs(x - y), float(column.values[i]), shape, shape,
                                                averaged=True))
        return samples

    @staticmethod
    def _envelope_shapes(samples: list[KernelSample], params: Parameters,
                         report: VerificationReport) -> list[float] | None:
        """Envelope shape per sample, or None if an envelope vanishes where the kernel does not."""
        shapes = []
        for sample in samples:
            shape = (sample.envelope_low if sample.averaged
                     else heat_envelope_shape(sample.t, sample.x_norm, sample.y_norm, sample.xy_distance, params))
            if shape == 0 and sample.value > 0:
                report.note(f'envelope vanishes at t={sample.t}, |x|={sample.x_norm}, |y|={sample.y_norm} '
                            f'with value {sample.value:.3e}')
                return None
            shapes.append(shape)
        return shapes

    @staticmethod
    def verify_heat_bounds(samples: list[KernelSample], params: Parameters, context: CheckContext,
                           refined_samples: list[KernelSample] | None = None) -> VerificationReport:
        """
        value / envelope over all samples gives (c_low, c_high); pass iff 0 < c_low,
        c_high < inf and both move by at most 10% on the refined sample set.
        """
        report = VerificationReport('heat-bounds', params)
        shapes = HeatKernelService._envelope_shapes(samples, params, report)
        if shapes is None:
            report.verdict = FAIL
            return report
        report.trials = [TrialRecord.measure(s.t, s.value, shape, f'x={s.x_norm:.6g},y={s.y_norm:.6g}')
                         for s, shape in zip(samples, shapes)]
        c_low, c_high = report.measured_corridor()
        report.corridor = (c_low, c_high)
        if not (c_low > 0 and math.isfinite(c_high)):
            report.verdict = FAIL
            report.note(f'degenerate corridor ({c_low:.3e}, {c_high:.3e})')
            return report
        if refined_samples is not None:
            refined_shapes = HeatKernelService._envelope_shapes(refined_samples, params, report)
            if refined_shapes is None:
                report.verdict = FAIL
                return report
            refined = [s.value / shape for s, shape in zip(refined_samples, refined_shapes) if shape > 0]
            drift = max(abs(min(refined) / c_low - 1), abs(max(refined) / c_high - 1))
            report.note(f'corridor drift under refinement {drift:.3e}')
            if drift > HEAT_CORRIDOR_DRIFT:
                report.verdict = INCONCLUSIVE
                return report
        if context.corridor is not None:
            low, high = context.corridor
            report.verdict = PASS if low <= c_low and c_high <= high else FAIL
        else:
            report.verdict = PASS
        return report

    @staticmethod
    def _difference_values(t: float, y: float, params: Parameters, context: CheckContext):
        free, difference = difference_kernel_column(t, y, params, context.n_steps, context.grid)
        _, finer = difference_kernel_column(t, y, params, 2 * context.n_steps, context.grid)
        hardy = free - difference
        return free.values, hardy.values, difference.values, np.abs(finer.values - difference.values)

    @staticmethod
    def verify_difference_bound(params: Parameters, context: CheckContext, times=(1.0,),
                                centers=(0.5, 1.0, 2.0, 4.0), stride: int = 3) -> VerificationReport:
        """
        |K_t| / (L + M) bounded with K_t = free column minus Hardy column; samples with
        Strang noise above 10% of |K_t| are dropped. Also measures the cancellation
        factor min(free, Hardy) / |K_t| at |x| = |y| = 8, t = 1.
        """
        params.require_littlewood_paley()
        report = VerificationReport('difference-bound', params)
        grid = context.grid
        total = dropped = 0
        for t in times:
            for y in centers:
                _, _, difference, noise = HeatKernelService._difference_values(t, y, params, context)
                picked = np.nonzero((grid.nodes >= 0.1) & (grid.nodes <= 10.0))[0][::stride]
                for i in picked:
                    x = float(grid.nodes[i])
                    total += 1
                    value = abs(float(difference[i]))
                    if noise[i] > TROTTER_NOISE * value and value > 0:
                        dropped += 1
                        continue
                    bound = spherical_mean(lambda dist: sum(lm_bounds(t, x, y, dist, params)),
                                           x, y, params.d)
                    report.trials.append(TrialRecord.measure(t, value, bound, f'x={x:.6g},y={y:.6g}'))
        report.note(f'{dropped} of {total} samples dropped for Strang noise')

        cancellation = HeatKernelService.cancellation_factor(params, context)
        report.note(f'cancellation factor at |x|=|y|={CANCELLATION_RADIUS:g}: {cancellation:.4g}')
        if params.a != 0:
            inner = HeatKernelService.cancellation_factor(params, context, radius=CANCELLATION_RADIUS / 2)
            report.note(f'cancellation factor at |x|=|y|={CANCELLATION_RADIUS / 2:g}: {inner:.4g}, not judged; '
                        f'|K_t| is about a t / |x|^alpha of the kernel there')
        if total and dropped / total > MAX_DROPPED_SHARE:
            report.verdict = INCONCLUSIVE
            report.corridor = report.measured_corridor()
            return report
        judge_corridor(report, context.corridor)
        if report.judgeable and params.a != 0 and cancellation < CANCELLATION_FACTOR:
            report.verdict = FAIL
            report.note(f'cancellation factor below {CANCELLATION_FACTOR:g}')
        return report

    @staticmethod
    def cancellation_factor(params: Parameters, context: CheckContext, t: float = 1.0,
                            radius: float = CANCELLATION_RADIUS) -> float:
        """min(free column, Hardy column) / |difference| at the node nearest |x| = |y| = radius."""
        grid = context.grid
        i = int(np.argmin(np.abs(np.log(grid.nodes / radius))))
        y = float(grid.nodes[i])
        free, hardy, difference, _ = HeatKernelService._difference_values(t, y, params, context)
        if difference[i] == 0:
            return math.inf
        return float(min(free[i], hardy[i]) / abs(difference[i]))

    @staticmethod
    def verify_sandwich_comparison(params: Parameters, a_tilde: float, context: CheckContext,
                                   times=DEFAULT_TIMES) -> VerificationReport:
        """
        e^{-t L_{a_tilde}} f <= e^{-t(|p|^alpha + V)} f <= e^{-t L_a} f for
        a |x|^{-alpha} <= V <= a_tilde |x|^{-alpha}, and delta(a_tilde) <= delta(a).
        """
        params.require_littlewood_paley()
        if a_tilde < params.a:
            raise DomainError(f"a_tilde={a_tilde} must not be below a={params.a}")
        report = VerificationReport('sandwich', params)
        upper = params.with_(a=a_tilde)
        ordered = delta_from_coupling(a_tilde, params.d, params.alpha) <= params.delta
        report.note(f'delta(a_tilde)={upper.delta:.6g} <= delta(a)={params.delta:.6g}: {ordered}')
        f = RadialFunction.from_callable(context.grid, lambda r: np.exp(-r ** 2 / 2))
        potential = PotentialSpec.sandwiched(params.a, a_tilde)
        for t in times:
            low = hardy_semigroup_apply(f, t, upper, context.n_steps, exact_free=False)
            middle = hardy_semigroup_apply(f, t, params, context.n_steps, potential, exact_free=False)
            high = hardy_semigroup_apply(f, t, params, context.n_steps, exact_free=False)
            slack = ORDER_SLACK * float(np.max(high.values))
            below = bool(np.all(low.values <= middle.values + slack))
            above = bool(np.all(middle.values <= high.values + slack))
            ordered = ordered and below and above
            report.trials.append(TrialRecord.measure(t, lp_norm(middle, 2.0), lp_norm(high, 2.0)))
        report.corridor = report.measured_corridor()
        report.verdict = PASS if ordered else FAIL
        return report

    @staticmethod
    def verify_kernel_integrability(params: Parameters, context: CheckContext, r_max: float = 1e3) -> VerificationReport:
        """
        Moment integrals of the free kernel settle under r_max doubling for c < alpha
        and keep growing for c > alpha; t^{d/alpha} ||kernel||_2^2 matches its closed form.
        """
        d, alpha = params.d, params.alpha
        report = VerificationReport('kernel-integrability', params)
        verdict = PASS
        for c, converges in ((alpha / 2, True), (alpha + 0.5, False)):
            near = kernel_moment_integral(1.0, d, alpha, c, r_max)
            far = kernel_moment_integral(1.0, d, alpha, c, 2 * r_max)
            report.trials.append(TrialRecord.measure(c, far, near, 'moment'))
            change = far / near - 1
            if converges and change > 0.05 or not converges and change < 0.2:
                verdict = FAIL
        constant = free_kernel_l2_constant(d, alpha)
        for t in DEFAULT_TIMES:
            mass = kernel_l2_mass(t, d, alpha)
            report.trials.append(TrialRecord.measure(t, mass, constant, 'l2'))
            if abs(mass / constant - 1) > 1e-3:
                verdict = FAIL
        report.corridor = report.measured_corridor()
        report.verdict = verdict
        return report

    @staticmethod
    def verify_holder_cancellation(params: Parameters, b: float, context: CheckContext,
                                   shifts=tuple(2.0 ** -j for j in range(1, 7))) -> VerificationReport:
        """int |kernel(x) - kernel(x - w)| dx / |w|^b stays bounded as w -> 0 when b <= 1."""
        if b <= 0:
            raise DomainError(f"Holder exponent must be positive, got b={b}")
        report = VerificationReport('holder', params)
        for w in shifts:
            value = holder_cancellation(w, params.d, params.alpha)
            report.trials.append(TrialRecord.measure(w, value, w ** b))
        ratios = report.ratios
        report.corridor = report.measured_corridor()
        bounded = bool(np.all(np.isfinite(ratios)) and ratios[-1] <= 1.5 * ratios[0])
        report.verdict = PASS if bounded else FAIL
        report.note(f'b={b}: last/first ratio {ratios[-1] / ratios[0]:.4g}')
        return report
