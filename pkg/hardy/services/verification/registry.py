"""
Named checks reachable from the command line. Each runner builds its default
trials and samples from the parameters, the run context and the check options.
"""
import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from hardy.constants import FAMILIES
from hardy.services.verification.context import CheckContext
from hardy.services.verification.hardy_inequality_service import HardyInequalityService
from hardy.services.verification.heat_kernel_service import HeatKernelService
from hardy.services.verification.littlewood_paley_service import LittlewoodPaleyService
from hardy.services.verification.report import VerificationReport
from processors.exceptions import DomainError
from processors.special_functions import Parameters
from processors.trial_families import TrialFamily

logger = logging.getLogger(__name__)

HEAT_TIMES = (0.1, 1.0, 10.0)
HEAT_RADII = 70
DYADIC_SCALES = tuple(2.0 ** j for j in range(-2, 3))


@dataclass(frozen=True)
class CheckOptions:
    family: str = 'gaussian'
    q: float | None = None
    a_tilde: float | None = None
    holder_exponent: float = 0.5
    epsilon: float = 0.1
    exponent: float = 0.5


def build_family(options: CheckOptions) -> TrialFamily:
    match options.family:
        case 'gaussian':
            return TrialFamily('gaussian_bump', DYADIC_SCALES)
        case 'plateau':
            return TrialFamily('plateau_bump', DYADIC_SCALES)
        case 'power_tail':
            return TrialFamily('power_tail', DYADIC_SCALES, exponent=options.exponent)
        case 'near_extremal':
            return TrialFamily('near_extremal', (1.0,), epsilon=options.epsilon)
        case _:
            raise DomainError(f"family: unknown trial family {options.family!r}; expected one of {FAMILIES}")


def _heat_samples(params: Parameters, context: CheckContext, n_radii: int):
    if params.a == 0:
        radii = np.concatenate([[0.0], np.geomspace(1e-2, 50.0, n_radii)])
        return HeatKernelService.free_samples(params, HEAT_TIMES, radii)
    return HeatKernelService.column_samples(params, context, stride=max(1, 4 * HEAT_RADII // n_radii))


def _run_heat_bounds(params: Parameters, context: CheckContext, options: CheckOptions) -> VerificationReport:
    samples = _heat_samples(params, context, HEAT_RADII)
    refined = None
    if context.refine:
        refined = _heat_samples(params, context.refined(), 2 * HEAT_RADII)
    return HeatKernelService.verify_heat_bounds(samples, params, context, refined)


def _run_bernstein(params: Parameters, context: CheckContext, options: CheckOptions) -> VerificationReport:
    q = options.q if options.q is not None else params.p
    return LittlewoodPaleyService.verify_bernstein(build_family(options), params, params.p, q, context)


def _run_sandwich(params: Parameters, context: CheckContext, options: CheckOptions) -> VerificationReport:
    a_tilde = options.a_tilde if options.a_tilde is not None else params.a + 1.0
    return HeatKernelService.verify_sandwich_comparison(params, a_tilde, context)


Runner = Callable[[Parameters, CheckContext, CheckOptions], VerificationReport]


@dataclass(frozen=True)
class Check:
    name: str
    description: str
    runner: Runner


CHECKS: dict[str, Check] = {check.name: check for check in (
    Check('bernstein', 'L^p -> L^q bounds of the dyadic projections',
          _run_bernstein),
    Check('difference-bound', 'free minus Hardy kernel against L + M',
          lambda params, context, options: HeatKernelService.verify_difference_bound(params, context)),
    Check('generalized-hardy', 'weighted norm against L^{s/2} inside and outside the window',
          lambda params, context, options: HardyInequalityService.verify_generalized_hardy(
              build_family(options), params, context)),
    Check('hardy', 'sharp fractional Hardy inequality',
          lambda params, context, options: HardyInequalityService.verify_hardy(
              build_family(options), params, context)),
    Check('heat-bounds', 'two-sided heat kernel envelope corridor',
          _run_heat_bounds),
    Check('holder', 'Holder cancellation of the free kernel',
          lambda params, context, options: HeatKernelService.verify_holder_cancellation(
              params, options.holder_exponent, context)),
    Check('hormander', 'Hormander functional of sample multipliers',
          lambda params, context, options: LittlewoodPaleyService.verify_hormander(params.s)),
    Check('kernel-integrability', 'moment and L^2 integrals of the free kernel',
          lambda params, context, options: HeatKernelService.verify_kernel_integrability(params, context)),
    Check('negative-window', 'L^p window of the semigroup for negative coupling',
          lambda params, context, options: HardyInequalityService.verify_negative_coupling_window(params, context)),
    Check('norm-equivalence', 'L^{s/2} against |p|^{alpha s/2} in both directions',
          lambda params, context, options: HardyInequalityService.verify_norm_equivalence(
              build_family(options), params, context)),
    Check('reverse-hardy', 'difference of square functions against the weighted norm',
          lambda params, context, options: LittlewoodPaleyService.verify_reverse_hardy(
              build_family(options), params, context)),
    Check('sandwich', 'kernel ordering for potentials between two Hardy couplings',
          _run_sandwich),
    Check('schur', 'finiteness of the Schur test integrals',
          lambda params, context, options: HardyInequalityService.verify_schur(params)),
)}


def check_names() -> list[str]:
    return sorted(CHECKS)


def get_check(name: str) -> Check:
    try:
        return CHECKS[name]
    except KeyError:
        raise DomainError(f"check: unknown check {name!r}; run list-checks for the available names") from None


def run_check(name: str, params: Parameters, context: CheckContext,
              options: CheckOptions | None = None) -> VerificationReport:
    check = get_check(name)
    logger.info(f"Running check {name} with {params.as_dict()}")
    report = check.runner(params, context, options or CheckOptions())
    logger.info(f"Check {name}: {report.verdict}")
    return report
