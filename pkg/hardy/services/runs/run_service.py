import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from hardy.constants import FAIL, INCONCLUSIVE
from hardy.services.corridors.corridor_service import CorridorService
from hardy.services.verification.context import CheckContext
from hardy.services.verification.registry import CheckOptions, check_names, run_check
from hardy.services.verification.report import VerificationReport
from processors.exceptions import DomainError, HardyCalcError, UndersampledError, UnsupportedError
from processors.special_functions import Parameters

logger = logging.getLogger(__name__)


class RunService:
    """Runs named checks against the frozen corridors and aggregates their verdicts."""

    @staticmethod
    def run_one(name: str, params: Parameters, context: CheckContext, fixtures: Path,
                options: CheckOptions | None = None) -> VerificationReport:
        corridor = CorridorService.lookup(fixtures, name, params)
        return run_check(name, params, context.with_(corridor=corridor), options)

    @staticmethod
    def _run_applicable(name: str, params: Parameters, context: CheckContext, fixtures: Path,
                        options: CheckOptions | None) -> VerificationReport:
        try:
            return RunService.run_one(name, params, context, fixtures, options)
        except UndersampledError as e:
            logger.warning(f"Check {name} undersampled: {e}")
            report = VerificationReport(name, params, verdict=INCONCLUSIVE)
            report.note(f'undersampled: {e}')
            return report
        except (DomainError, UnsupportedError) as e:
            logger.info(f"Check {name} not applicable: {e}")
            report = VerificationReport(name, params, verdict=INCONCLUSIVE)
            report.note(f'not applicable: {e}')
            return report
        except HardyCalcError as e:
            logger.warning(f"Check {name} aborted: {e}")
            report = VerificationReport(name, params, verdict=FAIL)
            report.note(f'numerical failure: {e}')
            for key, value in getattr(e, 'diagnostics', {}).items():
                report.note(f'{key}={value}')
            return report

    @staticmethod
    def run_all(params: Parameters, context: CheckContext, fixtures: Path, options: CheckOptions | None = None,
                names: list[str] | None = None, jobs: int = 1) -> list[VerificationReport]:
        """
        Every check (or the given names) on up to `jobs` threads. Checks whose
        preconditions exclude the parameters are reported inconclusive, checks whose
        numerics break down fail with the diagnostics in their notes; the result is
        ordered by check name.
        """
        names = sorted(names) if names else check_names()
        corridors = CorridorService.load(fixtures)
        logger.info(f"Running {len(names)} checks with {jobs} job(s), {len(corridors)} frozen corridors")
        with ThreadPoolExecutor(max_workers=max(1, jobs)) as executor:
            futures = [executor.submit(RunService._run_applicable, name, params, context, fixtures, options)
                       for name in names]
            reports = [future.result() for future in futures]
        return sorted(reports, key=lambda report: report.check_name)

    @staticmethod
    def exit_status(reports: list[VerificationReport]) -> int:
        """1 iff any check failed."""
        return 1 if any(report.verdict == FAIL for report in reports) else 0
