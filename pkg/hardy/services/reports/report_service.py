import json
import logging
import math
from pathlib import Path

import pandas as pd
from django.utils import timezone

from hardy.constants import SCHEMA_VERSION
from hardy.services.verification.report import VerificationReport

logger = logging.getLogger(__name__)

REPORTS_FILE = 'reports.json'
METADATA_FILE = 'metadata.json'


def _finite_or_none(value):
    """JSON has no inf or nan; they are written as null."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _finite_or_none(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_finite_or_none(item) for item in value]
    return value


class ReportService:
    """Serialization of reports and command results. Floats keep every significant digit."""

    @staticmethod
    def dumps(document: dict) -> str:
        return json.dumps(_finite_or_none(document), sort_keys=True, indent=2, allow_nan=False) + '\n'

    @staticmethod
    def document(reports: list[VerificationReport]) -> dict:
        """Reports ordered by check name; identical inputs give identical documents."""
        ordered = sorted(reports, key=lambda report: report.check_name)
        return {
            'schema_version': SCHEMA_VERSION,
            'reports': [report.as_dict() for report in ordered],
        }

    @staticmethod
    def metadata(command: str, options: dict) -> dict:
        return {
            'schema_version': SCHEMA_VERSION,
            'command': command,
            'generated_at': timezone.now().isoformat(),
            'options': {key: value for key, value in sorted(options.items()) if _is_plain(value)},
        }

    @staticmethod
    def write_reports(reports: list[VerificationReport], out_dir: Path, command: str, options: dict) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / REPORTS_FILE
        path.write_text(ReportService.dumps(ReportService.document(reports)))
        (out_dir / METADATA_FILE).write_text(ReportService.dumps(ReportService.metadata(command, options)))
        for report in reports:
            ReportService.trials_frame(report).to_csv(out_dir / f"{report.check_name}_trials.csv",
                                                      index=False, float_format='%.17g')
        logger.info(f"Wrote {len(reports)} reports to {out_dir}")
        return path

    @staticmethod
    def write_document(document: dict, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(ReportService.dumps(document))
        return path

    @staticmethod
    def trials_frame(report: VerificationReport) -> pd.DataFrame:
        return pd.DataFrame([record.as_dict() for record in report.trials],
                            columns=['scale', 'label', 'lhs', 'rhs', 'ratio'])

    @staticmethod
    def summary_line(report: VerificationReport) -> str:
        low, high = report.corridor
        return f"{report.check_name:<22} {report.verdict:<13} corridor [{low:.6g}, {high:.6g}]"


def _is_plain(value) -> bool:
    return value is None or isinstance(value, (str, int, float, bool))
