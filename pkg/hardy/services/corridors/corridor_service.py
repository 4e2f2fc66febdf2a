import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from hardy.config import VerificationConfig
from hardy.constants import REFINEMENT_DRIFT, SCHEMA_VERSION
from hardy.services.verification.context import CheckContext
from hardy.services.verification.registry import CheckOptions, run_check
from hardy.services.verification.report import VerificationReport
from processors.exceptions import DomainError
from processors.special_functions import Parameters

logger = logging.getLogger(__name__)

# checks whose verdict is judged against a frozen ratio corridor
CORRIDOR_CHECKS = ('bernstein', 'difference-bound', 'generalized-hardy', 'heat-bounds', 'norm-equivalence',
                   'reverse-hardy')


@dataclass(frozen=True)
class CertifiedCorridor:
    key: str
    corridor: tuple[float, float]
    report: VerificationReport


class CorridorService:
    """Frozen corridors: a versioned JSON file of [lo, hi] ratio bounds keyed by check and parameters."""

    @staticmethod
    def corridor_key(check_name: str, params: Parameters) -> str:
        return (f"{check_name}|d={params.d}|alpha={params.alpha!r}|a={params.a!r}"
                f"|s={params.s!r}|p={params.p!r}")

    @staticmethod
    def load(path: Path) -> dict[str, tuple[float, float]]:
        """Corridors stored at `path`; a missing file means nothing is frozen yet."""
        path = Path(path)
        if not path.exists():
            logger.info(f"No corridor fixtures at {path}")
            return {}
        try:
            content = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise DomainError(f"fixtures: {path} is not valid JSON ({e})") from e
        version = content.get('schema_version')
        if version != SCHEMA_VERSION:
            raise DomainError(f"fixtures: schema_version {version!r} in {path}, expected {SCHEMA_VERSION}")
        corridors = {}
        for key, bounds in content.get('corridors', {}).items():
            if len(bounds) != 2 or not bounds[0] <= bounds[1]:
                raise DomainError(f"fixtures: malformed corridor {bounds!r} for {key}")
            corridors[key] = (float(bounds[0]), float(bounds[1]))
        return corridors

    @staticmethod
    def save(path: Path, corridors: dict[str, tuple[float, float]]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        content = {
            'schema_version': SCHEMA_VERSION,
            'corridors': {key: [low, high] for key, (low, high) in sorted(corridors.items())},
        }
        path.write_text(json.dumps(content, indent=2, sort_keys=True) + '\n')
        logger.info(f"Wrote {len(corridors)} corridors to {path}")

    @staticmethod
    def lookup(path: Path, check_name: str, params: Parameters) -> tuple[float, float] | None:
        return CorridorService.load(path).get(CorridorService.corridor_key(check_name, params))

    @staticmethod
    def certify(check_name: str, params: Parameters, context: CheckContext, path: Path,
                options: CheckOptions | None = None, slack: float | None = None) -> CertifiedCorridor:
        """
        Measures a corridor at the configured and at the refined resolution and
        freezes [lo / slack, hi * slack]. The measured bounds must be finite, positive
        and move by at most 5% under refinement.
        """
        if check_name not in CORRIDOR_CHECKS:
            raise DomainError(f"check: {check_name} has no ratio corridor; certifiable checks are {CORRIDOR_CHECKS}")
        slack = slack if slack is not None else VerificationConfig.CORRIDOR_SLACK
        if slack < 1:
            raise DomainError(f"slack: corridor slack must be >= 1, got {slack}")

        free_context = context.with_(corridor=None, refine=False)
        report = run_check(check_name, params, free_context, options)
        low, high = report.measured_corridor()
        if not (math.isfinite(low) and math.isfinite(high) and low > 0):
            raise DomainError(f"{check_name}: measured corridor ({low}, {high}) cannot be frozen")
        refined = run_check(check_name, params, context.refined(), options)
        fine_low, fine_high = refined.measured_corridor()
        drift = max(abs(fine_low / low - 1), abs(fine_high / high - 1))
        if not np.isfinite(drift) or drift > REFINEMENT_DRIFT:
            raise DomainError(f"{check_name}: corridor moves by {drift:.3e} under refinement; not certified")

        corridor = (low / slack, high * slack)
        key = CorridorService.corridor_key(check_name, params)
        corridors = CorridorService.load(path)
        corridors[key] = corridor
        CorridorService.save(path, corridors)
        logger.info(f"Certified {key}: [{corridor[0]:.6g}, {corridor[1]:.6g}] (drift {drift:.3e})")
        return CertifiedCorridor(key, corridor, report)
