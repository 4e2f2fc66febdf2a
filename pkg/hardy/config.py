import os
from pathlib import Path

from processors.radial_core import RadialGrid, make_grid


class VerificationConfig:
    """Configuration for grids, time stepping, band truncation and frozen corridors."""

    # Frozen corridor fixtures; the path itself is read from HARDY_CALC_FIXTURES on every lookup
    CORRIDOR_SLACK: float = float(os.getenv('HARDY_CORRIDOR_SLACK', 1.25))

    # Radial grid
    GRID_MIN: float = float(os.getenv('HARDY_GRID_MIN', 1e-3))
    GRID_MAX: float = float(os.getenv('HARDY_GRID_MAX', 1e3))
    GRID_N: int = int(os.getenv('HARDY_GRID_N', 256))

    # Strang steps per semigroup evaluation
    STEPS: int = int(os.getenv('HARDY_STEPS', 16))

    # Dyadic band truncation j_min..j_max
    BAND_MIN: int = int(os.getenv('HARDY_BAND_MIN', -8))
    BAND_MAX: int = int(os.getenv('HARDY_BAND_MAX', 12))

    # Parallel checks
    JOBS: int = int(os.getenv('HARDY_JOBS', 1))

    @classmethod
    def fixtures_path(cls, override: str | None = None) -> Path:
        """
        Corridor fixtures file. The environment variable wins over an explicit
        override, which wins over the file shipped with the app.
        """
        env_path = os.getenv('HARDY_CALC_FIXTURES')
        if env_path:
            return Path(env_path)
        if override:
            return Path(override)
        return Path(__file__).resolve().parent / 'fixtures' / 'corridors.json'

    @classmethod
    def default_grid(cls, d: int) -> RadialGrid:
        return make_grid(cls.GRID_MIN, cls.GRID_MAX, cls.GRID_N, d)
