from dataclasses import dataclass, replace

from hardy.config import VerificationConfig
from processors.radial_core import RadialGrid
from processors.spectral_calculus import BandRange


@dataclass(frozen=True)
class CheckContext:
    """Resolution and regression settings shared by all checks of one run."""
    grid: RadialGrid
    n_steps: int = 16
    band_range: BandRange = BandRange(-8, 12)
    corridor: tuple[float, float] | None = None
    refine: bool = True
    jobs: int = 1

    @classmethod
    def from_config(cls, d: int, **overrides) -> 'CheckContext':
        context = cls(
            grid=VerificationConfig.default_grid(d),
            n_steps=VerificationConfig.STEPS,
            band_range=BandRange(VerificationConfig.BAND_MIN, VerificationConfig.BAND_MAX),
            jobs=VerificationConfig.JOBS,
        )
        return context.with_(**overrides) if overrides else context

    def with_(self, **changes) -> 'CheckContext':
        return replace(self, **changes)

    def refined(self) -> 'CheckContext':
        """Twice the grid resolution and twice the Strang steps."""
        return replace(self, grid=self.grid.refined(), n_steps=2 * self.n_steps, refine=False)
