"""
Trial profiles on which the inequalities are measured. Every member is smooth
away from the origin and vanishes (to 1e-8 relative) at the end of the grid.
"""
import math
from dataclasses import dataclass

import numpy as np

from processors.exceptions import DomainError
from processors.radial_core import RadialFunction, RadialGrid

BOUNDARY_TOLERANCE = 1e-8
KINDS = ('gaussian_bump', 'plateau_bump', 'power_tail', 'near_extremal')


def smooth_step(u: np.ndarray) -> np.ndarray:
    """C-infinity transition from 1 at u <= 0 to 0 at u >= 1."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    with np.errstate(divide='ignore', over='ignore'):
        rising = np.where(u > 0, np.exp(-1.0 / np.where(u > 0, u, 1.0)), 0.0)
        falling = np.where(u < 1, np.exp(-1.0 / np.where(u < 1, 1.0 - u, 1.0)), 0.0)
    return falling / (rising + falling)


def plateau(r: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """1 on [0, scale], 0 beyond 2 scale."""
    return smooth_step(np.asarray(r) / scale - 1.0)


@dataclass(frozen=True)
class TrialFamily:
    """
    A family of radial trial functions evaluated at each dilation in scale_set.
    power_tail is r^exponent cut off smoothly at `cutoff`; near_extremal is the
    power tail r^{-d/p + alpha/2 + epsilon} whose Hardy ratio approaches 1 as epsilon -> 0.
    """
    kind: str
    scale_set: tuple[float, ...] = (1.0,)
    exponent: float | None = None
    cutoff: float = 1.0
    epsilon: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown trial family {self.kind!r}; expected one of {KINDS}")
        if self.kind == 'power_tail' and self.exponent is None:
            raise DomainError("power_tail requires an exponent")
        if self.kind == 'near_extremal' and (self.epsilon is None or self.epsilon <= 0):
            raise DomainError("near_extremal requires epsilon > 0")
        if not self.scale_set or any(scale <= 0 for scale in self.scale_set):
            raise DomainError(f"scales must be positive, got {self.scale_set}")

    @classmethod
    def gaussian(cls, scales=(1.0,)) -> 'TrialFamily':
        return cls('gaussian_bump', tuple(scales))

    @classmethod
    def dyadic_gaussians(cls, j_min: int = -3, j_max: int = 3) -> 'TrialFamily':
        return cls('gaussian_bump', tuple(2.0 ** j for j in range(j_min, j_max + 1)))

    def _exponent(self, d: int, alpha: float, p: float) -> float:
        if self.kind == 'near_extremal':
            return -d / p + alpha / 2 + self.epsilon
        return self.exponent

    def profile(self, r: np.ndarray, scale: float, d: int, alpha: float = 1.0, p: float = 2.0) -> np.ndarray:
        x = np.asarray(r, dtype=float) / scale
        if self.kind == 'gaussian_bump':
            return np.exp(-x ** 2 / 2)
        if self.kind == 'plateau_bump':
            return plateau(x)
        return x ** self._exponent(d, alpha, p) * plateau(x, self.cutoff)

    def members(self, grid: RadialGrid, alpha: float = 1.0, p: float = 2.0) -> list[tuple[float, RadialFunction]]:
        """(scale, profile) pairs; raises DomainError if a member does not vanish at r_max."""
        members = []
        for scale in self.scale_set:
            values = self.profile(grid.nodes, scale, grid.d, alpha, p)
            peak = np.max(np.abs(values))
            if peak > 0 and abs(values[-1]) > BOUNDARY_TOLERANCE * peak:
                raise DomainError(f"{self.kind} at scale {scale} does not vanish at r_max={grid.r_max}")
            members.append((scale, RadialFunction(grid, values, {'family': self.kind, 'scale': scale})))
        return members

    def describe(self) -> str:
        extra = {'power_tail': f"exponent={self.exponent}", 'near_extremal': f"epsilon={self.epsilon}"}
        return f"{self.kind}({extra.get(self.kind, '')}) scales={[math.log2(s) for s in self.scale_set]}"
