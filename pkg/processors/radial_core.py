"""
Radial grids and functions, weighted L^p norms and the d-dimensional radial
Fourier (Hankel) transform

    f^(k) = int_{R^d} f(|x|) e^{-i k.x} dx
          = int_0^inf f(r) r^{d-1} (2 pi)^{d/2} (kr)^{-(d-2)/2} J_{(d-2)/2}(kr) dr.

All grids are log-spaced; the transform of a function sampled on a grid lives on
the reciprocal grid k_i = 1 / r_{n-1-i}, and transforming back returns the
original grid object.
"""
import logging
import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import integrate, sparse, special
from scipy.interpolate import PchipInterpolator

from processors.exceptions import DomainError
from processors.special_functions import bessel_kernel, sphere_area

logger = logging.getLogger(__name__)

MIN_POINTS = 16
DECAY_THRESHOLD = 1e-8
LAGRANGE_POINTS = 8
PHASE_PER_PANEL = math.pi / 4
MAX_SUBDIVISION = 16
TAPER_WIDTH = 0.2
TAPER_CUTOFF = 1e-16


@dataclass(frozen=True)
class RadialGrid:
    r_min: float
    r_max: float
    n_points: int
    d: int
    nodes: np.ndarray = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if not (0 < self.r_min < self.r_max) or not math.isfinite(self.r_max):
            raise DomainError(f"grid requires 0 < r_min < r_max, got r_min={self.r_min}, r_max={self.r_max}")
        if self.n_points < MIN_POINTS:
            raise DomainError(f"grid requires at least {MIN_POINTS} points, got n={self.n_points}")
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"dimension must be a positive integer, got d={self.d}")
        nodes = np.geomspace(self.r_min, self.r_max, self.n_points)
        nodes[0], nodes[-1] = self.r_min, self.r_max
        nodes.flags.writeable = False
        object.__setattr__(self, 'nodes', nodes)

    @property
    def log_step(self) -> float:
        return math.log(self.r_max / self.r_min) / (self.n_points - 1)

    def contains(self, r: float) -> bool:
        return self.r_min <= r <= self.r_max

    def reciprocal(self) -> 'RadialGrid':
        """Grid with nodes 1/r in reverse order; reciprocal().reciprocal() is self."""
        with _reciprocal_lock:
            dual = _reciprocal_grids.get(self)
            if dual is None:
                dual = RadialGrid(1.0 / self.r_max, 1.0 / self.r_min, self.n_points, self.d)
                nodes = (1.0 / self.nodes)[::-1].copy()
                nodes.flags.writeable = False
                object.__setattr__(dual, 'nodes', nodes)
                _reciprocal_grids[self] = dual
                _reciprocal_grids[dual] = self
            return dual

    def refined(self) -> 'RadialGrid':
        """Same range with twice the resolution."""
        return RadialGrid(self.r_min, self.r_max, 2 * self.n_points - 1, self.d)


_reciprocal_grids: dict[RadialGrid, RadialGrid] = {}
_reciprocal_lock = threading.Lock()


@dataclass(frozen=True)
class RadialFunction:
    """Samples of a radial profile on a grid. `metadata` carries flags such as the transform space."""
    grid: RadialGrid
    values: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_points,):
            raise DomainError(f"expected {self.grid.n_points} samples, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("radial function has non-finite samples")
        values.flags.writeable = False
        object.__setattr__(self, 'values', values)

    @classmethod
    def from_callable(cls, grid: RadialGrid, profile, **metadata) -> 'RadialFunction':
        return cls(grid, profile(grid.nodes), dict(metadata))

    @classmethod
    def zeros(cls, grid: RadialGrid) -> 'RadialFunction':
        return cls(grid, np.zeros(grid.n_points))

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values, **metadata) -> 'RadialFunction':
        return RadialFunction(self.grid, values, {**self.metadata, **metadata})

    def _check_grid(self, other: 'RadialFunction') -> None:
        if other.grid != self.grid:
            raise DomainError("radial functions live on different grids")

    def __add__(self, other: 'RadialFunction') -> 'RadialFunction':
        self._check_grid(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: 'RadialFunction') -> 'RadialFunction':
        self._check_grid(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, factor) -> 'RadialFunction':
        if isinstance(factor, RadialFunction):
            self._check_grid(factor)
            factor = factor.values
        return self.with_values(self.values * factor)

    __rmul__ = __mul__

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'r': self.grid.nodes, 'value': self.values})

    def to_csv(self, path: str | Path) -> None:
        self.to_frame().to_csv(path, index=False, float_format='%.17g')

    @classmethod
    def from_csv(cls, path: str | Path, d: int) -> 'RadialFunction':
        """Reads a "r,value" table written by `to_csv`; the nodes must be log-spaced."""
        frame = pd.read_csv(path)
        if list(frame.columns) != ['r', 'value']:
            raise DomainError(f"expected columns r,value in {path}, got {list(frame.columns)}")
        r = frame['r'].to_numpy()
        grid = make_grid(float(r[0]), float(r[-1]), len(r), d)
        if not np.allclose(grid.nodes, r, rtol=1e-12, atol=0):
            raise DomainError(f"nodes in {path} are not log-spaced")
        return cls(grid, frame['value'].to_numpy())


def make_grid(r_min: float, r_max: float, n: int, d: int) -> RadialGrid:
    return RadialGrid(float(r_min), float(r_max), int(n), int(d))


def lp_norm(f: RadialFunction, p: float, weight_exponent: float = 0.0) -> float:
    """
    (omega_{d-1} int |f|^p r^{p w} r^{d-1} dr)^{1/p} by the trapezoid rule in log r.

    The profile is continued as a constant below r_min; that head piece is added
    exactly whenever p w + d > 0.
    """
    if p < 1:
        raise DomainError(f"lp_norm requires p >= 1, got p={p}")
    if not np.all(np.isfinite(f.values)):
        raise DomainError("lp_norm of a non-finite profile")
    grid = f.grid
    exponent = p * weight_exponent + grid.d
    magnitudes = np.abs(f.values)
    if not magnitudes.any():
        return 0.0
    integrand = magnitudes ** p * grid.nodes ** exponent
    total = integrate.trapezoid(integrand, dx=grid.log_step)
    if exponent > 0:
        total += magnitudes[0] ** p * grid.r_min ** exponent / exponent
    return float((sphere_area(grid.d) * total) ** (1 / p))


def _lagrange_basis(offsets: np.ndarray) -> np.ndarray:
    """Values of the 8 Lagrange basis polynomials on nodes 0..7 at the given offsets."""
    basis = np.ones((offsets.size, LAGRANGE_POINTS))
    for l in range(LAGRANGE_POINTS):
        for m in range(LAGRANGE_POINTS):
            if m != l:
                basis[:, l] *= (offsets - m) / (l - m)
    return basis


@lru_cache(maxsize=32)
def _interpolation_matrix(n: int, refinement: int) -> sparse.csr_matrix:
    """Sparse map from n node values to the values at the refinement * (n-1) + 1 fine nodes (uniform in log r)."""
    positions = np.arange(refinement * (n - 1) + 1) / refinement
    base = np.minimum(np.floor(positions).astype(int), n - 2)
    start = np.clip(base - (LAGRANGE_POINTS // 2 - 1), 0, n - LAGRANGE_POINTS)
    weights = _lagrange_basis(positions - start)
    rows = np.repeat(np.arange(positions.size), LAGRANGE_POINTS)
    columns = (start[:, None] + np.arange(LAGRANGE_POINTS)).ravel()
    return sparse.csr_matrix((weights.ravel(), (rows, columns)), shape=(positions.size, n))


def _nyquist_taper(z: np.ndarray) -> np.ndarray:
    """Smoothly removes oscillations the input sampling cannot resolve (phase step per node beyond pi)."""
    with np.errstate(divide='ignore'):
        taper = 0.5 * special.erfc((np.log(z) - math.log(math.pi)) / TAPER_WIDTH)
    return np.where(taper < TAPER_CUTOFF, 0.0, taper)


def _scaled_bessel(mu: float, z: np.ndarray) -> np.ndarray:
    """z^{-mu} J_mu(z) with its limit at z = 0."""
    small = np.abs(z) < 1e-8
    safe = np.where(small, 1.0, z)
    return np.where(small, 1.0 / (2.0 ** mu * special.gamma(mu + 1)), special.jv(mu, safe) / safe ** mu)


@lru_cache(maxsize=8)
def _transform_matrix(grid: RadialGrid) -> np.ndarray:
    """
    Dense quadrature matrix mapping samples on `grid` to the radial Fourier
    transform on `grid.reciprocal()`. Rows with a large phase change per panel
    integrate an 8-point Lagrange interpolant on a uniformly refined log grid.
    """
    d, n, h = grid.d, grid.n_points, grid.log_step
    k = grid.reciprocal().nodes
    nu = d / 2 - 1
    prefactor = (2 * np.pi) ** (d / 2)
    matrix = np.zeros((n, n))

    # phase change per panel at the largest radius the taper leaves alive
    top_radius = np.minimum(grid.r_max, 10.0 / (k * h))
    refinement = np.clip(np.ceil(k * top_radius * h / PHASE_PER_PANEL), 1, MAX_SUBDIVISION).astype(int)

    for m in np.unique(refinement):
        rows = np.nonzero(refinement == m)[0]
        interpolation = _interpolation_matrix(n, int(m))
        fine_r = grid.r_min * np.exp(np.arange(m * (n - 1) + 1) * h / m)
        weights = np.full(fine_r.size, h / m)
        weights[[0, -1]] *= 0.5
        kr = k[rows, None] * fine_r[None, :]
        integrand = (weights * fine_r ** d)[None, :] * bessel_kernel(kr, d) * _nyquist_taper(kr * h)
        matrix[rows] = (interpolation.T @ integrand.T).T
        logger.debug(f"hankel matrix n={n} d={d}: {rows.size} rows at refinement {m}")

    # constant continuation of f below r_min, integrated exactly
    head = prefactor * grid.r_min ** d * _scaled_bessel(nu + 1, k * grid.r_min)
    matrix[:, 0] += head
    matrix.flags.writeable = False
    return matrix


def hankel_transform(f: RadialFunction, direction: str = 'forward') -> RadialFunction:
    """
    Radial Fourier transform of f (forward) or its inverse, which carries the
    (2 pi)^{-d} factor. The output lives on the reciprocal grid.

    :param f: profile decaying at r_max; otherwise the output is flagged `nondecaying`
    :param direction: 'forward' or 'inverse'
    """
    if direction not in ('forward', 'inverse'):
        raise DomainError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    scale = np.max(np.abs(f.values))
    nondecaying = bool(scale > 0 and abs(f.values[-1]) > DECAY_THRESHOLD * scale)
    if nondecaying:
        logger.warning(f"hankel_transform: input does not decay at r_max={f.grid.r_max} "
                       f"(|f(r_max)|/max|f| = {abs(f.values[-1]) / scale:.3e})")
    transformed = _transform_matrix(f.grid) @ f.values
    if direction == 'inverse':
        transformed = transformed * (2 * np.pi) ** (-f.grid.d)
    space = 'k' if direction == 'forward' else 'r'
    return RadialFunction(f.grid.reciprocal(), transformed, {'space': space, 'nondecaying': nondecaying})


def multiplier_apply(f: RadialFunction, multiplier) -> RadialFunction:
    """Applies the Fourier multiplier m(|k|) to a radial profile."""
    transformed = hankel_transform(f, 'forward')
    symbol = multiplier(transformed.grid.nodes)
    back = hankel_transform(transformed.with_values(transformed.values * symbol), 'inverse')
    return RadialFunction(f.grid, back.values, {**f.metadata, 'nondecaying': transformed.metadata['nondecaying']})


def dilate(f: RadialFunction, lam: float) -> RadialFunction:
    """
    Samples of r -> f(lam r) by monotone cubic interpolation in log r. Below
    r_min the profile is continued as a constant; beyond r_max it is zero.
    """
    if lam <= 0:
        raise DomainError(f"dilation factor must be positive, got {lam}")
    if lam == 1:
        return f
    u = np.log(f.grid.nodes)
    target = u + math.log(lam)
    interpolant = PchipInterpolator(u, f.values, extrapolate=False)
    values = interpolant(np.clip(target, u[0], None))
    values[target > u[-1]] = 0.0
    return f.with_values(np.nan_to_num(values, nan=0.0))
