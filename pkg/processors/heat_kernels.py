"""
Heat kernels of the fractional Laplacian and of the Hardy operator.

The free kernel e^{-t|p|^alpha}(x, y) depends on r = |x - y| only and is
reduced to t = 1 by the scaling r -> r / t^{1/alpha}. The Hardy semigroup acts
on radial profiles by Strang splitting between exact free steps (Fourier
multipliers on the Hankel grid) and exact potential steps; its "kernel columns"
are therefore spherical means over the angle between x and y.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np
import pandas as pd
from scipy import integrate, special
from scipy.interpolate import PchipInterpolator

from processors.exceptions import DomainError, NumericalError, UnsupportedError
from processors.radial_core import RadialFunction, RadialGrid, _transform_matrix, lp_norm
from processors.special_functions import (Parameters, bessel_kernel, free_kernel_tail_series, sphere_area)

logger = logging.getLogger(__name__)

GAUSS_NODES, GAUSS_WEIGHTS = special.roots_legendre(16)
EXPONENT_CUTOFF = 45.0
GRADED_PANELS = 40
MAX_REFINEMENT_LEVELS = 20
MAX_PANELS = 2 ** 18
REAL_AXIS_LIMIT = 2.0
NEGATIVE_NOISE = 1e-12
COLUMN_BUMP_WIDTH = 2.0


@dataclass(frozen=True)
class KernelSample:
    """
    One evaluation of a heat kernel with its envelope. `averaged` marks values
    that are spherical means over the angle between x and y (kernel columns of
    the radial semigroup); xy_distance then holds the closest distance |x| - |y|.
    """
    t: float
    x_norm: float
    y_norm: float
    xy_distance: float
    value: float
    envelope_low: float = 0.0
    envelope_high: float = math.inf
    averaged: bool = False

    def __post_init__(self):
        if self.t <= 0 or self.x_norm < 0 or self.y_norm < 0:
            raise DomainError(f"kernel sample requires t > 0 and non-negative norms, got {self}")
        slack = 1e-12 * (self.x_norm + self.y_norm + 1)
        if not abs(self.x_norm - self.y_norm) - slack <= self.xy_distance <= self.x_norm + self.y_norm + slack:
            raise DomainError(f"distance {self.xy_distance} violates the triangle inequality for "
                              f"|x|={self.x_norm}, |y|={self.y_norm}")


@dataclass(frozen=True)
class PotentialSpec:
    """
    Radial potential V(r) = r^{-alpha} (a + (a_tilde - a) w(r)) with 0 <= w <= 1,
    so a |x|^{-alpha} <= V <= a_tilde |x|^{-alpha}. The plain Hardy potential has
    a_tilde = a.
    """
    kind: str
    a: float
    a_tilde: float
    weight: Callable[[np.ndarray], np.ndarray] | None = None

    @classmethod
    def hardy(cls, a: float) -> 'PotentialSpec':
        return cls('hardy', a, a)

    @classmethod
    def sandwiched(cls, a: float, a_tilde: float, weight=None) -> 'PotentialSpec':
        if a_tilde < a:
            raise DomainError(f"sandwiched potential needs a <= a_tilde, got a={a}, a_tilde={a_tilde}")
        return cls('sandwiched', a, a_tilde, weight)

    @property
    def is_zero(self) -> bool:
        return self.a == 0 and self.a_tilde == 0

    def values(self, r: np.ndarray, alpha: float) -> np.ndarray:
        if self.kind == 'hardy':
            return self.a * r ** (-alpha)
        weight = self.weight(r) if self.weight is not None else 0.5 * (1 + np.cos(2 * np.pi * np.log2(r)))
        return (self.a + (self.a_tilde - self.a) * np.clip(weight, 0.0, 1.0)) * r ** (-alpha)


def _panel_rule(edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    half = 0.5 * np.diff(edges)
    middle = 0.5 * (edges[:-1] + edges[1:])
    nodes = middle[:, None] + half[:, None] * GAUSS_NODES[None, :]
    weights = half[:, None] * GAUSS_WEIGHTS[None, :]
    return nodes.ravel(), weights.ravel()


def _graded_edges(first: float, upper: float, panels: int) -> np.ndarray:
    """Geometric panels toward 0 below `first`, then `panels` uniform panels up to `upper`."""
    graded = first * 2.0 ** -np.arange(GRADED_PANELS, 0, -1)
    return np.concatenate([graded, np.linspace(first, upper, panels + 1)])


def _refine_until_converged(estimate, panels: int, label: str, rho: float) -> float:
    previous = None
    for level in range(MAX_REFINEMENT_LEVELS):
        value, magnitude = estimate(panels)
        if previous is not None:
            difference = abs(value - previous)
            if difference <= 1e-10 * abs(value) + 1e-14 * magnitude:
                logger.debug(f"{label}: rho={rho} converged at level {level} with {panels} panels")
                return value
        if panels * 2 > MAX_PANELS:
            break
        previous = value
        panels *= 2
    difference = abs(value - previous) if previous is not None else math.inf
    if difference > 1e-8:
        raise NumericalError(f"{label} quadrature did not converge at rho={rho}",
                             {'rho': rho, 'panels': panels, 'difference': difference, 'value': value})
    return value


def _real_axis_kernel(rho: float, d: int, alpha: float) -> float:
    upper = EXPONENT_CUTOFF ** (1 / alpha)
    width = min(math.pi / (4 * rho), upper / 64) if rho > 0 else upper / 64

    def estimate(panels: int) -> tuple[float, float]:
        nodes, weights = _panel_rule(_graded_edges(upper / panels, upper, panels - 1))
        integrand = nodes ** (d - 1) * np.exp(-nodes ** alpha) * bessel_kernel(nodes * rho, d)
        return float(np.sum(weights * integrand)), float(np.sum(weights * np.abs(integrand)))

    value = _refine_until_converged(estimate, max(2, math.ceil(upper / width)), 'real-axis', rho)
    return (2 * np.pi) ** (-d) * value


def _reduced_coefficients(d: int, alpha: float) -> tuple[np.ndarray, int, bool]:
    """
    Integrating by parts lowers the Bessel order by one per step:
        int k^{mu+1} J_mu(k rho) Q dk = rho^{-1} int k^mu J_{mu-1}(k rho) Q' dk,
    with Q = sum_j a_j k^{j alpha} e^{-k^alpha} and b_j = (2 mu + j alpha) a_j - alpha a_{j-1}.
    """
    odd = d % 2 == 1
    mu = d / 2 - 1
    final = -0.5 if odd else 0.0
    steps = int(round(mu - final))
    coefficients = np.array([1.0])
    for _ in range(steps):
        reduced = np.zeros(coefficients.size + 1)
        j = np.arange(coefficients.size)
        reduced[:-1] += (2 * mu + j * alpha) * coefficients
        reduced[1:] -= alpha * coefficients
        coefficients = reduced
        mu -= 1
    return coefficients, steps, odd


def _rotated_kernel(rho: float, d: int, alpha: float) -> float:
    """Oscillatory integral after order reduction, evaluated on the ray k = y e^{i theta}."""
    coefficients, steps, odd = _reduced_coefficients(d, alpha)
    theta = min(math.pi / 2, math.pi / (4 * alpha))
    direction = np.exp(1j * theta)
    damping = math.cos(alpha * theta)
    upper = 40.0 / (rho * math.sin(theta))
    if damping > 1e-12:
        upper = min(upper, (60.0 / damping) ** (1 / alpha))
    phase_rate = rho * math.cos(theta) + alpha * upper ** max(alpha - 1, 0) * math.sin(alpha * theta)
    powers = np.arange(coefficients.size)

    def estimate(panels: int) -> tuple[float, float]:
        nodes, weights = _panel_rule(_graded_edges(upper / panels, upper, panels - 1))
        k = nodes * direction
        k_alpha = nodes ** alpha * np.exp(1j * alpha * theta)
        polynomial = (coefficients[None, :] * k_alpha[:, None] ** powers[None, :]).sum(axis=1)
        envelope = polynomial * np.exp(-k_alpha) * direction
        if odd:
            integrand = np.exp(1j * rho * k) * envelope
        else:
            integrand = k * special.hankel1(0, rho * k) * envelope
        total = np.sum(weights * integrand)
        return float(total.real), float(np.sum(weights * np.abs(integrand)))

    panels = max(64, math.ceil(upper * phase_rate / (math.pi / 4)))
    value = _refine_until_converged(estimate, panels, 'rotated', rho)
    if odd:
        value *= math.sqrt(2 / (math.pi * rho))
    nu = d / 2 - 1
    return (2 * np.pi) ** (-d / 2) * rho ** (-nu - steps) * value


def free_heat_kernel(t: float, r: float, d: int, alpha: float) -> float:
    """
    e^{-t|p|^alpha}(x, y) for |x - y| = r.

    :param t: time, t > 0
    :param r: distance, r >= 0
    :param d: dimension
    :param alpha: order, 0 < alpha < 2
    """
    if t <= 0 or r < 0 or not 0 < alpha < 2:
        raise DomainError(f"free_heat_kernel requires t > 0, r >= 0, 0 < alpha < 2; got t={t}, r={r}, alpha={alpha}")
    scale = t ** (1 / alpha)
    rho = r / scale
    if rho == 0:
        value = (2 * np.pi) ** (-d) * sphere_area(d) * math.gamma(d / alpha) / alpha
    elif rho <= REAL_AXIS_LIMIT:
        value = _real_axis_kernel(rho, d, alpha)
    else:
        value = _rotated_kernel(rho, d, alpha)
    if value < 0:
        if value < -NEGATIVE_NOISE:
            raise NumericalError(f"negative free kernel value {value} at rho={rho}", {'rho': rho, 'value': value})
        value = 0.0
    return value * t ** (-d / alpha)


def free_kernel_profile(t: float, r: np.ndarray, d: int, alpha: float) -> np.ndarray:
    return np.array([free_heat_kernel(t, float(x), d, alpha) for x in np.atleast_1d(r)])


@lru_cache(maxsize=16)
def _free_kernel_table(d: int, alpha: float) -> PchipInterpolator:
    rho = np.geomspace(1e-4, 1e4, 321)
    values = free_kernel_profile(1.0, rho, d, alpha)
    return PchipInterpolator(np.log(rho), np.log(values))


def free_kernel_interpolant(d: int, alpha: float) -> Callable[[np.ndarray], np.ndarray]:
    """Fast evaluation of r -> e^{-|p|^alpha}(r) from a tabulation in log-log coordinates."""
    table = _free_kernel_table(d, alpha)
    at_origin = free_heat_kernel(1.0, 0.0, d, alpha)

    def evaluate(r):
        r = np.asarray(r, dtype=float)
        inner = np.exp(table(np.log(np.clip(r, 1e-4, 1e4))))
        tail = np.array([free_kernel_tail_series(d, alpha, x) for x in np.maximum(r.ravel(), 1e4)]).reshape(r.shape)
        return np.where(r < 1e-4, at_origin, np.where(r > 1e4, tail, inner))

    return evaluate


def _spatial_factor(t: float, dist: float, d: int, alpha: float) -> float:
    """1 ^ t^{1+d/alpha} / |x-y|^{d+alpha}."""
    reach = t ** (1 + d / alpha)
    power = dist ** (d + alpha)
    return 1.0 if power <= reach else reach / power


def _bracket(t: float, norm: float, alpha: float, delta: float) -> float:
    if delta == 0:
        return 1.0
    if norm == 0:
        return math.inf if delta > 0 else 0.0
    return max(1.0, t ** (1 / alpha) / norm) ** delta


def heat_envelope_shape(t: float, x_norm: float, y_norm: float, dist: float, params: Parameters) -> float:
    """(1 v t^{1/a}/|x|)^delta (1 v t^{1/a}/|y|)^delta t^{-d/a} (1 ^ t^{1+d/a}/|x-y|^{d+a})."""
    d, alpha = params.d, params.alpha
    if t <= 0:
        raise DomainError(f"envelope requires t > 0, got t={t}")
    spatial = _spatial_factor(t, dist, d, alpha)
    weight = _bracket(t, x_norm, alpha, params.delta) * _bracket(t, y_norm, alpha, params.delta)
    return weight * t ** (-d / alpha) * spatial


def heat_envelope(t: float, x_norm: float, y_norm: float, dist: float, params: Parameters,
                  c_low: float = 0.0, c_high: float = math.inf) -> tuple[float, float]:
    shape = heat_envelope_shape(t, x_norm, y_norm, dist, params)
    if math.isinf(shape):
        return math.inf, math.inf
    return c_low * shape, c_high * shape if not math.isinf(c_high) else math.inf


def lm_bounds(t: float, x_norm: float, y_norm: float, dist: float, params: Parameters) -> tuple[float, float]:
    """The pair (L_t^{alpha, delta_+}, M_t^alpha) bounding the difference of the free and Hardy kernels."""
    if t <= 0 or x_norm <= 0 or y_norm <= 0:
        raise DomainError(f"lm_bounds requires t, |x|, |y| > 0; got t={t}, |x|={x_norm}, |y|={y_norm}")
    d, alpha, delta = params.d, params.alpha, params.delta_plus
    larger, smaller = max(x_norm, y_norm), min(x_norm, y_norm)
    inner = larger ** alpha <= t
    outer = larger ** alpha >= t
    spatial = _spatial_factor(t, dist, d, alpha)
    low_part = t ** (-d / alpha) * (t ** (2 / alpha) / (x_norm * y_norm)) ** delta if inner else 0.0
    high_part = t / larger ** (d + alpha) * max(1.0, t ** (1 / alpha) / smaller) ** delta if outer else 0.0
    comparable = 0.5 * x_norm <= y_norm <= 2 * x_norm
    m_value = t ** (1 - d / alpha) / smaller ** alpha * spatial if outer and comparable else 0.0
    return low_part + high_part, m_value


def riesz_kernel_envelope(x_norm: float, y_norm: float, dist: float, params: Parameters, s: float) -> float:
    """|x-y|^{alpha s/2 - d} (1 ^ |x|/|x-y| ^ |y|/|x-y|)^{-delta}, the shape of L^{-s/2}(x, y)."""
    d, order = params.d, params.alpha * s / 2
    if not 0 < order < min(d, d - 2 * params.delta):
        raise DomainError(f"Riesz kernel bound requires alpha s/2 in (0, d ^ (d - 2 delta)), got {order}")
    if dist == 0:
        return math.inf
    return dist ** (order - d) * min(1.0, x_norm / dist, y_norm / dist) ** (-params.delta)


def spherical_mean(profile: Callable[[float], float], x_norm: float, y_norm: float, d: int) -> float:
    """Average of profile(|x - y|) over the angle between x and y."""
    if x_norm == 0 or y_norm == 0:
        return float(profile(max(x_norm, y_norm)))
    if d == 1:
        return 0.5 * (profile(abs(x_norm - y_norm)) + profile(x_norm + y_norm))

    def integrand(theta: float) -> float:
        dist = math.sqrt(max(x_norm ** 2 + y_norm ** 2 - 2 * x_norm * y_norm * math.cos(theta), 0.0))
        return profile(dist) * math.sin(theta) ** (d - 2)

    breakpoints = list(math.pi * np.geomspace(1e-6, 1, 14)[:-1])
    value, _ = integrate.quad(integrand, 0.0, math.pi, points=breakpoints, limit=400)
    return value / special.beta(0.5, (d - 1) / 2)


def _check_semigroup_input(f: RadialFunction, t: float, n_steps: int) -> None:
    if t <= 0 or n_steps < 1:
        raise DomainError(f"semigroup requires t > 0 and n_steps >= 1, got t={t}, n_steps={n_steps}")
    if not np.all(np.isfinite(f.values)):
        raise DomainError("semigroup input has non-finite samples")


@lru_cache(maxsize=24)
def _free_step_matrix(grid: RadialGrid, tau: float, alpha: float) -> np.ndarray:
    """Matrix of e^{-tau |p|^alpha} on the grid: inverse transform, multiplier, forward transform."""
    forward = _transform_matrix(grid)
    inverse = _transform_matrix(grid.reciprocal()) * (2 * np.pi) ** (-grid.d)
    symbol = np.exp(-tau * grid.reciprocal().nodes ** alpha)
    step = inverse @ (symbol[:, None] * forward)
    step.flags.writeable = False
    return step


def free_semigroup_apply(f: RadialFunction, t: float, alpha: float) -> RadialFunction:
    return f.with_values(_free_step_matrix(f.grid, float(t), float(alpha)) @ f.values)


def hardy_semigroup_apply(f: RadialFunction, t: float, params: Parameters, n_steps: int = 16,
                          potential: PotentialSpec | None = None, exact_free: bool = True) -> RadialFunction:
    """
    Strang splitting of e^{-t(|p|^alpha + V)} f with tau = t / n_steps:
    half potential step, free step, full potential steps in between, half potential step.
    Non-negative inputs give non-negative outputs; quadrature ringing below zero is clipped.
    A vanishing potential takes one exact free step unless exact_free is False, so that
    comparisons between potentials can share one discretization.
    """
    _check_semigroup_input(f, t, n_steps)
    potential = potential or PotentialSpec.hardy(params.a)
    if potential.a < 0:
        raise UnsupportedError(f"semigroup stepping requires a non-negative potential, got a={potential.a}")
    non_negative = bool(np.all(f.values >= 0))
    if potential.is_zero and exact_free:
        values = _free_step_matrix(f.grid, float(t), params.alpha) @ f.values
        if non_negative:
            values = np.maximum(values, 0.0)
        return f.with_values(values, semigroup_steps=1)

    tau = t / n_steps
    step = _free_step_matrix(f.grid, float(tau), params.alpha)
    potential_values = potential.values(f.grid.nodes, params.alpha)
    half = np.exp(-0.5 * tau * potential_values)
    full = half * half
    values = f.values * half
    for i in range(n_steps):
        values = step @ values
        if non_negative:
            values = np.maximum(values, 0.0)
        values = values * (full if i < n_steps - 1 else half)
    return f.with_values(values, semigroup_steps=n_steps)


def _column_bump(y_norm: float, grid: RadialGrid) -> tuple[RadialFunction, float]:
    if not grid.contains(y_norm):
        raise DomainError(f"column center {y_norm} lies outside the grid [{grid.r_min}, {grid.r_max}]")
    width = COLUMN_BUMP_WIDTH * y_norm * grid.log_step
    bump = RadialFunction(grid, np.exp(-0.5 * ((grid.nodes - y_norm) / width) ** 2))
    return bump * (1.0 / lp_norm(bump, 1.0)), width


def hardy_kernel_column(t: float, y_norm: float, params: Parameters, n_steps: int, grid: RadialGrid,
                        potential: PotentialSpec | None = None) -> RadialFunction:
    """
    x -> spherical mean of e^{-t(|p|^alpha + V)}(x, y) over |y| = y_norm, obtained by
    evolving a mass-one bump of width two grid spacings centered at y_norm.
    """
    bump, width = _column_bump(y_norm, grid)
    column = hardy_semigroup_apply(bump, t, params, n_steps, potential)
    return column.with_values(column.values, bump_width=width, y_norm=y_norm, t=t, spherical_mean=True)


def difference_kernel_column(t: float, y_norm: float, params: Parameters, n_steps: int,
                             grid: RadialGrid) -> tuple[RadialFunction, RadialFunction]:
    """Returns (free column, free column minus Hardy column), both from the same bump."""
    free = hardy_kernel_column(t, y_norm, params.with_(a=0.0), n_steps, grid)
    hardy = hardy_kernel_column(t, y_norm, params, n_steps, grid)
    return free, free - hardy


def kernel_moment_integral(t: float, d: int, alpha: float, c: float, r_max: float) -> float:
    """int_{|x| < r_max} e^{-t|p|^alpha}(x, 0) (1 + t^{-1/alpha}|x|)^c dx, finite as r_max -> inf iff c < alpha."""
    upper = r_max / t ** (1 / alpha)
    rho = np.geomspace(1e-4, upper, max(64, int(40 * math.log10(upper / 1e-4))))
    values = free_kernel_interpolant(d, alpha)(rho) * (1 + rho) ** c * rho ** d
    head = free_heat_kernel(1.0, 0.0, d, alpha) * 1e-4 ** d / d
    return sphere_area(d) * (integrate.trapezoid(values, np.log(rho)) + head)


def kernel_l2_mass(t: float, d: int, alpha: float, n_points: int = 241) -> float:
    """
    t^{d/alpha} int |e^{-t|p|^alpha}(x, 0)|^2 dx on a fixed radial grid [1e-3, 1e3],
    with the head below 1e-3 and the power-law tail beyond 1e3 added in closed form.
    """
    r = np.geomspace(1e-3, 1e3, n_points)
    values = free_kernel_profile(t, r, d, alpha)
    body = integrate.trapezoid(values ** 2 * r ** d, np.log(r))
    head = free_heat_kernel(t, 0.0, d, alpha) ** 2 * r[0] ** d / d
    tail = values[-1] ** 2 * r[-1] ** d / (d + 2 * alpha)
    return sphere_area(d) * (body + head + tail) * t ** (d / alpha)


def holder_cancellation(w: float, d: int, alpha: float, n_radial: int = 480, n_angular: int = 48) -> float:
    """int |e^{-|p|^alpha}(x, 0) - e^{-|p|^alpha}(x, w)| dx for a shift of length w."""
    kernel = free_kernel_interpolant(d, alpha)
    r = np.geomspace(1e-4, 1e4, n_radial)
    if d == 1:
        cosines, weights = np.array([-1.0, 1.0]), np.array([0.5, 0.5])
    else:
        exponent = (d - 3) / 2
        cosines, weights = special.roots_jacobi(n_angular, exponent, exponent)
        weights = weights / weights.sum()
    dist = np.sqrt(np.maximum(r[:, None] ** 2 + w ** 2 - 2 * r[:, None] * w * cosines[None, :], 0.0))
    difference = np.abs(kernel(r)[:, None] - kernel(dist)) @ weights
    return sphere_area(d) * integrate.trapezoid(difference * r ** d, np.log(r))


def kernel_table_frame(samples: list[KernelSample]) -> pd.DataFrame:
    return pd.DataFrame({
        't': [s.t for s in samples],
        'x': [s.x_norm for s in samples],
        'y': [s.y_norm for s in samples],
        'dist': [s.xy_distance for s in samples],
        'value': [s.value for s in samples],
        'env_low': [s.envelope_low for s in samples],
        'env_high': [s.envelope_high for s in samples],
    })


def write_kernel_table(samples: list[KernelSample], path: str | Path) -> None:
    kernel_table_frame(samples).to_csv(path, index=False, float_format='%.17g')
