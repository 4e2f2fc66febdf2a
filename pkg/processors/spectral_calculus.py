"""
Functional calculus of the Hardy operator on radial profiles: Littlewood-Paley
projections, fractional powers, square functions and the Hormander functional
sup_t ||phi F(t .)||_{H^s} of spectral multipliers.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np
import pandas as pd
from scipy import integrate, special

from processors.exceptions import DomainError, NumericalError, UndersampledError, UnsupportedError
from processors.heat_kernels import PotentialSpec, hardy_semigroup_apply
from processors.radial_core import RadialFunction, lp_norm, multiplier_apply
from processors.special_functions import Parameters

logger = logging.getLogger(__name__)

GAMMA_NODES_PER_DECADE = 8
GAMMA_TAIL_LIMIT = 0.25
HORMANDER_POINTS = 4096
HORMANDER_WINDOW = 8.0
HORMANDER_T_VALUES = 2.0 ** np.linspace(-20, 20, 81)
MIN_SAMPLES_PER_DILATION = 32


@dataclass(frozen=True)
class BandRange:
    j_min: int
    j_max: int

    def __post_init__(self):
        if self.j_min > self.j_max:
            raise DomainError(f"empty band range: j_min={self.j_min} > j_max={self.j_max}")

    def __iter__(self):
        return iter(range(self.j_min, self.j_max + 1))

    def __len__(self) -> int:
        return self.j_max - self.j_min + 1


@dataclass(frozen=True)
class DyadicBand:
    index_exponent: int
    projected: RadialFunction

    @property
    def frequency(self) -> float:
        return 2.0 ** self.index_exponent


def _dyadic_exponent(N: float) -> int:
    j = round(math.log2(N)) if N > 0 else None
    if j is None or not math.isclose(2.0 ** j, N, rel_tol=1e-12):
        raise DomainError(f"N must be a power of two, got {N}")
    return j


def heat_multiplier_projection(k: np.ndarray, N: float, alpha: float) -> np.ndarray:
    return np.exp(-(k / N) ** alpha) - np.exp(-(2 * k / N) ** alpha)


def lp_projection(f: RadialFunction, N: float, params: Parameters, n_steps: int = 16) -> RadialFunction:
    """
    P_N f = e^{-L/N^alpha} f - e^{-2^alpha L/N^alpha} f.

    :param f: radial profile
    :param N: dyadic frequency 2^j
    :param params: operator parameters, a >= 0
    :param n_steps: Strang steps per semigroup evaluation (a > 0 only)
    """
    params.require_littlewood_paley()
    _dyadic_exponent(N)
    if params.a == 0:
        return multiplier_apply(f, lambda k: heat_multiplier_projection(k, N, params.alpha))
    early = hardy_semigroup_apply(f, N ** -params.alpha, params, n_steps)
    late = hardy_semigroup_apply(f, 2 ** params.alpha * N ** -params.alpha, params, n_steps)
    return early - late


def smooth_cutoff(x: np.ndarray) -> np.ndarray:
    """Phi: 1 on [0, 1], 0 on [2, inf), quintic smoothstep in between."""
    u = np.clip(np.asarray(x, dtype=float) - 1.0, 0.0, 1.0)
    return 1.0 - u ** 3 * (10 - 15 * u + 6 * u ** 2)


def sharp_band_symbol(lam: np.ndarray, N: float, alpha: float) -> np.ndarray:
    """Psi_N(lam) = Phi(lam / N^alpha) - Phi(lam / (N/2)^alpha); sums to 1 over dyadic N."""
    return smooth_cutoff(lam / N ** alpha) - smooth_cutoff(lam / (N / 2) ** alpha)


def sharp_projection_free(f: RadialFunction, N: float, params: Parameters) -> RadialFunction:
    if params.a != 0:
        raise UnsupportedError(f"sharp projections exist only for the free operator, got a={params.a}")
    _dyadic_exponent(N)
    return multiplier_apply(f, lambda k: sharp_band_symbol(k ** params.alpha, N, params.alpha))


def generator_apply(f: RadialFunction, params: Parameters, potential: PotentialSpec | None = None,
                    method: str = 'direct', tau: float | None = None, n_steps: int = 4) -> RadialFunction:
    """
    L f = |p|^alpha f + V f.

    The 'semigroup' method extrapolates (f - e^{-tau L} f)/tau over tau and tau/2;
    it is inaccurate where tau V is not small and serves as a cross-check.
    """
    potential = potential or PotentialSpec.hardy(params.a)
    if method == 'direct':
        free = multiplier_apply(f, lambda k: k ** params.alpha)
        return free + f.with_values(potential.values(f.grid.nodes, params.alpha) * f.values)
    if method != 'semigroup':
        raise DomainError(f"method must be 'direct' or 'semigroup', got {method!r}")
    tau = tau or (f.grid.r_min * 10) ** params.alpha

    def quotient(step: float) -> np.ndarray:
        evolved = hardy_semigroup_apply(f, step, params, n_steps, potential)
        return (f.values - evolved.values) / step

    return f.with_values(2 * quotient(tau / 2) - quotient(tau))


def _gamma_integral(f: RadialFunction, s: float, params: Parameters, n_steps: int) -> RadialFunction:
    """(1/Gamma(s/2)) int_0^inf e^{-tL} f t^{s/2} dt/t on log-spaced nodes, with head and tail corrections."""
    grid, alpha = f.grid, params.alpha
    t_min = (4 * grid.r_min) ** alpha
    t_max = (grid.r_max / 8) ** alpha
    count = max(16, int(GAMMA_NODES_PER_DECADE * math.log10(t_max / t_min)) + 1)
    times = np.geomspace(t_min, t_max, count)
    evolved = np.array([hardy_semigroup_apply(f, t, params, n_steps).values for t in times])
    weighted = evolved * (times ** (s / 2))[:, None]
    body = integrate.trapezoid(weighted, np.log(times), axis=0)
    head = f.values * t_min ** (s / 2) / (s / 2)
    tail = evolved[-1] * t_max ** (s / 2) / (params.d / alpha - s / 2)
    total = (body + head + tail) / special.gamma(s / 2)
    tail_share = np.linalg.norm(tail) / max(np.linalg.norm(body + head + tail), 1e-300)
    if tail_share > GAMMA_TAIL_LIMIT:
        raise NumericalError("Gamma integral tail does not converge on this grid",
                             {'tail_share': tail_share, 't_max': t_max, 'nodes': count})
    logger.debug(f"gamma integral s={s}: {count} time nodes, tail share {tail_share:.2e}")
    return f.with_values(total, tail_share=tail_share)


def fractional_power_apply(f: RadialFunction, s: float, sign: str, params: Parameters,
                           n_steps: int = 16, route: str = 'auto', generator: str = 'direct') -> RadialFunction:
    """
    L^{+-s/2} f. For a = 0 the exact multiplier |k|^{+-alpha s/2}; otherwise the
    Gamma integral of the semigroup for negative powers and L^{-(2-s)/2}(L f)
    for positive powers.

    :param route: 'auto', 'multiplier' (a = 0 only) or 'semigroup'
    :param generator: how L f is formed for positive powers, 'direct' or the
        extrapolated semigroup quotient 'semigroup' (see generator_apply)
    """
    if not 0 < s <= 2:
        raise DomainError(f"s must lie in (0, 2], got s={s}")
    if sign not in ('positive', 'negative'):
        raise DomainError(f"sign must be 'positive' or 'negative', got {sign!r}")
    if route not in ('auto', 'multiplier', 'semigroup'):
        raise DomainError(f"route must be 'auto', 'multiplier' or 'semigroup', got {route!r}")
    params.require_littlewood_paley()
    exponent = params.alpha * s / 2 * (1 if sign == 'positive' else -1)
    if route == 'multiplier' or (route == 'auto' and params.a == 0):
        if params.a != 0:
            raise UnsupportedError(f"multiplier route requires a = 0, got a={params.a}")
        return multiplier_apply(f, lambda k: k ** exponent)
    if sign == 'negative':
        if s == 2:
            raise DomainError("negative powers require s < 2")
        return _gamma_integral(f, s, params, n_steps)
    generated = generator_apply(f, params, method=generator)
    if s == 2:
        return generated
    return _gamma_integral(generated, 2 - s, params, n_steps)


def littlewood_paley_decomposition(f: RadialFunction, params: Parameters, band_range: BandRange,
                                   n_steps: int = 16, jobs: int = 1) -> list[DyadicBand]:
    """Bands P_{2^j} f for j in band_range, ordered by increasing j."""
    params.require_littlewood_paley()

    def project(j: int) -> DyadicBand:
        return DyadicBand(j, lp_projection(f, 2.0 ** j, params, n_steps))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            bands = list(executor.map(project, band_range))
    else:
        bands = [project(j) for j in band_range]
    return sorted(bands, key=lambda band: band.index_exponent)


def band_sum(bands: list[DyadicBand]) -> RadialFunction:
    total = bands[0].projected
    for band in bands[1:]:
        total = total + band.projected
    return total


def square_function(f: RadialFunction, s: float, params: Parameters, band_range: BandRange,
                    n_steps: int = 16, jobs: int = 1) -> RadialFunction:
    """
    (sum_N |N^{alpha s/2} P_N f|^2)^{1/2} over the band range. The L^2 norms of
    the two extreme bands are reported in the metadata as the truncation tail.
    """
    if not 0 < s < 2:
        raise DomainError(f"s must lie in (0, 2), got s={s}")
    bands = littlewood_paley_decomposition(f, params, band_range, n_steps, jobs)
    weighted = [band.frequency ** (params.alpha * s / 2) * band.projected.values for band in bands]
    values = np.sqrt(np.sum(np.square(weighted), axis=0))
    result = f.with_values(values)
    total = lp_norm(result, 2.0)
    low = lp_norm(f.with_values(weighted[0]), 2.0)
    high = lp_norm(f.with_values(weighted[-1]), 2.0)
    tail = max(low, high) / total if total > 0 else 0.0
    if tail > 0.05:
        logger.warning(f"square_function: extreme bands carry {tail:.2%} of the norm for {band_range}")
    return result.with_values(values, tail_low=low, tail_high=high, tail_relative=tail,
                              j_min=band_range.j_min, j_max=band_range.j_max)


def decomposition_frame(bands: list[DyadicBand]) -> pd.DataFrame:
    return pd.concat([
        pd.DataFrame({'j': band.index_exponent, 'r': band.projected.nodes, 'value': band.projected.values})
        for band in bands
    ], ignore_index=True)


def write_decomposition(bands: list[DyadicBand], path: str | Path) -> None:
    decomposition_frame(bands).to_csv(path, index=False, float_format='%.17g')


def hormander_bump(x: np.ndarray) -> np.ndarray:
    """C-infinity bump supported in [1/2, 2]."""
    x = np.asarray(x, dtype=float)
    inside = (x > 0.5) & (x < 2.0)
    safe = np.where(inside, x, 1.0)
    return np.where(inside, np.exp(-1.0 / ((safe - 0.5) * (2.0 - safe))), 0.0)


def imaginary_power(tau: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda lam: np.asarray(lam, dtype=float) ** (1j * tau)


def riesz_mean(beta: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda lam: np.clip(1.0 - np.asarray(lam, dtype=float), 0.0, None) ** beta


def _as_callable(F, t_values: np.ndarray):
    if callable(F):
        return F
    lam, values = (np.asarray(part) for part in F)
    for t in t_values:
        count = np.count_nonzero((lam >= t / 2) & (lam <= 2 * t))
        if count < MIN_SAMPLES_PER_DILATION:
            raise UndersampledError(f"multiplier has {count} samples in [{t / 2:.3g}, {2 * t:.3g}], "
                                    f"need {MIN_SAMPLES_PER_DILATION}")
    return lambda x: np.interp(x, lam, values)


def sobolev_norm(values: np.ndarray, dx: float, s: float) -> float:
    """H^s norm with symbol (1 + 4 pi^2 xi^2)^{s/2} of samples on a uniform grid."""
    spectrum = np.fft.fft(values) * dx
    xi = np.fft.fftfreq(values.size, dx)
    d_xi = 1.0 / (values.size * dx)
    return float(np.sqrt(np.sum(np.abs(spectrum) ** 2 * (1 + 4 * np.pi ** 2 * xi ** 2) ** s) * d_xi))


def hormander_norms(F, s: float, n_points: int = HORMANDER_POINTS,
                    t_values: np.ndarray = HORMANDER_T_VALUES) -> np.ndarray:
    """
    ||phi F(t .)||_{H^s} for each dilation in t_values.

    :param F: callable lam -> F(lam), or a pair (lam, values) of samples
    :param s: smoothness, s > 0
    """
    if s <= 0:
        raise DomainError(f"smoothness must be positive, got s={s}")
    multiplier = _as_callable(F, t_values)
    x = np.linspace(-HORMANDER_WINDOW, HORMANDER_WINDOW, n_points, endpoint=False)
    dx = x[1] - x[0]
    bump = hormander_bump(x)
    support = bump > 0
    norms = []
    for t in t_values:
        values = np.zeros(n_points, dtype=complex)
        values[support] = bump[support] * multiplier(t * x[support])
        norms.append(sobolev_norm(values, dx, s))
    return np.array(norms)


def hormander_condition_norm(F, s: float, n_points: int = HORMANDER_POINTS,
                             t_values: np.ndarray = HORMANDER_T_VALUES) -> float:
    """sup_t ||phi F(t .)||_{H^s} over the dilations t_values."""
    return float(np.max(hormander_norms(F, s, n_points, t_values)))


class HormanderSweep(NamedTuple):
    sizes: list[int]
    norms: list[float]
    unbounded: bool


def hormander_refinement_sweep(F, s: float, sizes: tuple[int, ...] = (2048, 4096, 8192, 16384, 32768, 65536),
                               growth: float = 1.1) -> HormanderSweep:
    """Hormander norms under grid refinement; unbounded when the last refinement still grows by `growth`."""
    norms = [hormander_condition_norm(F, s, n_points=n) for n in sizes]
    unbounded = norms[-1] > growth * norms[-2]
    logger.info(f"hormander sweep s={s}: norms {['%.4g' % n for n in norms]} unbounded={unbounded}")
    return HormanderSweep(list(sizes), norms, unbounded)
