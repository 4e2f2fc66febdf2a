"""
Closed-form constants of the generalized Hardy operator

    L_{a,alpha} = (-Delta)^{alpha/2} + a |x|^{-alpha}

Gamma ratios are evaluated through log-Gamma with an explicit sign so that
large dimensions and small exponents do not overflow.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import special

from processors.exceptions import DomainError, UnsupportedError

logger = logging.getLogger(__name__)

BISECTION_LOWER_OFFSET = 1e-9
BISECTION_MAX_ITERATIONS = 200
BISECTION_TOLERANCE = 1e-10


def _check_dimension(d: int, alpha: float) -> None:
    if int(d) != d or d < 1:
        raise DomainError(f"dimension must be a positive integer, got d={d}")
    if not 0 < alpha < min(2, d):
        raise DomainError(f"alpha must lie in (0, min(2, d)), got alpha={alpha} for d={d}")


def _gamma_ratio(numerator: tuple[float, ...], denominator: tuple[float, ...]) -> float:
    """Returns prod Gamma(numerator) / prod Gamma(denominator) via log-Gamma."""
    log_value = sum(special.gammaln(x) for x in numerator) - sum(special.gammaln(x) for x in denominator)
    sign = np.prod([special.gammasgn(x) for x in numerator]) * np.prod([special.gammasgn(x) for x in denominator])
    return float(sign * np.exp(log_value))


def critical_coupling(d: int, alpha: float) -> float:
    """
    Critical coupling a_* = -2^alpha Gamma((d+alpha)/4)^2 / Gamma((d-alpha)/4)^2,
    the most negative a for which L_{a,alpha} is non-negative.
    """
    _check_dimension(d, alpha)
    ratio = _gamma_ratio(((d + alpha) / 4, (d + alpha) / 4), ((d - alpha) / 4, (d - alpha) / 4))
    return -(2.0 ** alpha) * ratio


def lp_hardy_constant(d: int, alpha: float, p: float) -> float:
    """
    Sharp constant C with ||(-Delta)^{alpha/4} f||_p >= C || |x|^{-alpha/2} f ||_p.

    :param d: dimension
    :param alpha: order of the fractional Laplacian
    :param p: Lebesgue exponent, 1 < p < 2d/alpha
    """
    _check_dimension(d, alpha)
    if not 1 < p < 2 * d / alpha:
        raise DomainError(f"Hardy inequality requires 1 < p < 2d/alpha = {2 * d / alpha}, got p={p}")
    p_dual = p / (p - 1)
    ratio = _gamma_ratio(
        ((d / p_dual + alpha / 2) / 2, d / (2 * p)),
        ((d / p - alpha / 2) / 2, d / (2 * p_dual)),
    )
    return 2.0 ** (alpha / 2) * ratio


def psi(sigma: float, d: int, alpha: float) -> float:
    """Coupling as a function of the ground-state exponent, Psi(0) = 0."""
    _check_dimension(d, alpha)
    upper = (d - alpha) / 2
    if not -alpha < sigma <= upper * (1 + 1e-15):
        raise DomainError(f"sigma must lie in (-alpha, (d-alpha)/2] = ({-alpha}, {upper}], got {sigma}")
    if sigma == 0:
        return 0.0
    sigma = min(sigma, upper)
    ratio = _gamma_ratio(((sigma + alpha) / 2, (d - sigma) / 2), ((d - sigma - alpha) / 2, sigma / 2))
    return -(2.0 ** alpha) * ratio


def delta_from_coupling(a: float, d: int, alpha: float) -> float:
    """
    Inverts psi by bisection. Psi is strictly decreasing and tends to +infinity
    at -alpha, so the bracket (-alpha + 1e-9, (d-alpha)/2] always straddles a.
    """
    a_star = critical_coupling(d, alpha)
    if a < a_star - 1e-12 * abs(a_star):
        raise DomainError(f"coupling a={a} lies below the critical coupling a_*={a_star}")
    if a == 0:
        return 0.0
    upper = (d - alpha) / 2
    if a <= a_star:
        return upper
    low, high = -alpha + BISECTION_LOWER_OFFSET, upper
    mid = 0.5 * (low + high)
    for iteration in range(BISECTION_MAX_ITERATIONS):
        mid = 0.5 * (low + high)
        value = psi(mid, d, alpha) if mid != 0 else 0.0
        if abs(value - a) <= 1e-3 * BISECTION_TOLERANCE * max(1.0, abs(a)) or high - low < 4e-16:
            break
        if value > a:
            low = mid
        else:
            high = mid
    logger.debug(f"delta_from_coupling: a={a}, d={d}, alpha={alpha} -> {mid} after {iteration + 1} iterations")
    return mid


def hormander_threshold(d: int, c: float) -> float:
    """Minimal (exclusive) smoothness s in the multiplier theorem for kernel moment order c."""
    if c <= 0:
        raise DomainError(f"moment order c must be positive, got {c}")
    return 2.0 ** math.floor(d / (2 * c)) * (d / 2 * (1 + 1 / c) + 1) + 0.5


def riesz_constant(d: int, alpha: float) -> float:
    """Prefactor of the Riesz kernel |p|^{-alpha}(x, y) = c |x-y|^{alpha-d}."""
    if not 0 < alpha < d:
        raise DomainError(f"Riesz kernel requires 0 < alpha < d, got alpha={alpha}, d={d}")
    return _gamma_ratio(((d - alpha) / 2,), (alpha / 2,)) / (math.pi ** (d / 2) * 2.0 ** alpha)


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def free_kernel_tail_constant(d: int, alpha: float) -> float:
    """Constant A with e^{-|p|^alpha}(x, 0) ~ A |x|^{-d-alpha} as |x| -> infinity."""
    if not 0 < alpha < 2:
        raise DomainError(f"alpha must lie in (0, 2), got alpha={alpha}")
    return (alpha * 2.0 ** (alpha - 1) * math.pi ** (-d / 2 - 1) * math.sin(math.pi * alpha / 2)
            * math.gamma((d + alpha) / 2) * math.gamma(alpha / 2))


def free_kernel_tail_series(d: int, alpha: float, r: float, terms: int = 6) -> float:
    """Asymptotic series of the free kernel at t=1 for large r."""
    total = 0.0
    for m in range(1, terms + 1):
        coefficient = ((-1) ** (m + 1) / math.factorial(m) * 2.0 ** (m * alpha) * math.pi ** (-d / 2 - 1)
                       * math.gamma((d + m * alpha) / 2) * math.gamma(1 + m * alpha / 2)
                       * math.sin(math.pi * m * alpha / 2))
        total += coefficient * r ** (-d - m * alpha)
    return total


def free_kernel_l2_constant(d: int, alpha: float) -> float:
    """t^{d/alpha} times the squared L^2 norm of the free kernel, independent of t."""
    return (2 * math.pi) ** (-d) * sphere_area(d) * math.gamma(d / alpha) / (alpha * 2.0 ** (d / alpha))


def bessel_kernel(z, d: int):
    """
    Radial Fourier kernel (2 pi)^{d/2} z^{-nu} J_nu(z), nu = d/2 - 1, so that
    f^(k) = int_0^inf f(r) r^{d-1} bessel_kernel(k r, d) dr.
    """
    z = np.asarray(z, dtype=float)
    nu = d / 2 - 1
    prefactor = (2 * np.pi) ** (d / 2)
    small = np.abs(z) < 1e-8
    safe = np.where(small, 1.0, z)
    if d % 2 == 1:
        # z^{-nu} J_nu(z) = sqrt(2/pi) z^{-l} j_l(z) for nu = l + 1/2
        order = (d - 3) // 2
        if order < 0:
            values = np.sqrt(2 / np.pi) * np.cos(safe)
        elif order == 0:
            values = np.sqrt(2 / np.pi) * np.sinc(safe / np.pi)
        else:
            values = np.sqrt(2 / np.pi) * special.spherical_jn(order, safe) / safe ** order
    else:
        values = special.jv(nu, safe) / safe ** nu
    limit = 1.0 / (2.0 ** nu * special.gamma(nu + 1))
    return prefactor * np.where(small, limit, values)


def negative_coupling_window(params: 'Parameters') -> tuple[float, float]:
    """Exponent range (d/(d-delta), d/delta) on which the semigroup is bounded for a < 0."""
    if params.a >= 0:
        return 1.0, math.inf
    return params.d / (params.d - params.delta), params.d / params.delta


@dataclass(frozen=True)
class Parameters:
    """
    The tuple (d, alpha, a, s, p) shared by every computation; delta = Psi^{-1}(a)
    is derived on construction.
    """
    d: int
    alpha: float
    a: float = 0.0
    s: float = 1.0
    p: float = 2.0
    delta: float = field(init=False, compare=False)

    def __post_init__(self):
        _check_dimension(self.d, self.alpha)
        if not 0 < self.s <= 2:
            raise DomainError(f"s must lie in (0, 2], got s={self.s}")
        if not 1 < self.p < math.inf:
            raise DomainError(f"p must lie in (1, inf), got p={self.p}")
        object.__setattr__(self, 'delta', delta_from_coupling(self.a, self.d, self.alpha))

    @property
    def delta_plus(self) -> float:
        return self.delta if self.a < 0 else 0.0

    @property
    def a_star(self) -> float:
        return critical_coupling(self.d, self.alpha)

    def with_(self, **changes) -> 'Parameters':
        return replace(self, **changes)

    def require_littlewood_paley(self) -> None:
        if self.a < 0:
            raise UnsupportedError(
                f"Littlewood-Paley and semigroup operations require a >= 0, got a={self.a}")

    def as_dict(self) -> dict:
        return {'d': self.d, 'alpha': self.alpha, 'a': self.a, 'delta': self.delta, 's': self.s, 'p': self.p}
