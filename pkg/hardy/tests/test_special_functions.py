import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from processors.exceptions import DomainError, UnsupportedError
from processors.special_functions import (Parameters, bessel_kernel, critical_coupling, delta_from_coupling,
                                          free_kernel_l2_constant, free_kernel_tail_constant,
                                          free_kernel_tail_series, hormander_threshold, lp_hardy_constant,
                                          negative_coupling_window, psi, riesz_constant, sphere_area)

mpmath.mp.dps = 30

PAIRS = [(d, alpha) for d in (2, 3, 4) for alpha in (0.5, 1.0, 1.5)]


def test_constants_in_three_dimensions() -> None:
    assert critical_coupling(3, 1.0) == pytest.approx(-2 / math.pi, rel=1e-12)
    assert lp_hardy_constant(3, 1.0, 2.0) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-12)
    assert riesz_constant(3, 1.0) == pytest.approx(1 / (2 * math.pi ** 2), rel=1e-12)


@pytest.mark.parametrize('d, alpha', PAIRS)
def test_critical_coupling_matches_high_precision(d: int, alpha: float) -> None:
    x, y = mpmath.mpf(d + alpha) / 4, mpmath.mpf(d - alpha) / 4
    expected = -mpmath.power(2, alpha) * mpmath.gamma(x) ** 2 / mpmath.gamma(y) ** 2
    assert critical_coupling(d, alpha) == pytest.approx(float(expected), rel=1e-12)


@pytest.mark.parametrize('d, alpha', PAIRS)
def test_hardy_constant_squared_is_minus_critical_coupling(d: int, alpha: float) -> None:
    assert lp_hardy_constant(d, alpha, 2.0) ** 2 == pytest.approx(-critical_coupling(d, alpha), rel=1e-12)


@given(d=st.integers(min_value=2, max_value=8), fraction=st.floats(min_value=0.05, max_value=0.95))
def test_hardy_constant_identity_holds_for_random_orders(d: int, fraction: float) -> None:
    alpha = 2 * fraction
    assert lp_hardy_constant(d, alpha, 2.0) ** 2 == pytest.approx(-critical_coupling(d, alpha), rel=1e-11)


def test_hardy_constant_against_gamma_formula_for_p3() -> None:
    d, alpha, p = 3, 1.0, 3.0
    dual = p / (p - 1)
    expected = (mpmath.sqrt(2) * mpmath.gamma((d / dual + alpha / 2) / 2) * mpmath.gamma(mpmath.mpf(d) / (2 * p))
                / (mpmath.gamma((d / p - alpha / 2) / 2) * mpmath.gamma(d / (2 * dual))))
    assert lp_hardy_constant(d, alpha, p) == pytest.approx(float(expected), rel=1e-12)


@pytest.mark.parametrize('p', [1.0, 6.0, 10.0])
def test_hardy_constant_rejects_exponent_outside_range(p: float) -> None:
    with pytest.raises(DomainError):
        lp_hardy_constant(3, 1.0, p)


@pytest.mark.parametrize('d, alpha', [(0, 1.0), (3, 2.0), (1, 1.0), (3, -0.5)])
def test_invalid_dimension_or_order(d: int, alpha: float) -> None:
    with pytest.raises(DomainError):
        critical_coupling(d, alpha)


@pytest.mark.parametrize('d, alpha', PAIRS)
def test_psi_endpoints(d: int, alpha: float) -> None:
    assert psi(0.0, d, alpha) == 0.0
    assert psi((d - alpha) / 2, d, alpha) == pytest.approx(critical_coupling(d, alpha), rel=1e-10)


def test_psi_value_in_four_dimensions() -> None:
    assert psi(1.0, 4, 1.0) == pytest.approx(-1.0, rel=1e-12)


@pytest.mark.parametrize('d, alpha', PAIRS)
def test_psi_is_strictly_decreasing(d: int, alpha: float) -> None:
    sigmas = np.linspace(-alpha + 1e-2, (d - alpha) / 2, 200)
    values = np.array([psi(sigma, d, alpha) for sigma in sigmas])
    assert np.all(np.diff(values) < 0)


def test_psi_rejects_sigma_outside_range() -> None:
    with pytest.raises(DomainError):
        psi(-1.5, 3, 1.0)
    with pytest.raises(DomainError):
        psi(1.5, 3, 1.0)


@pytest.mark.parametrize('d, alpha', PAIRS)
@pytest.mark.parametrize('share', [-0.9, -0.3, 0.5, 1.0, 3.0])
def test_delta_round_trip(d: int, alpha: float, share: float) -> None:
    a_star = critical_coupling(d, alpha)
    a = share * abs(a_star) if share > 0 else -share * a_star
    delta = delta_from_coupling(a, d, alpha)
    assert psi(delta, d, alpha) == pytest.approx(a, rel=1e-10, abs=1e-10)


def test_delta_signs_and_limits() -> None:
    a_star = critical_coupling(3, 1.0)
    assert delta_from_coupling(0.0, 3, 1.0) == 0.0
    assert delta_from_coupling(1.0, 3, 1.0) < 0
    assert 0 < delta_from_coupling(0.5 * a_star, 3, 1.0) < 1.0
    assert delta_from_coupling(a_star, 3, 1.0) == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(DomainError):
        delta_from_coupling(1.01 * a_star, 3, 1.0)


def test_hormander_threshold_spot_values() -> None:
    assert hormander_threshold(1, 0.5) == 5.5
    assert hormander_threshold(3, 1.0) == 8.5
    with pytest.raises(DomainError):
        hormander_threshold(3, 0.0)


def test_sphere_area() -> None:
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_free_kernel_tail_constants() -> None:
    # Poisson kernels: 1/(pi (1 + r^2)) in d=1 and 1/(pi^2 (1 + r^2)^2) in d=3
    assert free_kernel_tail_constant(1, 1.0) == pytest.approx(1 / math.pi, rel=1e-12)
    assert free_kernel_tail_constant(3, 1.0) == pytest.approx(1 / math.pi ** 2, rel=1e-12)
    with pytest.raises(DomainError):
        free_kernel_tail_constant(3, 2.0)


def test_tail_series_matches_poisson_kernel() -> None:
    r = 40.0
    poisson = 1 / (math.pi ** 2 * (1 + r ** 2) ** 2)
    assert free_kernel_tail_series(3, 1.0, r, terms=6) == pytest.approx(poisson, rel=1e-8)


def test_l2_constant_matches_poisson_kernel() -> None:
    # int (1 / (pi (1 + x^2)))^2 dx = 1 / (2 pi)
    assert free_kernel_l2_constant(1, 1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-12)


@pytest.mark.parametrize('d', [1, 2, 3, 4, 5])
@pytest.mark.parametrize('z', [0.0, 1e-3, 0.7, 2.3, 17.0])
def test_bessel_kernel_against_high_precision(d: int, z: float) -> None:
    nu = mpmath.mpf(d) / 2 - 1
    if z == 0.0:
        expected = (2 * mpmath.pi) ** (mpmath.mpf(d) / 2) / (2 ** nu * mpmath.gamma(nu + 1))
    else:
        expected = (2 * mpmath.pi) ** (mpmath.mpf(d) / 2) * mpmath.besselj(nu, z) / mpmath.mpf(z) ** nu
    assert float(bessel_kernel(z, d)) == pytest.approx(float(expected), rel=1e-10, abs=1e-14)


def test_parameters_derive_delta() -> None:
    params = Parameters(d=3, alpha=1.0, a=1.0)
    assert params.delta == pytest.approx(delta_from_coupling(1.0, 3, 1.0))
    assert params.delta_plus == 0.0
    assert params.a_star == pytest.approx(-2 / math.pi)
    assert params.with_(a=0.0).delta == 0.0
    assert set(params.as_dict()) == {'d', 'alpha', 'a', 'delta', 's', 'p'}


@pytest.mark.parametrize('changes', [{'s': 0.0}, {'s': 2.5}, {'p': 1.0}, {'p': math.inf}, {'alpha': 2.0},
                                     {'a': -1.0}])
def test_parameters_reject_out_of_range(changes: dict) -> None:
    values = {'d': 3, 'alpha': 1.0, 'a': 0.0, 's': 1.0, 'p': 2.0} | changes
    with pytest.raises(DomainError):
        Parameters(**values)


def test_negative_coupling_parameters() -> None:
    params = Parameters(d=3, alpha=1.0, a=0.5 * critical_coupling(3, 1.0))
    assert params.delta_plus == params.delta > 0
    with pytest.raises(UnsupportedError):
        params.require_littlewood_paley()
    low, high = negative_coupling_window(params)
    assert low == pytest.approx(3 / (3 - params.delta))
    assert high == pytest.approx(3 / params.delta)
    assert negative_coupling_window(params.with_(a=1.0)) == (1.0, math.inf)
