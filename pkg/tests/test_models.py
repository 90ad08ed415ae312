import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.special import j0

from src.models.models import ModelKind, ModelParams, slope_selection_params, sinc_eval, flux_pointwise, flux, \
    gradient, get_model, energy_density, free_energy_density, total_energy, modified_energy_bdf2, \
    variational_derivative, hessian_quadratic_form, flux_jacobian_eigenvalues, sinc_series_partial, vacuum_energy
from src.spectral.core import RealField, integrate, random_band_limited, AREA
from src.schemes.simulation import initial_condition_trig


def sinc_params(eta_sq=0.01):
    return ModelParams(ModelKind.SINC, eta_sq)


def test_sinc_eval_at_zero_and_near_switch():
    assert sinc_eval(0.0) == 1.0
    assert_allclose(sinc_eval(1e-5), math.sin(1e-5) / 1e-5, rtol=1e-15)
    below, above = sinc_eval(1e-4 * (1 - 1e-9)), sinc_eval(1e-4 * (1 + 1e-9))
    assert abs(below - above) < 1e-12
    assert_allclose(sinc_eval(math.pi), 0.0, atol=1e-15)


def test_sinc_eval_is_vectorized():
    s = np.array([[0.0, 1.0], [2.0, -3.0]])
    assert_allclose(sinc_eval(s), [[1.0, math.sin(1.0)], [math.sin(2.0) / 2.0, math.sin(3.0) / 3.0]])


@given(s=st.floats(-1e3, 1e3))
def test_sinc_is_bounded_by_one(s):
    assert abs(sinc_eval(s)) <= 1.0


@pytest.mark.parametrize('kwargs', [dict(eta_sq=0.0), dict(eta_sq=-1.0), dict(eta_sq=0.1, beta=0.0),
                                    dict(eta_sq=0.1, beta1=math.inf), dict(eta_sq=0.1, classical_well='quartic')])
def test_model_params_validation(kwargs):
    with pytest.raises(ValueError):
        ModelParams(ModelKind.SINC, **kwargs)


def test_model_params_accept_string_kind():
    assert ModelParams('square', 0.01).kind == ModelKind.SQUARE
    with pytest.raises(ValueError):
        get_model('cubic')


def test_pointwise_fluxes():
    gx, gy = flux_pointwise(sinc_params(), 1.0, 0.0)
    assert_allclose([gx, gy], [-math.sin(1.0), 0.0])
    gx, gy = flux_pointwise(ModelParams(ModelKind.CLASSICAL, 0.01), 2.0, 0.0)
    assert_allclose([gx, gy], [6.0, 0.0])
    gx, gy = flux_pointwise(ModelParams(ModelKind.CLASSICAL, 0.01, classical_well='standard'), 2.0, 0.0)
    assert_allclose([gx, gy], [-2.0 / 3.0, 0.0])
    gx, gy = flux_pointwise(ModelParams(ModelKind.SQUARE, 0.01), math.pi / 2, 0.0)
    assert_allclose([gx, gy], [-1.0, 0.0], atol=1e-15)
    gx, gy = flux_pointwise(ModelParams(ModelKind.LINEAR, 0.01), np.ones(3), np.ones(3))
    assert np.all(gx == 0) and np.all(gy == 0)


@given(zx=st.floats(-1e3, 1e3), zy=st.floats(-1e3, 1e3))
def test_sinc_flux_is_bounded(zx, zy):
    gx, gy = flux_pointwise(sinc_params(), zx, zy)
    assert math.hypot(gx, gy) <= 1.0 + 1e-12


def test_slope_selection_limits_of_sinc_model():
    zx, zy = np.array([1e-2, -3e-3]), np.array([2e-2, 5e-3])
    sinc_g = flux_pointwise(slope_selection_params(0.01), zx, zy)
    unit_g = flux_pointwise(ModelParams(ModelKind.CLASSICAL, 0.01), zx, zy)
    assert_allclose(sinc_g, unit_g, atol=1e-8)
    plain_g = flux_pointwise(sinc_params(), zx, zy)
    standard_g = flux_pointwise(ModelParams(ModelKind.CLASSICAL, 0.01, classical_well='standard'), zx, zy)
    assert_allclose(plain_g, standard_g, atol=1e-8)


def test_sinc_well_integral_matches_bessel(grid32):
    # grad(a cos x) = (-a sin x, 0) and the mean of cos(a sin x) over a period is J0(a)
    x, _ = grid32.coordinates()
    for a in (0.5, 1.0, 2.5):
        h = RealField(grid32, a * np.cos(x))
        assert_allclose(integrate(energy_density(sinc_params(), h)), AREA * j0(a), rtol=1e-12)


def test_energy_of_flat_state_is_vacuum_energy(grid16):
    h = RealField.constant(grid16, 0.7)
    for params in (sinc_params(), ModelParams(ModelKind.CLASSICAL, 0.01), ModelParams(ModelKind.SQUARE, 0.01),
                   ModelParams(ModelKind.LINEAR, 0.01)):
        assert_allclose(total_energy(params, h), vacuum_energy(params), rtol=1e-14, atol=1e-14)
    assert_allclose(vacuum_energy(ModelParams(ModelKind.CLASSICAL, 0.01)), 0.25 * AREA)
    assert_allclose(vacuum_energy(ModelParams(ModelKind.SQUARE, 0.01)), 2.0 * AREA)


def test_total_energy_splits_into_surface_and_well(grid32):
    params = sinc_params(0.05)
    h = initial_condition_trig(grid32)
    lap_energy = 0.5 * 0.05 * (13 ** 2 * 0.01 ** 2 + 50 ** 2 * 0.01 ** 2) * AREA / 4
    assert_allclose(total_energy(params, h), lap_energy + integrate(energy_density(params, h)), rtol=1e-12)
    assert_allclose(integrate(free_energy_density(params, h)), total_energy(params, h), rtol=1e-12)


def test_modified_energy_adds_difference_terms(grid16):
    params = sinc_params()
    h = initial_condition_trig(grid16)
    assert_allclose(modified_energy_bdf2(params, h, h, 0.1), total_energy(params, h), rtol=1e-14)
    shifted = h + 0.5
    # a constant shift has no gradient, only the 1/(4 tau) term survives
    expected = total_energy(params, shifted) + 0.25 * AREA / (4 * 0.1)
    assert_allclose(modified_energy_bdf2(params, shifted, h, 0.1), expected, rtol=1e-12)
    with pytest.raises(ValueError):
        modified_energy_bdf2(params, h, h, 0.0)


@pytest.mark.parametrize('kind', [ModelKind.SINC, ModelKind.CLASSICAL, ModelKind.SQUARE, ModelKind.LINEAR])
def test_variational_derivative_matches_gateaux_derivative(grid32, kind):
    params = ModelParams(kind, 0.02)
    h = initial_condition_trig(grid32)
    v = random_band_limited(grid32, np.random.default_rng(3), k_max=6, amplitude=0.1)
    eps = 1e-5
    numeric = (total_energy(params, h + eps * v) - total_energy(params, h - eps * v)) / (2 * eps)
    analytic = integrate(variational_derivative(params, h) * v)
    assert_allclose(numeric, analytic, rtol=1e-6, atol=1e-8)


def test_flux_on_fields_matches_pointwise(grid16):
    params = sinc_params()
    h = initial_condition_trig(grid16)
    grad = gradient(h)
    g = flux(params, grad)
    gx, gy = flux_pointwise(params, grad.vx.values, grad.vy.values)
    assert_allclose(g.vx.values, gx)
    assert_allclose(g.vy.values, gy)


def test_hessian_quadratic_form_special_points():
    assert hessian_quadratic_form([math.pi, 0.0], [1.0, 0.0]) == 1.0
    assert hessian_quadratic_form([0.0, 0.0], [0.6, 0.8]) == pytest.approx(-1.0)
    assert hessian_quadratic_form([math.pi, 0.0], [0.0, 1.0]) == pytest.approx(0.0, abs=1e-15)
    z = np.array([[1.0, 2.0], [0.0, 0.0]])
    x = np.array([[0.5, 0.5], [1.0, 1.0]])
    assert hessian_quadratic_form(z, x).shape == (2,)


@settings(max_examples=200)
@given(zx=st.floats(-50, 50), zy=st.floats(-50, 50), xx=st.floats(-1, 1), xy=st.floats(-1, 1))
def test_hessian_quadratic_form_is_bounded_by_norm(zx, zy, xx, xy):
    assert hessian_quadratic_form([zx, zy], [xx, xy]) <= (xx * xx + xy * xy) * (1.0 + 1e-12) + 1e-300


def test_flux_jacobian_eigenvalues():
    lam1, lam2 = flux_jacobian_eigenvalues(0.0)
    assert lam1 == -1.0 and lam2 == -1.0
    lam1, lam2 = flux_jacobian_eigenvalues(np.linspace(0, 100, 1001))
    assert np.all(np.abs(lam1) <= 1.0) and np.all(np.abs(lam2) <= 1.0)
    with pytest.raises(ValueError):
        flux_jacobian_eigenvalues(-1.0)


def test_sinc_series_partial_sums():
    assert sinc_series_partial(0.3, 0) == 1.0
    assert_allclose(sinc_series_partial(0.3, 1), 1 - 0.09 / 6)
    assert_allclose(sinc_series_partial(1.0, 10), math.sin(1.0), rtol=1e-14)
    with pytest.raises(ValueError):
        sinc_series_partial(1.0, -1)
