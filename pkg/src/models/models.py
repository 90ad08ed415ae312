'''
Nonlinear fluxes, energy functionals and pointwise bounds for the MBE model variants
'''
import math
import numpy as np
from dataclasses import dataclass
from enum import Enum

from src.config import cfg
from src.spectral.core import RealField, FieldError, spectral_gradient, spectral_laplacian, \
    spectral_bilaplacian, spectral_divergence, integrate, norm_l2

SERIES_SWITCH = cfg['NUMERICS']['SINC_SERIES_SWITCH']


class ModelKind(Enum):
    SINC = 'sinc'
    CLASSICAL = 'classical'
    SQUARE = 'square'
    LINEAR = 'linear'


CLASSICAL_WELLS = ('unit', 'standard')


@dataclass(frozen=True)
class ModelParams:
    '''
    :param kind: ModelKind
    :param eta_sq: Diffusion coefficient eta^2, > 0
    :param beta: Slope scale, > 0 (sinc model)
    :param beta1: Well-depth scale (sinc model)
    :param classical_well: 'unit' for 1/4(|z|^2-1)^2, 'standard' for 1/24(|z|^2-6)^2 (classical model)
    '''
    kind: ModelKind
    eta_sq: float
    beta: float = cfg['RUN_DEFAULTS']['BETA']
    beta1: float = cfg['RUN_DEFAULTS']['BETA1']
    classical_well: str = cfg['RUN_DEFAULTS']['CLASSICAL_WELL']

    def __post_init__(self):
        if not isinstance(self.kind, ModelKind):
            object.__setattr__(self, 'kind', ModelKind(self.kind))
        if not self.eta_sq > 0:
            raise ValueError('eta_sq must be > 0, got {}'.format(self.eta_sq))
        if not self.beta > 0:
            raise ValueError('beta must be > 0, got {}'.format(self.beta))
        if not math.isfinite(self.beta1):
            raise ValueError('beta1 must be finite, got {}'.format(self.beta1))
        if self.classical_well not in CLASSICAL_WELLS:
            raise ValueError('classical_well must be one of {}, got {}'.format(CLASSICAL_WELLS,
                                                                              self.classical_well))


def slope_selection_params(eta_sq):
    '''
    Sinc model parameters (beta = sqrt(6), beta1 = 1/6) whose small-slope limit is the slope-selection model
    '''
    return ModelParams(ModelKind.SINC, eta_sq, beta=math.sqrt(6.0), beta1=1.0 / 6.0)


@dataclass(frozen=True, eq=False)
class VectorField:
    vx: RealField
    vy: RealField

    def __post_init__(self):
        if self.vx.grid != self.vy.grid:
            raise FieldError('Vector components live on different grids')

    @property
    def grid(self):
        return self.vx.grid


def sinc_eval(s):
    '''
    sin(s)/s with the removable singularity handled by a Taylor polynomial for |s| < 1e-4
    :param s: Float or array
    :return: Float or array of the same shape
    '''
    s = np.asarray(s, dtype=np.float64)
    small = np.abs(s) < SERIES_SWITCH
    safe = np.where(small, 1.0, s)
    s2 = s * s
    out = np.where(small, 1.0 - s2 / 6.0 + s2 * s2 / 120.0, np.sin(safe) / safe)
    return float(out) if out.ndim == 0 else out


def _magnitude(zx, zy):
    return np.hypot(zx, zy)


# Pointwise fluxes g = dW/dz, as functions of the gradient components. Schemes add +div(g).

def _sinc_flux(params, zx, zy):
    scale = -params.beta ** 2 * params.beta1 * sinc_eval(params.beta * _magnitude(zx, zy))
    return scale * zx, scale * zy


def _classical_flux(params, zx, zy):
    r2 = zx * zx + zy * zy
    if params.classical_well == 'standard':
        scale = (r2 - 6.0) / 6.0
    else:
        scale = r2 - 1.0
    return scale * zx, scale * zy


def _square_flux(params, zx, zy):
    return -np.sin(zx), -np.sin(zy)


def _linear_flux(params, zx, zy):
    return np.zeros_like(zx), np.zeros_like(zy)


# Pointwise energy densities W(z)

def _sinc_density(params, zx, zy):
    return params.beta1 * np.cos(params.beta * _magnitude(zx, zy))


def _classical_density(params, zx, zy):
    r2 = zx * zx + zy * zy
    if params.classical_well == 'standard':
        return (r2 - 6.0) ** 2 / 24.0
    return 0.25 * (r2 - 1.0) ** 2


def _square_density(params, zx, zy):
    return np.cos(zx) + np.cos(zy)


def _linear_density(params, zx, zy):
    return np.zeros_like(zx)


def get_model(kind):
    '''
    Gets the pointwise flux and energy density functions of a model variant

    :param kind: ModelKind (or its string value)

    :return: A Tuple (flux function, energy density function), each called as fn(params, zx, zy)
    '''
    kind = ModelKind(kind)
    if kind == ModelKind.SINC:
        return _sinc_flux, _sinc_density
    elif kind == ModelKind.CLASSICAL:
        return _classical_flux, _classical_density
    elif kind == ModelKind.SQUARE:
        return _square_flux, _square_density
    return _linear_flux, _linear_density


def flux_pointwise(params, zx, zy):
    '''
    Flux evaluated on raw arrays (or floats) of gradient components
    '''
    flux_fn, _ = get_model(params.kind)
    return flux_fn(params, np.asarray(zx, dtype=np.float64), np.asarray(zy, dtype=np.float64))


def flux(params, grad):
    '''
    Nonlinear flux g(grad h) entering every scheme as +div(g)
    :param params: ModelParams
    :param grad: VectorField holding (h_x, h_y)
    :return: VectorField
    '''
    gx, gy = flux_pointwise(params, grad.vx.values, grad.vy.values)
    return VectorField(RealField(grad.grid, gx), RealField(grad.grid, gy))


def gradient(h):
    return VectorField(*spectral_gradient(h))


def energy_density(params, h):
    '''
    Pointwise nonlinear energy density W(grad h)
    :return: RealField
    '''
    _, density_fn = get_model(params.kind)
    hx, hy = spectral_gradient(h)
    return RealField(h.grid, density_fn(params, hx.values, hy.values))


def free_energy_density(params, h):
    '''
    Pointwise free energy F = 1/2 eta^2 |Laplacian h|^2 + W(grad h)
    :return: RealField
    '''
    lap = spectral_laplacian(h)
    return 0.5 * params.eta_sq * lap * lap + energy_density(params, h)


def total_energy(params, h):
    '''
    E(h) = 1/2 eta^2 ||Laplacian h||_2^2 + integral of W(grad h)
    :param params: ModelParams
    :param h: RealField
    :return: Float
    '''
    return 0.5 * params.eta_sq * norm_l2(spectral_laplacian(h)) ** 2 + integrate(energy_density(params, h))


def modified_energy_bdf2(params, h_curr, h_prev, tau, energy=None):
    '''
    Modified energy dissipated by the BDF2 scheme:
    E(h^n) + 1/(4 tau) ||h^n - h^{n-1}||^2 + 1/2 ||grad(h^n - h^{n-1})||^2

    :param params: ModelParams
    :param h_curr: RealField h^n
    :param h_prev: RealField h^{n-1}
    :param tau: Time step, > 0
    :param energy: Precomputed E(h^n), if available
    :return: Float
    '''
    if not tau > 0:
        raise ValueError('tau must be > 0, got {}'.format(tau))
    if energy is None:
        energy = total_energy(params, h_curr)
    dh = h_curr - h_prev
    dx, dy = spectral_gradient(dh)
    return energy + norm_l2(dh) ** 2 / (4.0 * tau) + 0.5 * (norm_l2(dx) ** 2 + norm_l2(dy) ** 2)


def variational_derivative(params, h):
    '''
    L2 variational derivative dE/dh = eta^2 Bilaplacian h - div g(grad h)
    :return: RealField
    '''
    g = flux(params, gradient(h))
    return params.eta_sq * spectral_bilaplacian(h) - spectral_divergence(g.vx, g.vy, truncate=False)


def hessian_quadratic_form(z, x):
    '''
    sum_ij x_i x_j d^2/dz_i dz_j cos|z|, by continuous extension -|x|^2 at z = 0
    :param z: Array of shape (..., 2)
    :param x: Array of shape (..., 2)
    :return: Float or array of shape (...)
    '''
    z = np.asarray(z, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    r = np.hypot(z[..., 0], z[..., 1])
    at_origin = r == 0.0
    safe_r = np.where(at_origin, 1.0, r)
    ux, uy = z[..., 0] / safe_r, z[..., 1] / safe_r
    parallel = x[..., 0] * ux + x[..., 1] * uy
    perpendicular = -x[..., 0] * uy + x[..., 1] * ux
    out = -np.cos(r) * parallel ** 2 - sinc_eval(r) * perpendicular ** 2
    out = np.where(at_origin, -(x[..., 0] ** 2 + x[..., 1] ** 2), out)
    return float(out) if out.ndim == 0 else out


def flux_jacobian_eigenvalues(s):
    '''
    Eigenvalues of the Jacobian of g(z) = -sinc(|z|) z at |z| = s
    :param s: Float or array, >= 0
    :return: Tuple (-cos s, -sinc s)
    '''
    if np.any(np.asarray(s) < 0):
        raise ValueError('s must be >= 0')
    return -np.cos(s), -sinc_eval(s)


def sinc_series_partial(s, n_terms):
    '''
    Partial sum 1 - sum_{i=1}^{n_terms} B_i s^{2i}, with B_i = (-1)^{i-1} / (2i+1)!
    :param s: Float or array
    :param n_terms: Integer >= 0
    :return: Float or array
    '''
    if n_terms < 0:
        raise ValueError('n_terms must be >= 0, got {}'.format(n_terms))
    s = np.asarray(s, dtype=np.float64)
    total = np.ones_like(s)
    s2 = s * s
    power = np.ones_like(s)
    for i in range(1, n_terms + 1):
        power = power * s2
        total = total - ((-1) ** (i - 1) / math.factorial(2 * i + 1)) * power
    return float(total) if total.ndim == 0 else total


def vacuum_energy(params):
    '''
    Energy of the flat state h = const
    '''
    _, density_fn = get_model(params.kind)
    return float(density_fn(params, np.zeros(1), np.zeros(1))[0]) * (2.0 * math.pi) ** 2
