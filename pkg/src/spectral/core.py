'''
Discrete Fourier machinery on the periodic torus [-pi, pi]^2: grids, fields, spectral derivatives,
diagonal implicit solves and quadrature
'''
import math
import numpy as np
import scipy.fft as fft
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple, Union

from src.config import cfg

TWO_PI = 2.0 * math.pi
AREA = TWO_PI ** 2
FFT_WORKERS = cfg['NUMERICS']['FFT_WORKERS']


class FieldError(ValueError):
    '''
    Raised for non-finite fields, Hermitian symmetry violations and grid mismatches
    '''


@dataclass(frozen=True)
class GridSpec:
    '''
    Uniform nx-by-ny discretization of the torus. Point (i, j) sits at x = -pi + i*dx, y = -pi + j*dy.
    :param nx: Number of Fourier modes (grid points) in x, even and >= 4
    :param ny: Number of Fourier modes (grid points) in y, even and >= 4
    :param dealias: Apply 2/3-rule truncation to the explicit nonlinear term
    '''
    nx: int
    ny: int
    dealias: bool = False

    def __post_init__(self):
        for name, n in (('nx', self.nx), ('ny', self.ny)):
            if int(n) != n or n < 4 or n % 2 != 0:
                raise FieldError('{} must be an even integer >= 4, got {}'.format(name, n))

    @classmethod
    def square(cls, n, dealias=False):
        return cls(n, n, dealias)

    @property
    def length_x(self):
        return TWO_PI

    @property
    def length_y(self):
        return TWO_PI

    @property
    def dx(self):
        return TWO_PI / self.nx

    @property
    def dy(self):
        return TWO_PI / self.ny

    @property
    def shape(self):
        return self.nx, self.ny

    def coordinates(self):
        '''
        Physical coordinates of the grid points
        :return: Tuple (X, Y) of arrays with shape (nx, ny), 'ij' indexing
        '''
        x = -math.pi + self.dx * np.arange(self.nx)
        y = -math.pi + self.dy * np.arange(self.ny)
        return np.meshgrid(x, y, indexing='ij')


@dataclass(frozen=True)
class WaveNumbers:
    '''
    Tabulated symbols of the spectral operators, in FFT ordering.
    kx_odd / ky_odd are the first-derivative symbols with the Nyquist mode removed.
    '''
    kx: np.ndarray
    ky: np.ndarray
    kx_odd: np.ndarray
    ky_odd: np.ndarray
    ksq: np.ndarray
    kquad: np.ndarray
    dealias_mask: np.ndarray


@lru_cache(maxsize=16)
def wavenumbers(grid):
    '''
    Builds (and caches) the wavenumber tables for a grid
    :param grid: GridSpec
    :return: WaveNumbers
    '''
    kx = (np.fft.fftfreq(grid.nx) * grid.nx).reshape(-1, 1)
    ky = (np.fft.fftfreq(grid.ny) * grid.ny).reshape(1, -1)
    kx_odd = np.where(kx == -grid.nx // 2, 0.0, kx)
    ky_odd = np.where(ky == -grid.ny // 2, 0.0, ky)
    ksq = kx ** 2 + ky ** 2
    kquad = ksq ** 2
    mask = (np.abs(kx) <= grid.nx // 3) & (np.abs(ky) <= grid.ny // 3)
    for arr in (kx, ky, kx_odd, ky_odd, ksq, kquad, mask):
        arr.setflags(write=False)
    return WaveNumbers(kx, ky, kx_odd, ky_odd, ksq, kquad, mask)


@dataclass(frozen=True, eq=False)
class RealField:
    '''
    Scalar field sampled on the grid; values[i, j] is the value at (x_i, y_j)
    '''
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise FieldError('Field shape {} does not match grid {}'.format(values.shape, self.grid.shape))
        object.__setattr__(self, 'values', values)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def constant(cls, grid, c):
        return cls(grid, np.full(grid.shape, float(c)))

    def is_finite(self):
        return bool(np.isfinite(self.values).all())

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def copy(self):
        return RealField(self.grid, self.values.copy())

    def _operand(self, other):
        if isinstance(other, RealField):
            if other.grid != self.grid:
                raise FieldError('Grid mismatch: {} vs {}'.format(self.grid, other.grid))
            return other.values
        return other

    def __add__(self, other):
        return RealField(self.grid, self.values + self._operand(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RealField(self.grid, self.values - self._operand(other))

    def __rsub__(self, other):
        return RealField(self.grid, self._operand(other) - self.values)

    def __mul__(self, other):
        return RealField(self.grid, self.values * self._operand(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return RealField(self.grid, self.values / self._operand(other))

    def __neg__(self):
        return RealField(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class SpectralField:
    '''
    Fourier coefficients in FFT ordering, normalized so that coeffs[0, 0] is the mean of the field
    '''
    grid: GridSpec
    coeffs: np.ndarray

    def coeff(self, k1, k2):
        '''
        Coefficient of the integer wavenumber (k1, k2), k1 in [-nx/2, nx/2), k2 in [-ny/2, ny/2)
        '''
        if not (-self.grid.nx // 2 <= k1 < self.grid.nx // 2 and -self.grid.ny // 2 <= k2 < self.grid.ny // 2):
            raise IndexError('Wavenumber ({}, {}) not resolved on {}'.format(k1, k2, self.grid))
        return self.coeffs[k1 % self.grid.nx, k2 % self.grid.ny]


def _fft(values):
    return fft.fft2(values, norm='forward', workers=FFT_WORKERS)


def _ifft(coeffs):
    return fft.ifft2(coeffs, norm='forward', workers=FFT_WORKERS).real


def hermitian_defect(coeffs):
    '''
    Largest deviation from coeffs(-k) = conj(coeffs(k))
    :param coeffs: Complex array in FFT ordering
    :return: Float
    '''
    reflected = np.roll(np.flip(coeffs, axis=(0, 1)), 1, axis=(0, 1))
    return float(np.max(np.abs(coeffs - np.conj(reflected))))


def forward_transform(f):
    '''
    Transforms a physical field to its Fourier coefficients
    :param f: Finite RealField
    :return: SpectralField with coeffs(0, 0) = mean(f)
    '''
    if not f.is_finite():
        raise FieldError('Cannot transform a field with non-finite values ({} of {} entries)'
                         .format(int(np.count_nonzero(~np.isfinite(f.values))), f.values.size))
    return SpectralField(f.grid, _fft(f.values))


def inverse_transform(F, tol=cfg['NUMERICS']['SYMMETRY_TOL']):
    '''
    Transforms Hermitian-symmetric Fourier coefficients back to a real physical field
    :param F: SpectralField
    :param tol: Allowed symmetry defect, relative to max(1, max |coeffs|)
    :return: RealField
    '''
    scale = max(1.0, float(np.max(np.abs(F.coeffs))))
    defect = hermitian_defect(F.coeffs)
    if defect > tol * scale:
        raise FieldError('Coefficients are not Hermitian symmetric (defect {:.3e})'.format(defect))
    return RealField(F.grid, _ifft(F.coeffs))


def dealias(coeffs, grid):
    '''
    2/3-rule truncation of a coefficient array
    '''
    return coeffs * wavenumbers(grid).dealias_mask


def spectral_gradient(h):
    '''
    Spectral gradient (h_x, h_y), exact for trigonometric polynomials resolved by the grid
    :param h: RealField
    :return: Tuple of RealFields (h_x, h_y)
    '''
    k = wavenumbers(h.grid)
    c = _fft(h.values)
    return RealField(h.grid, _ifft(1j * k.kx_odd * c)), RealField(h.grid, _ifft(1j * k.ky_odd * c))


def spectral_divergence(vx, vy, truncate=None):
    '''
    Spectral divergence d(vx)/dx + d(vy)/dy. The zero mode of the result is set to 0.
    :param vx: RealField
    :param vy: RealField on the same grid
    :param truncate: Apply 2/3-rule dealiasing; defaults to the grid's setting
    :return: RealField with zero mean
    '''
    if vx.grid != vy.grid:
        raise FieldError('Grid mismatch: {} vs {}'.format(vx.grid, vy.grid))
    grid = vx.grid
    k = wavenumbers(grid)
    c = 1j * k.kx_odd * _fft(vx.values) + 1j * k.ky_odd * _fft(vy.values)
    c[0, 0] = 0.0
    if grid.dealias if truncate is None else truncate:
        c = dealias(c, grid)
    return RealField(grid, _ifft(c))


def spectral_laplacian(h):
    '''
    Laplacian via the symbol -|k|^2
    '''
    return RealField(h.grid, _ifft(-wavenumbers(h.grid).ksq * _fft(h.values)))


def spectral_bilaplacian(h):
    '''
    Bi-Laplacian via the symbol |k|^4
    '''
    return RealField(h.grid, _ifft(wavenumbers(h.grid).kquad * _fft(h.values)))


def solve_shifted_biharmonic(rhs, a, b):
    '''
    Solves (a + b*Bilaplacian) u = rhs diagonally in Fourier space
    :param rhs: RealField
    :param a: Shift, must be > 0
    :param b: Bi-Laplacian coefficient, must be >= 0
    :return: RealField u, with mean(u) = mean(rhs) / a
    '''
    if not a > 0:
        raise ValueError('Shift a must be > 0, got {}'.format(a))
    if not b >= 0:
        raise ValueError('Coefficient b must be >= 0, got {}'.format(b))
    symbol = a + b * wavenumbers(rhs.grid).kquad
    return RealField(rhs.grid, _ifft(_fft(rhs.values) / symbol))


def integrate(f):
    '''
    Rectangle-rule integral over the torus (spectrally accurate for smooth periodic integrands)
    :param f: RealField
    :return: Float
    '''
    return float(np.sum(f.values)) * f.grid.dx * f.grid.dy


def norm_l2(f):
    return math.sqrt(integrate(f * f))


def seminorm_h2(f):
    '''
    ||Laplacian f||_2
    '''
    return norm_l2(spectral_laplacian(f))


def mean(f):
    return integrate(f) / AREA


def norm_l2_spectral(coeffs):
    '''
    L2 norm from Fourier coefficients via Parseval; valid for complex-valued fields as well
    :param coeffs: Complex array normalized like forward_transform
    :return: Float
    '''
    return math.sqrt(AREA * float(np.sum(np.abs(coeffs) ** 2)))


def random_band_limited(grid, rng, k_max=None, amplitude=1.0):
    '''
    Random real field with Fourier content restricted to |k1|, |k2| <= k_max (default nx/4, ny/4)
    :param grid: GridSpec
    :param rng: numpy Generator
    :param k_max: Cut-off wavenumber
    :param amplitude: Scale of the physical values
    :return: RealField
    '''
    k = wavenumbers(grid)
    if k_max is None:
        k_max = min(grid.nx, grid.ny) // 4
    white = rng.standard_normal(grid.shape)
    c = _fft(white) * ((np.abs(k.kx) <= k_max) & (np.abs(k.ky) <= k_max))
    values = _ifft(c)
    return RealField(grid, amplitude * values / max(np.max(np.abs(values)), 1e-300))
