'''
Fourier multipliers of the normalized second-order linear scheme
    (3u^{n+1} - 4u^n + u^{n-1}) / tau + Bilaplacian u^{n+1} = div f^n
on mean-zero fields. With T = (3 + tau Bilaplacian)^-1 the scheme reads u^{n+1} = 4T u^n - T u^{n-1} + tau T div f^n,
and 4T, T factor as T_plus + T_minus, T_plus * T_minus, which turns the recurrence into a contraction.
'''
import logging
import math
import numpy as np
from dataclasses import dataclass, field
from typing import List

from src.config import cfg
from src.spectral.core import GridSpec, wavenumbers, random_band_limited, norm_l2_spectral, forward_transform

VERIFY = cfg['VERIFY']
BOUND_TOL = cfg['NUMERICS']['BOUND_TOL']


@dataclass(frozen=True, eq=False)
class MultiplierSpec:
    '''
    Per-mode multipliers on the full FFT grid. The zero mode is excluded: its entries are 0 and mode_mask is False.
    '''
    tau: float
    grid: GridSpec
    t_hat: np.ndarray
    t_plus: np.ndarray
    t_minus: np.ndarray
    real_branch: np.ndarray
    mode_mask: np.ndarray
    theta0: float


def build_multipliers(tau, grid):
    '''
    T_hat(k) = 1/(3 + tau |k|^4) and the roots of lambda^2 - 4 T_hat lambda + T_hat = 0:
    T_pm = 2(T_hat +- sqrt(T_hat^2 - T_hat/4)) if T_hat >= 1/4, else 2(T_hat +- i sqrt(T_hat/4 - T_hat^2))

    :param tau: Time step, > 0
    :param grid: GridSpec
    :return: MultiplierSpec
    '''
    if not (tau > 0 and math.isfinite(tau)):
        raise ValueError('tau must be > 0, got {}'.format(tau))
    k = wavenumbers(grid)
    mode_mask = np.broadcast_to(k.ksq, grid.shape) > 0
    t_hat = np.where(mode_mask, 1.0 / (3.0 + tau * np.broadcast_to(k.kquad, grid.shape)), 0.0)
    disc = t_hat * t_hat - t_hat / 4.0
    real_branch = (t_hat >= 0.25) & mode_mask
    root = np.sqrt(np.abs(disc))
    offset = np.where(real_branch, root + 0j, 1j * root)
    t_plus = np.where(mode_mask, 2.0 * (t_hat + offset), 0.0)
    t_minus = np.where(mode_mask, 2.0 * (t_hat - offset), 0.0)
    theta0 = float(np.max(np.maximum(np.abs(t_plus), np.abs(t_minus))[mode_mask]))
    return MultiplierSpec(tau=float(tau), grid=grid, t_hat=t_hat, t_plus=t_plus, t_minus=t_minus,
                          real_branch=real_branch, mode_mask=mode_mask, theta0=theta0)


def bdf2_effective_tau(tau, eta_sq):
    '''
    The BDF2 scheme (3h^{n+1} - 4h^n + h^{n-1})/(2 tau) = -eta^2 Bilaplacian h^{n+1} + ... divided by eta^2/2 is the
    normalized scheme with step 2 tau eta^2 (and forcing scaled by 2/eta^2)
    '''
    if not tau > 0:
        raise ValueError('tau must be > 0, got {}'.format(tau))
    if not eta_sq > 0:
        raise ValueError('eta_sq must be > 0, got {}'.format(eta_sq))
    return 2.0 * tau * eta_sq


@dataclass(frozen=True)
class Theta0Report:
    taus: List[float]
    thetas: List[float]
    monotone: bool
    bound: float
    holds: bool


def certify_theta0_uniform(tau0=VERIFY['TAU0'], grid=None, n_taus=VERIFY['TAU0_GRID'], tau_max=1e3):
    '''
    Samples theta0(tau) on a log-spaced grid over [tau0, tau_max] and checks that it is nonincreasing and below 1,
    so theta0(tau0) bounds every sampled tau

    :param tau0: Smallest tau, > 0
    :param grid: GridSpec (default VERIFY.N squared)
    :param n_taus: Number of sampled taus, >= 2
    :return: Theta0Report
    '''
    if not 0 < tau0 < tau_max:
        raise ValueError('Need 0 < tau0 < tau_max, got tau0={} tau_max={}'.format(tau0, tau_max))
    if n_taus < 2:
        raise ValueError('n_taus must be >= 2, got {}'.format(n_taus))
    grid = grid if grid is not None else GridSpec.square(VERIFY['N'])
    taus = [float(t) for t in np.geomspace(tau0, tau_max, n_taus)]
    thetas = [build_multipliers(t, grid).theta0 for t in taus]
    monotone = all(b <= a * (1.0 + 1e-14) for a, b in zip(thetas, thetas[1:]))
    bound = max(thetas)
    return Theta0Report(taus=taus, thetas=thetas, monotone=monotone, bound=bound, holds=monotone and bound < 1.0)


@dataclass
class RecurrenceReport:
    '''
    w_n = u^{n+1} - T_minus u^n. contraction_ok: ||w_n|| <= theta0 ||w_{n-1}|| + a0 at every step.
    decay_ok (unforced runs only): ||w_n|| <= theta0^n ||w_0||. bound_ok: sup ||u^n|| below the telescoped bound.
    '''
    tau: float
    theta0: float
    a0: float
    n_steps: int
    w_norms: List[float] = field(default_factory=list)
    u_norms: List[float] = field(default_factory=list)
    contraction_ok: bool = True
    decay_ok: bool = True
    sup_norm: float = 0.0
    sup_bound: float = math.inf
    bound_ok: bool = True

    @property
    def holds(self):
        return self.contraction_ok and self.decay_ok and self.bound_ok


def _random_forcing_coeffs(grid, rng, a0):
    '''
    Fourier coefficients of div f for a random vector field f with ||f||_2 = a0
    '''
    k = wavenumbers(grid)
    fx = forward_transform(random_band_limited(grid, rng)).coeffs
    fy = forward_transform(random_band_limited(grid, rng)).coeffs
    norm = math.hypot(norm_l2_spectral(fx), norm_l2_spectral(fy))
    scale = a0 / norm if norm > 0 else 0.0
    return scale * (1j * k.kx_odd * fx + 1j * k.ky_odd * fy)


def _random_mean_zero_coeffs(grid, rng):
    c = forward_transform(random_band_limited(grid, rng)).coeffs
    c[0, 0] = 0.0
    return c


def verify_recurrence_contraction(tau, grid, n_steps=VERIFY['RECURRENCE_STEPS'], seed=VERIFY['SEED'],
                                  a0=VERIFY['FORCING_A0'], zero_init=False):
    '''
    Iterates u^{n+1} = 4T u^n - T u^{n-1} + tau T div f^n in Fourier space from random mean-zero u^0, u^1 and checks
    the contraction of w_n = u^{n+1} - T_minus u^n. Norms are Parseval norms (w_n is complex valued).

    :param tau: Time step of the normalized scheme, > 0
    :param grid: GridSpec
    :param n_steps: Number of iterations, >= 1
    :param seed: Seed for the data and forcing
    :param a0: Forcing size ||f^n||_2 (0 disables the forcing)
    :param zero_init: Start from u^0 = u^1 = 0
    :return: RecurrenceReport
    '''
    if n_steps < 1:
        raise ValueError('n_steps must be >= 1, got {}'.format(n_steps))
    if a0 < 0:
        raise ValueError('a0 must be >= 0, got {}'.format(a0))
    mult = build_multipliers(tau, grid)
    theta0 = mult.theta0
    rng = np.random.default_rng(seed)
    if zero_init:
        u_prev = np.zeros(grid.shape, dtype=np.complex128)
        u_curr = np.zeros(grid.shape, dtype=np.complex128)
    else:
        u_prev = _random_mean_zero_coeffs(grid, rng)
        u_curr = _random_mean_zero_coeffs(grid, rng)

    report = RecurrenceReport(tau=float(tau), theta0=theta0, a0=float(a0), n_steps=n_steps)
    w0 = norm_l2_spectral(u_curr - mult.t_minus * u_prev)
    u0 = norm_l2_spectral(u_prev)
    report.w_norms.append(w0)
    report.u_norms.extend([u0, norm_l2_spectral(u_curr)])
    # the bound is finite only when theta0 < 1
    report.sup_bound = (w0 + a0 / (1.0 - theta0)) / (1.0 - theta0) + u0 if theta0 < 1.0 else math.inf

    for n in range(1, n_steps + 1):
        forcing = _random_forcing_coeffs(grid, rng, a0) if a0 > 0 else 0.0
        u_next = 4.0 * mult.t_hat * u_curr - mult.t_hat * u_prev + tau * mult.t_hat * forcing
        w = norm_l2_spectral(u_next - mult.t_minus * u_curr)
        slack = BOUND_TOL * (norm_l2_spectral(u_next) + norm_l2_spectral(u_curr))
        if w > theta0 * report.w_norms[-1] + a0 + slack:
            if report.contraction_ok:
                logging.warning('Contraction fails at step {}: {:.6e} > {:.6e}'.format(
                    n, w, theta0 * report.w_norms[-1] + a0))
            report.contraction_ok = False
        if a0 == 0 and w > theta0 ** n * w0 * (1.0 + 1e-9) + slack:
            report.decay_ok = False
        report.w_norms.append(w)
        report.u_norms.append(norm_l2_spectral(u_next))
        u_prev, u_curr = u_curr, u_next

    report.sup_norm = max(report.u_norms)
    report.bound_ok = report.sup_norm <= report.sup_bound * (1.0 + 1e-9) + 1e-300
    return report
