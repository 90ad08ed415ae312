'''
First-order IMEX and second-order BDF2 time steppers. Each step is one diagonal spectral solve;
the nonlinearity is evaluated pseudo-spectrally (pointwise flux, spectral divergence).
'''
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from src.config import cfg
from src.models.models import flux, gradient
from src.spectral.core import RealField, spectral_bilaplacian, spectral_divergence, solve_shifted_biharmonic

RUN_DEFAULTS = cfg['RUN_DEFAULTS']


class SchemeKind(Enum):
    IMEX1 = 'imex'
    BDF2 = 'bdf2'


@dataclass(frozen=True)
class SchemeConfig:
    '''
    :param scheme: SchemeKind
    :param tau: Time step, > 0
    :param t_final: Final time, > 0; the run takes round(t_final / tau) steps
    :param snapshot_every: Emit a field snapshot every this many steps (0 = never)
    :param record_every: Emit an EnergyRecord every this many steps
    :param blowup_factor: Declare blowup when |E_n| > factor * max(|E_0|, 1); None disables the energy test
    :param blowup_fatal: Treat a blowup as a failed run (CLI exit code 3)
    '''
    scheme: SchemeKind
    tau: float
    t_final: float
    snapshot_every: int = RUN_DEFAULTS['SNAPSHOT_EVERY']
    record_every: int = RUN_DEFAULTS['RECORD_EVERY']
    blowup_factor: Optional[float] = RUN_DEFAULTS['BLOWUP_FACTOR']
    blowup_fatal: bool = RUN_DEFAULTS['BLOWUP_FATAL']

    def __post_init__(self):
        if not isinstance(self.scheme, SchemeKind):
            object.__setattr__(self, 'scheme', SchemeKind(self.scheme))
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError('tau must be > 0, got {}'.format(self.tau))
        if not (self.t_final > 0 and math.isfinite(self.t_final)):
            raise ValueError('t_final must be > 0, got {}'.format(self.t_final))
        if int(self.snapshot_every) != self.snapshot_every or self.snapshot_every < 0:
            raise ValueError('snapshot_every must be an integer >= 0, got {}'.format(self.snapshot_every))
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError('record_every must be an integer >= 1, got {}'.format(self.record_every))
        if self.blowup_factor is not None and not self.blowup_factor > 0:
            raise ValueError('blowup_factor must be > 0, got {}'.format(self.blowup_factor))
        if self.n_steps < 1:
            raise ValueError('t_final / tau rounds to zero steps (t_final={}, tau={})'.format(self.t_final,
                                                                                               self.tau))

    @property
    def n_steps(self):
        return int(round(self.t_final / self.tau))

    @property
    def final_time(self):
        return self.n_steps * self.tau


@dataclass
class SimState:
    '''
    Rolling state of a run: h^n, h^{n-1} (None before the bootstrap step), step n and time n*tau
    '''
    h_curr: RealField
    h_prev: Optional[RealField] = None
    step: int = 0
    time: float = 0.0


def explicit_term(params, h):
    '''
    div g(grad h), the explicit part of every scheme
    :param params: ModelParams
    :param h: RealField
    :return: RealField with zero mean
    '''
    g = flux(params, gradient(h))
    return spectral_divergence(g.vx, g.vy)


def imex_step(params, tau, h_n, div_n=None):
    '''
    (h^{n+1} - h^n)/tau = -eta^2 Bilaplacian h^{n+1} + div g(grad h^n)

    :param params: ModelParams
    :param tau: Time step, > 0
    :param h_n: RealField h^n
    :param div_n: Precomputed explicit_term(params, h_n), if available
    :return: RealField h^{n+1}
    '''
    if not tau > 0:
        raise ValueError('tau must be > 0, got {}'.format(tau))
    if div_n is None:
        div_n = explicit_term(params, h_n)
    # (1 + tau eta^2 Bilaplacian) h^{n+1} = h^n + tau div g^n keeps the mean mode exact
    return solve_shifted_biharmonic(h_n + tau * div_n, 1.0, tau * params.eta_sq)


def bdf2_step(params, tau, h_n, h_nm1, div_n=None, div_nm1=None):
    '''
    (3h^{n+1} - 4h^n + h^{n-1})/(2 tau) = -eta^2 Bilaplacian h^{n+1} + 2 div g(grad h^n) - div g(grad h^{n-1})

    :param params: ModelParams
    :param tau: Time step, > 0
    :param h_n: RealField h^n
    :param h_nm1: RealField h^{n-1}
    :param div_n: Precomputed explicit_term(params, h_n), if available
    :param div_nm1: Precomputed explicit_term(params, h_nm1), if available
    :return: RealField h^{n+1}
    '''
    if not tau > 0:
        raise ValueError('tau must be > 0, got {}'.format(tau))
    if h_nm1 is None:
        raise ValueError('bdf2_step needs h^(n-1); bootstrap the first step with imex_step')
    if div_n is None:
        div_n = explicit_term(params, h_n)
    if div_nm1 is None:
        div_nm1 = explicit_term(params, h_nm1)
    # solved for the increment d = h^{n+1} - h^n, so constant states are fixed points bit for bit:
    # (3 + 2 tau eta^2 Bilaplacian) d = (h^n - h^{n-1}) - 2 tau eta^2 Bilaplacian h^n + 2 tau (2 div g^n - div g^{n-1})
    two_tau = 2.0 * tau
    rhs = (h_n - h_nm1) - (two_tau * params.eta_sq) * spectral_bilaplacian(h_n) + two_tau * (2.0 * div_n - div_nm1)
    return h_n + solve_shifted_biharmonic(rhs, 3.0, two_tau * params.eta_sq)


def bootstrap_first_step(params, tau, h0):
    '''
    h^1 for BDF2, computed with the first-order IMEX scheme (preserves the mean exactly)
    '''
    return imex_step(params, tau, h0)
