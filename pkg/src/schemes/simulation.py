'''
Run orchestration: initial data, the time loop, diagnostics records, snapshots and blowup detection
'''
import logging
import math
import numpy as np
from dataclasses import dataclass, field
from typing import List, Optional
from tqdm import tqdm

from src.config import cfg
from src.custom.metrics import EnergyRecord, EnergyDissipation, MeanDrift
from src.models.models import energy_density, modified_energy_bdf2
from src.schemes.steppers import SchemeKind, SimState, explicit_term, imex_step, bdf2_step
from src.spectral.core import RealField, FieldError, spectral_laplacian, integrate, norm_l2, AREA


class DiagnosticsSink(object):
    '''
    Receives diagnostics from run_simulation on the run's own thread. Subclasses override the hooks they need and
    may set stop_requested to end the run after the current record.
    '''

    stop_requested = False

    def on_record(self, record, state):
        pass

    def on_snapshot(self, state):
        pass

    def on_blowup(self, step, reason):
        pass


class CollectingSink(DiagnosticsSink):
    '''
    Keeps every snapshot in memory (small grids and tests)
    '''

    def __init__(self):
        self.snapshots = []

    def on_snapshot(self, state):
        self.snapshots.append((state.step, state.time, state.h_curr.copy()))


class DissipationStopper(DiagnosticsSink):
    '''
    Stops a run at the first recorded energy increase >= tol, like early stopping on a monitored quantity
    :param use_modified: Monitor the BDF2 modified energy instead of the energy
    :param tol: Violation threshold
    '''

    def __init__(self, use_modified=False, tol=cfg['NUMERICS']['TOL']):
        self.use_modified = use_modified
        self.metric = EnergyDissipation(tol=tol)

    def on_record(self, record, state):
        value = record.modified_energy if self.use_modified else record.energy
        if value is None:
            return
        if self.metric.update_state(record.step, value):
            self.stop_requested = True


@dataclass
class SimResult:
    '''
    Outcome of run_simulation. state is the last finite state; when blowup is True, blowup_step is the step at
    which non-finite values (or runaway energy) first appeared and blowup_reason is 'non-finite' or 'energy'.
    '''
    state: SimState
    records: List[EnergyRecord]
    n_steps: int
    final_time: float
    blowup: bool = False
    blowup_step: Optional[int] = None
    blowup_reason: Optional[str] = None
    stopped_early: bool = False
    first_step_ratio: Optional[float] = None
    initial_mass: float = field(default=math.nan)


def initial_condition_trig(grid):
    '''
    h0(x, y) = 0.1 (sin(3x) sin(2y) + sin(5x) sin(5y))
    :param grid: GridSpec
    :return: RealField
    '''
    x, y = grid.coordinates()
    return RealField(grid, 0.1 * (np.sin(3 * x) * np.sin(2 * y) + np.sin(5 * x) * np.sin(5 * y)))


def initial_condition_random(grid, amplitude=cfg['RUN_DEFAULTS']['AMPLITUDE'], seed=cfg['RUN_DEFAULTS']['SEED']):
    '''
    I.i.d. uniform values in [-amplitude, amplitude] at every grid point (no mean subtraction)
    :param grid: GridSpec
    :param amplitude: Half-width of the distribution, > 0
    :param seed: Seed of the 64-bit PCG generator
    :return: RealField
    '''
    if not amplitude > 0:
        raise ValueError('amplitude must be > 0, got {}'.format(amplitude))
    rng = np.random.default_rng(seed)
    return RealField(grid, rng.uniform(-amplitude, amplitude, size=grid.shape))


def make_record(params, tau, state, first_step_ratio=None, scheme=SchemeKind.IMEX1):
    '''
    Diagnostics of the current state
    :param params: ModelParams
    :param tau: Time step
    :param state: SimState
    :param first_step_ratio: (1/tau)||h^1 - h^0||^2, attached to the step-1 record
    :param scheme: SchemeKind; the modified energy is only reported for BDF2 once h^{n-1} exists
    :return: EnergyRecord
    '''
    h = state.h_curr
    lap = spectral_laplacian(h)
    h2 = norm_l2(lap)
    energy = 0.5 * params.eta_sq * h2 ** 2 + integrate(energy_density(params, h))
    modified = None
    if scheme == SchemeKind.BDF2 and state.h_prev is not None:
        modified = modified_energy_bdf2(params, h, state.h_prev, tau, energy=energy)
    return EnergyRecord(step=state.step, time=state.time, energy=energy, modified_energy=modified,
                        mass=integrate(h), l2_norm=norm_l2(h), h2_seminorm=h2, first_step_ratio=first_step_ratio)


def run_simulation(params, config, h0, sink=None, progress=False):
    '''
    Advances h0 by config.n_steps steps of the configured scheme (BDF2 is bootstrapped with one IMEX step)

    :param params: ModelParams
    :param config: SchemeConfig
    :param h0: Finite RealField
    :param sink: DiagnosticsSink receiving records and snapshots
    :param progress: Show a tqdm progress bar
    :return: SimResult
    '''
    if not h0.is_finite():
        raise FieldError('Initial datum contains non-finite values')
    sink = sink if sink is not None else DiagnosticsSink()
    tau = config.tau
    n_steps = config.n_steps
    scheme = config.scheme

    state = SimState(h_curr=h0.copy(), h_prev=None, step=0, time=0.0)
    result = SimResult(state=state, records=[], n_steps=n_steps, final_time=config.final_time,
                       initial_mass=integrate(h0))

    first = make_record(params, tau, state, scheme=scheme)
    result.records.append(first)
    sink.on_record(first, state)
    energy_cap = None
    if config.blowup_factor is not None:
        energy_cap = config.blowup_factor * max(abs(first.energy), 1.0)
    if config.snapshot_every > 0:
        sink.on_snapshot(state)

    div_curr = explicit_term(params, state.h_curr)
    div_prev = None
    for n in tqdm(range(1, n_steps + 1), disable=not progress, desc='{} tau={}'.format(scheme.value, tau)):
        if scheme == SchemeKind.BDF2 and state.h_prev is not None:
            h_next = bdf2_step(params, tau, state.h_curr, state.h_prev, div_n=div_curr, div_nm1=div_prev)
        else:
            h_next = imex_step(params, tau, state.h_curr, div_n=div_curr)

        if not h_next.is_finite():
            _flag_blowup(result, sink, n, 'non-finite')
            break

        ratio = None
        if n == 1:
            ratio = norm_l2(h_next - state.h_curr) ** 2 / tau
            result.first_step_ratio = ratio
        state = SimState(h_curr=h_next, h_prev=state.h_curr, step=n, time=n * tau)
        result.state = state

        if n % config.record_every == 0 or n == n_steps:
            record = make_record(params, tau, state, first_step_ratio=ratio, scheme=scheme)
            if not math.isfinite(record.energy):
                _flag_blowup(result, sink, n, 'non-finite')
                break
            result.records.append(record)
            sink.on_record(record, state)
            if energy_cap is not None and abs(record.energy) > energy_cap:
                _flag_blowup(result, sink, n, 'energy')
                break
            if sink.stop_requested:
                result.stopped_early = n < n_steps
                break

        if config.snapshot_every > 0 and n % config.snapshot_every == 0:
            sink.on_snapshot(state)

        div_prev = div_curr
        div_curr = explicit_term(params, state.h_curr)

    if result.blowup:
        logging.warning('Blowup ({}) at step {} of {}'.format(result.blowup_reason, result.blowup_step, n_steps))
    return result


def _flag_blowup(result, sink, step, reason):
    result.blowup = True
    result.blowup_step = step
    result.blowup_reason = reason
    sink.on_blowup(step, reason)


def mean_drift(result):
    '''
    Largest |mean(h^n) - mean(h^0)| / max(1, |mean(h^0)|) over the recorded steps
    '''
    metric = MeanDrift()
    metric.update_state(result.initial_mass / AREA)
    for record in result.records:
        metric.update_state(record.mass / AREA)
    return metric.result()
