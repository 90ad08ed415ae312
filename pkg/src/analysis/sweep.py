'''
Critical time-step search: the largest tau for which the discrete energy never increases by Tol or more over [0, T]
'''
import logging
import math
import pandas as pd
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import List, Optional, Tuple
from tqdm import tqdm

from src.analysis.diagnostics import check_dissipation, modified_energy_records
from src.config import cfg
from src.custom.metrics import DissipationReport
from src.schemes.simulation import DissipationStopper, run_simulation
from src.schemes.steppers import SchemeConfig, SchemeKind

TOL = cfg['NUMERICS']['TOL']


@dataclass
class SweepResult:
    '''
    Bracket tau_lo < tau_c < tau_hi. tau_lo is None when the smallest tested tau already fails, tau_hi is None when
    every tested tau holds; such open brackets are reported as they are.
    '''
    tau_lo: Optional[float]
    tau_hi: Optional[float]
    trace: List[Tuple[float, DissipationReport]] = field(default_factory=list)

    @property
    def is_closed(self):
        return self.tau_lo is not None and self.tau_hi is not None

    def describe(self):
        if self.is_closed:
            return '{:g} < tau_c < {:g}'.format(self.tau_lo, self.tau_hi)
        if self.tau_hi is None:
            return 'tau_c >= {:g} (no tested tau failed)'.format(self.tau_lo)
        return 'tau_c < {:g} (every tested tau failed)'.format(self.tau_hi)

    def trace_frame(self):
        '''
        The probe trace as a DataFrame, one row per probe in the order they were decided
        '''
        rows = []
        for tau, report in self.trace:
            rows.append([tau, report.holds, report.first_violation_step, report.max_increase, report.tol])
        return pd.DataFrame(rows, columns=['tau', 'holds', 'first_violation_step', 'max_increase', 'tol'])


def probe_tau(job):
    '''
    Runs one full simulation at a given tau and checks dissipation on every step. Module-level so that it can be
    dispatched to worker processes.

    :param job: Tuple (params, scheme, h0, t_final, tau, use_modified, tol)
    :return: Tuple (tau, DissipationReport)
    '''
    params, scheme, h0, t_final, tau, use_modified, tol = job
    if use_modified and SchemeKind(scheme) != SchemeKind.BDF2:
        raise ValueError('The modified energy is only recorded by the bdf2 scheme, got {}'.format(
            SchemeKind(scheme).value))
    config = SchemeConfig(scheme=scheme, tau=tau, t_final=t_final, snapshot_every=0, record_every=1)
    result = run_simulation(params, config, h0, sink=DissipationStopper(use_modified=use_modified, tol=tol))
    records = modified_energy_records(result.records) if use_modified else result.records
    if len(records) < 2:
        report = DissipationReport(holds=not result.blowup, first_violation_step=result.blowup_step,
                                   max_increase=math.inf if result.blowup else -math.inf, tol=tol)
    else:
        report = check_dissipation(records, use_modified=use_modified, tol=tol)
    if result.blowup and report.holds:
        report = DissipationReport(holds=False, first_violation_step=result.blowup_step, max_increase=math.inf,
                                   tol=tol)
    logging.info('tau={:g}: holds={} first_violation={}'.format(tau, report.holds, report.first_violation_step))
    return tau, report


def _run_probes(jobs, n_workers, progress):
    if n_workers > 1 and len(jobs) > 1:
        with Pool(min(n_workers, len(jobs))) as pool:
            return list(tqdm(pool.imap(probe_tau, jobs), total=len(jobs), disable=not progress, desc='sweep'))
    return [probe_tau(job) for job in tqdm(jobs, disable=not progress, desc='sweep')]


def find_tau_c(params, scheme, grid, h0, t_final, tau_list, refine_iters=cfg['SWEEP']['REFINE_ITERS'],
               use_modified=cfg['SWEEP']['USE_MODIFIED'], tol=TOL, n_workers=cfg['SWEEP']['N_WORKERS'],
               rel_width=cfg['SWEEP']['REL_WIDTH'], progress=False):
    '''
    Brackets the critical time step by simulate-and-test. The coarse bracket comes from tau_list (probes may run
    concurrently); it is then bisected refine_iters times, stopping early once the width drops below
    rel_width * tau_lo. Every probe uses the same h0 and t_final.

    :param params: ModelParams
    :param scheme: SchemeKind
    :param grid: GridSpec of h0
    :param h0: RealField initial datum
    :param t_final: Final time T of every probe
    :param tau_list: Strictly increasing list of positive time steps
    :param refine_iters: Number of bisection steps, >= 0
    :param use_modified: Test the BDF2 modified energy instead of the energy
    :param tol: Dissipation tolerance
    :param n_workers: Number of worker processes for the coarse probes
    :param rel_width: Relative bracket width at which refinement stops
    :param progress: Show progress bars
    :return: SweepResult
    '''
    scheme = SchemeKind(scheme)
    tau_list = [float(t) for t in tau_list]
    if not tau_list:
        raise ValueError('tau_list must not be empty')
    if any(t <= 0 for t in tau_list) or any(b <= a for a, b in zip(tau_list, tau_list[1:])):
        raise ValueError('tau_list must be positive and strictly increasing, got {}'.format(tau_list))
    if refine_iters < 0:
        raise ValueError('refine_iters must be >= 0, got {}'.format(refine_iters))
    if use_modified and scheme != SchemeKind.BDF2:
        raise ValueError('use_modified needs the bdf2 scheme: {} runs record no modified energy'.format(
            scheme.value))
    if h0.grid != grid:
        raise ValueError('h0 lives on {}, expected {}'.format(h0.grid, grid))

    jobs = [(params, scheme, h0, t_final, tau, use_modified, tol) for tau in tau_list]
    trace = _run_probes(jobs, n_workers, progress)

    failing = [i for i, (_, report) in enumerate(trace) if not report.holds]
    if not failing:
        return SweepResult(tau_lo=tau_list[-1], tau_hi=None, trace=trace)
    first = failing[0]
    if any(report.holds for _, report in trace[first + 1:]):
        logging.warning('Dissipation is not monotone in tau: some tau above {:g} hold again'.format(tau_list[first]))
    if first == 0:
        return SweepResult(tau_lo=None, tau_hi=tau_list[0], trace=trace)

    lo, hi = tau_list[first - 1], tau_list[first]
    for _ in range(refine_iters):
        if hi - lo < rel_width * lo:
            break
        mid = 0.5 * (lo + hi)
        tau, report = probe_tau((params, scheme, h0, t_final, mid, use_modified, tol))
        trace.append((tau, report))
        if report.holds:
            lo = mid
        else:
            hi = mid
    return SweepResult(tau_lo=lo, tau_hi=hi, trace=trace)
