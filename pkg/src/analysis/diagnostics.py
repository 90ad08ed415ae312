'''
Energy bookkeeping over finished runs: dissipation checks and boundedness monitoring
'''
import math
import numpy as np

from src.config import cfg
from src.custom.metrics import EnergyDissipation, BoundednessSummary, least_squares_slope, records_to_columns

TOL = cfg['NUMERICS']['TOL']


def check_dissipation(records, use_modified=False, tol=TOL):
    '''
    Scans consecutive records for an increase E_n - E_{n-1} >= tol

    :param records: List of EnergyRecord in step order, at least 2
    :param use_modified: Scan the BDF2 modified energy instead of the energy
    :param tol: Violation threshold
    :return: DissipationReport
    '''
    if len(records) < 2:
        raise ValueError('check_dissipation needs at least 2 records, got {}'.format(len(records)))
    if use_modified:
        missing = [r.step for r in records if r.modified_energy is None]
        if missing:
            raise ValueError('Records at steps {} carry no modified energy'.format(missing[:5]))
    metric = EnergyDissipation(tol=tol)
    last_step = None
    for r in records:
        if last_step is not None and r.step <= last_step:
            raise ValueError('Record steps must be strictly increasing ({} after {})'.format(r.step, last_step))
        last_step = r.step
        metric.update_state(r.step, r.modified_energy if use_modified else r.energy)
    return metric.result()


def modified_energy_records(records):
    '''
    The records of a BDF2 run that carry a modified energy (every step n >= 1)
    '''
    return [r for r in records if r.modified_energy is not None]


def boundedness_monitor(records):
    '''
    Suprema of ||h^n||_2 and ||Laplacian h^n||_2 and the trend of ||h^n||_2 over the last half of the run

    :param records: List of EnergyRecord, at least 10
    :return: BoundednessSummary
    '''
    if len(records) < 10:
        raise ValueError('boundedness_monitor needs at least 10 records, got {}'.format(len(records)))
    cols = records_to_columns(records)
    l2, h2 = cols['l2_norm'], cols['h2_seminorm']
    finite = bool(np.isfinite(l2).all() and np.isfinite(h2).all())
    if not finite:
        return BoundednessSummary(sup_l2=math.inf, sup_h2=math.inf, trend=math.inf, finite=False, sup_sum=math.inf)
    tail = len(records) // 2
    trend = least_squares_slope(cols['step'][tail:], l2[tail:])
    return BoundednessSummary(sup_l2=float(l2.max()), sup_h2=float(h2.max()), trend=trend, finite=True,
                              sup_sum=float((l2 + h2).max()))


def observed_order(errors):
    '''
    Observed convergence orders log2(e_i / e_{i+1}) of errors measured at successively halved time steps

    :param errors: Sequence of positive errors, at least 2
    :return: List of floats, one shorter than errors
    '''
    errors = [float(e) for e in errors]
    if len(errors) < 2:
        raise ValueError('observed_order needs at least 2 errors, got {}'.format(len(errors)))
    if any(not e > 0 for e in errors):
        raise ValueError('errors must be positive, got {}'.format(errors))
    return [math.log2(a / b) for a, b in zip(errors, errors[1:])]
