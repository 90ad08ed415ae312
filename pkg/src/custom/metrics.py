import math
import numpy as np
from dataclasses import dataclass, field, asdict
from typing import List, Optional

from src.config import cfg

TOL = cfg['NUMERICS']['TOL']


@dataclass(frozen=True)
class EnergyRecord:
    '''
    Per-step diagnostics of a run. One record is one row of the energy CSV log.
    '''
    step: int
    time: float
    energy: float
    modified_energy: Optional[float]
    mass: float
    l2_norm: float
    h2_seminorm: float
    first_step_ratio: Optional[float] = None

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class DissipationReport:
    '''
    Outcome of a scan for energy increases of at least tol between consecutive records.
    first_violation_step is the step of the later record of the first offending pair.
    '''
    holds: bool
    first_violation_step: Optional[int]
    max_increase: float
    tol: float = TOL


class EnergyDissipation(object):
    '''
    Streaming check of discrete energy dissipation. Feed energies in step order with update_state; result() reports
    the first step at which E_n - E_{n-1} >= tol, if any, and the largest increase observed. Mirrors the accumulate /
    result / reset interface of a streaming metric so it can ride along with a running simulation.
    '''

    def __init__(self, tol=TOL, name='energy_dissipation'):
        '''
        :param tol: Increases at or above this value count as violations
        :param name: (Optional) string name of the metric instance.
        '''
        self.name = name
        self.tol = tol
        self.reset_state()

    def update_state(self, step, energy):
        '''
        Accumulates one energy value.
        :param step: Step index of the record
        :param energy: Energy at that step
        :returns: True if this update produced the first violation
        '''
        first = False
        if self.previous is not None:
            increase = energy - self.previous
            if not increase <= self.max_increase:
                self.max_increase = increase
            if self.first_violation_step is None and not increase < self.tol:
                self.first_violation_step = step
                first = True
        self.previous = energy
        self.count += 1
        return first

    def result(self):
        return DissipationReport(holds=self.first_violation_step is None,
                                 first_violation_step=self.first_violation_step,
                                 max_increase=self.max_increase, tol=self.tol)

    def reset_state(self):
        self.previous = None
        self.first_violation_step = None
        self.max_increase = -math.inf
        self.count = 0


class MeanDrift(object):
    '''
    Largest deviation of the mass (integral of h) from its initial value, relative to max(1, |initial mass|)
    '''

    def __init__(self, name='mean_drift'):
        self.name = name
        self.reset_state()

    def update_state(self, mass):
        if self.initial is None:
            self.initial = mass
        self.max_drift = max(self.max_drift, abs(mass - self.initial))

    def result(self):
        if self.initial is None:
            return 0.0
        return self.max_drift / max(1.0, abs(self.initial))

    def reset_state(self):
        self.initial = None
        self.max_drift = 0.0


@dataclass(frozen=True)
class BoundednessSummary:
    '''
    Suprema of ||h||_2 and ||Laplacian h||_2 over a run, and the least-squares slope (per step) of ||h||_2 over the
    final half of the records. finite is False when any value is infinite or NaN.
    '''
    sup_l2: float
    sup_h2: float
    trend: float
    finite: bool
    sup_sum: float = field(default=math.nan)


def least_squares_slope(x, y):
    '''
    Slope of the least-squares line through (x, y)
    '''
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    denom = float(np.dot(xc, xc))
    if denom == 0.0:
        return 0.0
    return float(np.dot(xc, y - y.mean())) / denom


def records_to_columns(records: List[EnergyRecord]):
    '''
    Column arrays of a list of records, with absent values as NaN
    :return: Dict of column name -> numpy array
    '''
    columns = {}
    for name in EnergyRecord.__dataclass_fields__:
        columns[name] = np.array([np.nan if getattr(r, name) is None else getattr(r, name) for r in records],
                                 dtype=np.float64)
    return columns
