'''
Run configurations: YAML files with the sections MODEL, SCHEME, GRID, IC, OUTPUT_DIR and, for sweeps, SWEEP.
The grammar is documented in README.md. Unknown keys are rejected so that typos cannot silently fall back to defaults.
'''
import math
import os
import yaml
from dataclasses import dataclass, field, replace
from typing import List, Optional

from src.config import cfg, ConfigError
from src.data.snapshot import read_snapshot
from src.models.models import ModelKind, ModelParams, CLASSICAL_WELLS
from src.schemes.simulation import initial_condition_trig, initial_condition_random
from src.schemes.steppers import SchemeConfig, SchemeKind
from src.spectral.core import GridSpec, RealField

DEFAULTS = cfg['RUN_DEFAULTS']
SECTIONS = ('MODEL', 'SCHEME', 'GRID', 'IC', 'OUTPUT_DIR', 'SWEEP')
IC_TYPES = ('trig', 'random', 'file')


@dataclass(frozen=True)
class InitialCondition:
    '''
    :param kind: One of 'trig', 'random', 'file'
    :param amplitude: Half-width of the random datum
    :param seed: Seed of the random datum
    :param path: Snapshot file of the 'file' datum
    '''
    kind: str = 'trig'
    amplitude: float = DEFAULTS['AMPLITUDE']
    seed: int = DEFAULTS['SEED']
    path: Optional[str] = None


@dataclass(frozen=True)
class SweepSpec:
    taus: List[float]
    refine_iters: int = cfg['SWEEP']['REFINE_ITERS']
    n_workers: int = cfg['SWEEP']['N_WORKERS']
    use_modified: bool = cfg['SWEEP']['USE_MODIFIED']


@dataclass(frozen=True)
class RunConfig:
    model: ModelParams
    scheme: SchemeConfig
    grid: GridSpec
    ic: InitialCondition
    output_dir: str
    sweep: Optional[SweepSpec] = None
    source: Optional[str] = field(default=None, compare=False)

    def to_dict(self):
        '''
        Every field of the configuration, in the layout of the run-config file
        '''
        out = {
            'MODEL': {'KIND': self.model.kind.value, 'ETA_SQ': self.model.eta_sq, 'BETA': self.model.beta,
                      'BETA1': self.model.beta1, 'CLASSICAL_WELL': self.model.classical_well},
            'SCHEME': {'KIND': self.scheme.scheme.value, 'TAU': self.scheme.tau, 'T_FINAL': self.scheme.t_final,
                       'RECORD_EVERY': self.scheme.record_every, 'SNAPSHOT_EVERY': self.scheme.snapshot_every,
                       'BLOWUP_FACTOR': self.scheme.blowup_factor, 'BLOWUP_FATAL': self.scheme.blowup_fatal},
            'GRID': {'NX': self.grid.nx, 'NY': self.grid.ny, 'DEALIAS': self.grid.dealias},
            'IC': {'TYPE': self.ic.kind, 'AMPLITUDE': self.ic.amplitude, 'SEED': self.ic.seed,
                   'PATH': self.ic.path},
            'OUTPUT_DIR': self.output_dir,
        }
        if self.sweep is not None:
            out['SWEEP'] = {'TAUS': list(self.sweep.taus), 'REFINE_ITERS': self.sweep.refine_iters,
                            'N_WORKERS': self.sweep.n_workers, 'USE_MODIFIED': self.sweep.use_modified}
        return out


def _check_keys(section, name, allowed):
    if not isinstance(section, dict):
        raise ConfigError('{} must be a mapping, got {!r}'.format(name, section))
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError('Unknown key {}.{} (allowed: {})'.format(name, unknown[0], ', '.join(allowed)))


def _get(section, name, key, convert, default=None, required=False, check=None, constraint=''):
    '''
    Fetches section[key], converts it and checks a constraint. Errors name the key path and the constraint.
    '''
    path = '{}.{}'.format(name, key)
    if key not in section or section[key] is None:
        if required:
            raise ConfigError('Missing required key {}'.format(path))
        return default
    raw = section[key]
    try:
        value = convert(raw)
    except (TypeError, ValueError):
        raise ConfigError('{} = {!r} is not a valid {}'.format(path, raw, getattr(convert, '__name__', 'value')))
    if check is not None and not check(value):
        raise ConfigError('{} = {!r} violates {} {}'.format(path, raw, key.lower(), constraint))
    return value


def _boolean(raw):
    if isinstance(raw, bool):
        return raw
    raise ValueError(raw)


def _integer(raw):
    if isinstance(raw, bool) or int(raw) != float(raw):
        raise ValueError(raw)
    return int(raw)


def _positive(x):
    return x > 0 and math.isfinite(x)


def _parse_model(section):
    _check_keys(section, 'MODEL', ('KIND', 'ETA_SQ', 'BETA', 'BETA1', 'CLASSICAL_WELL'))
    kinds = [k.value for k in ModelKind]
    kind = _get(section, 'MODEL', 'KIND', str, required=True, check=lambda v: v in kinds,
                constraint='must be one of {}'.format(kinds))
    return ModelParams(
        kind=ModelKind(kind),
        eta_sq=_get(section, 'MODEL', 'ETA_SQ', float, required=True, check=_positive, constraint='> 0'),
        beta=_get(section, 'MODEL', 'BETA', float, DEFAULTS['BETA'], check=_positive, constraint='> 0'),
        beta1=_get(section, 'MODEL', 'BETA1', float, DEFAULTS['BETA1'], check=math.isfinite,
                   constraint='must be finite'),
        classical_well=_get(section, 'MODEL', 'CLASSICAL_WELL', str, DEFAULTS['CLASSICAL_WELL'],
                            check=lambda v: v in CLASSICAL_WELLS,
                            constraint='must be one of {}'.format(list(CLASSICAL_WELLS))))


def _parse_scheme(section, tau_required=True, default_tau=None):
    _check_keys(section, 'SCHEME', ('KIND', 'TAU', 'T_FINAL', 'RECORD_EVERY', 'SNAPSHOT_EVERY', 'BLOWUP_FACTOR',
                                    'BLOWUP_FATAL'))
    kinds = [k.value for k in SchemeKind]
    kind = _get(section, 'SCHEME', 'KIND', str, required=True, check=lambda v: v in kinds,
                constraint='must be one of {}'.format(kinds))
    tau = _get(section, 'SCHEME', 'TAU', float, default_tau, required=tau_required, check=_positive,
               constraint='> 0')
    t_final = _get(section, 'SCHEME', 'T_FINAL', float, required=True, check=_positive, constraint='> 0')
    if 'BLOWUP_FACTOR' in section and section['BLOWUP_FACTOR'] is None:
        factor = None
    else:
        factor = _get(section, 'SCHEME', 'BLOWUP_FACTOR', float, DEFAULTS['BLOWUP_FACTOR'], check=_positive,
                      constraint='> 0')
    return SchemeConfig(
        scheme=SchemeKind(kind), tau=tau, t_final=t_final,
        snapshot_every=_get(section, 'SCHEME', 'SNAPSHOT_EVERY', _integer, DEFAULTS['SNAPSHOT_EVERY'],
                            check=lambda v: v >= 0, constraint='>= 0'),
        record_every=_get(section, 'SCHEME', 'RECORD_EVERY', _integer, DEFAULTS['RECORD_EVERY'],
                          check=lambda v: v >= 1, constraint='>= 1'),
        blowup_factor=factor,
        blowup_fatal=_get(section, 'SCHEME', 'BLOWUP_FATAL', _boolean, DEFAULTS['BLOWUP_FATAL']))


def _even_size(v):
    return v >= 4 and v % 2 == 0


def _parse_grid(section):
    _check_keys(section, 'GRID', ('N', 'NX', 'NY', 'DEALIAS'))
    n = _get(section, 'GRID', 'N', _integer, check=_even_size, constraint='must be even and >= 4')
    nx = _get(section, 'GRID', 'NX', _integer, n, check=_even_size, constraint='must be even and >= 4')
    ny = _get(section, 'GRID', 'NY', _integer, n, check=_even_size, constraint='must be even and >= 4')
    if nx is None or ny is None:
        raise ConfigError('Missing required key GRID.N (or both GRID.NX and GRID.NY)')
    return GridSpec(nx, ny, dealias=_get(section, 'GRID', 'DEALIAS', _boolean, DEFAULTS['DEALIAS']))


def _parse_ic(section, base_dir):
    _check_keys(section, 'IC', ('TYPE', 'AMPLITUDE', 'SEED', 'PATH'))
    kind = _get(section, 'IC', 'TYPE', str, 'trig', check=lambda v: v in IC_TYPES,
                constraint='must be one of {}'.format(list(IC_TYPES)))
    path = _get(section, 'IC', 'PATH', str, required=kind == 'file')
    if path is not None and not os.path.isabs(path):
        path = os.path.normpath(os.path.join(base_dir, path))
    return InitialCondition(
        kind=kind,
        amplitude=_get(section, 'IC', 'AMPLITUDE', float, DEFAULTS['AMPLITUDE'], check=_positive,
                       constraint='> 0'),
        seed=_get(section, 'IC', 'SEED', _integer, DEFAULTS['SEED'], check=lambda v: v >= 0, constraint='>= 0'),
        path=path)


def _parse_sweep(section):
    _check_keys(section, 'SWEEP', ('TAUS', 'REFINE_ITERS', 'N_WORKERS', 'USE_MODIFIED'))
    taus = _get(section, 'SWEEP', 'TAUS', lambda v: [float(t) for t in v], required=True,
                check=lambda v: len(v) > 0 and all(_positive(t) for t in v) and
                all(b > a for a, b in zip(v, v[1:])), constraint='must be a non-empty increasing list of taus > 0')
    return SweepSpec(
        taus=taus,
        refine_iters=_get(section, 'SWEEP', 'REFINE_ITERS', _integer, cfg['SWEEP']['REFINE_ITERS'],
                          check=lambda v: v >= 0, constraint='>= 0'),
        n_workers=_get(section, 'SWEEP', 'N_WORKERS', _integer, cfg['SWEEP']['N_WORKERS'],
                       check=lambda v: v >= 1, constraint='>= 1'),
        use_modified=_get(section, 'SWEEP', 'USE_MODIFIED', _boolean, cfg['SWEEP']['USE_MODIFIED']))


def config_from_dict(raw, base_dir='.', name='run'):
    '''
    Validates a run-config mapping
    :param raw: Dict loaded from a run-config file
    :param base_dir: Directory that relative IC.PATH entries are resolved against
    :param name: Run name, used for the default output directory
    :return: RunConfig
    '''
    _check_keys(raw, 'config', SECTIONS)
    for required in ('MODEL', 'SCHEME', 'GRID'):
        if required not in raw:
            raise ConfigError('Missing required section {}'.format(required))
    try:
        sweep = _parse_sweep(raw['SWEEP']) if raw.get('SWEEP') is not None else None
        model = _parse_model(raw['MODEL'])
        scheme = _parse_scheme(raw['SCHEME'], tau_required=sweep is None,
                               default_tau=sweep.taus[0] if sweep is not None else None)
        grid = _parse_grid(raw['GRID'])
        ic = _parse_ic(raw.get('IC') or {}, base_dir)
        if sweep is not None and sweep.use_modified and scheme.scheme != SchemeKind.BDF2:
            raise ConfigError('SWEEP.USE_MODIFIED = true needs SCHEME.KIND = bdf2, got {}'.format(
                scheme.scheme.value))
    except ConfigError:
        raise
    except ValueError as e:
        # constraints checked by the domain types themselves (e.g. T_FINAL / TAU rounding to zero steps)
        raise ConfigError(str(e))
    output_dir = raw.get('OUTPUT_DIR')
    if output_dir is None:
        output_dir = os.path.join(cfg['PATHS']['RESULTS'], name)
    elif not isinstance(output_dir, str) or not output_dir:
        raise ConfigError('OUTPUT_DIR = {!r} must be a non-empty path'.format(output_dir))
    return RunConfig(model=model, scheme=scheme, grid=grid, ic=ic, output_dir=output_dir, sweep=sweep)


def parse_config(path):
    '''
    Loads and validates a run-config file
    :param path: Path to a YAML run config
    :return: RunConfig
    '''
    if not os.path.isfile(path):
        raise ConfigError('Config file {} does not exist'.format(path))
    with open(path, 'r') as f:
        try:
            raw = yaml.full_load(f)
        except yaml.YAMLError as e:
            raise ConfigError('{} is not valid YAML: {}'.format(path, e))
    if raw is None:
        raise ConfigError('Config file {} is empty'.format(path))
    name = os.path.splitext(os.path.basename(path))[0]
    run_config = config_from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)), name=name)
    return replace(run_config, source=os.path.abspath(path))


def apply_overrides(run_config, output_dir=None, record_every=None, snapshot_every=None, seed=None):
    '''
    Applies command-line overrides; None leaves a field unchanged
    :return: RunConfig
    '''
    scheme = run_config.scheme
    try:
        if record_every is not None:
            scheme = replace(scheme, record_every=record_every)
        if snapshot_every is not None:
            scheme = replace(scheme, snapshot_every=snapshot_every)
    except ValueError as e:
        raise ConfigError(str(e))
    ic = run_config.ic if seed is None else replace(run_config.ic, seed=seed)
    return replace(run_config, scheme=scheme, ic=ic,
                   output_dir=run_config.output_dir if output_dir is None else output_dir)


def build_initial_condition(run_config):
    '''
    Materializes the configured initial datum on the configured grid
    :return: RealField
    '''
    ic, grid = run_config.ic, run_config.grid
    if ic.kind == 'trig':
        return initial_condition_trig(grid)
    if ic.kind == 'random':
        return initial_condition_random(grid, amplitude=ic.amplitude, seed=ic.seed)
    h0, _, _ = read_snapshot(ic.path)
    if (h0.grid.nx, h0.grid.ny) != (grid.nx, grid.ny):
        raise ConfigError('IC.PATH {} holds a {}x{} field but GRID is {}x{}'.format(
            ic.path, h0.grid.nx, h0.grid.ny, grid.nx, grid.ny))
    return RealField(grid, h0.values)
