'''
Command-line front end.

    python -m src.cli simulate <config>
    python -m src.cli compare <config_a> <config_b>
    python -m src.cli sweep <config>
    python -m src.cli verify [--samples N] [--seed S]
    python -m src.cli plot <energy.csv> [<energy.csv> ...] [--snapshot <file>]

Exit codes: 0 success, 1 usage or config error, 2 verification failure, 3 blowup in a run whose config declares
blowup fatal.
'''
import argparse
import datetime
import logging
import os
import sys
from dataclasses import replace

import numpy as np
import pandas as pd

from src.analysis.diagnostics import check_dissipation, modified_energy_records
from src.analysis.lemmas import BOUND_TOL, lemma_sampler
from src.analysis.multipliers import build_multipliers, certify_theta0_uniform, verify_recurrence_contraction
from src.analysis.sweep import find_tau_c
from src.config import cfg, ConfigError
from src.data.energy_csv import CsvFormatError, write_energy_csv, records_to_frame
from src.data.run_config import parse_config, apply_overrides, build_initial_condition
from src.data.snapshot import SnapshotFormatError, write_snapshot
from src.data.utils import refresh_folder, run_folder, library_versions, write_yaml
from src.models.models import free_energy_density
from src.schemes.simulation import DiagnosticsSink, run_simulation, mean_drift
from src.schemes.steppers import SchemeKind
from src.spectral.core import GridSpec, FieldError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFICATION = 2
EXIT_BLOWUP = 3
VERIFY = cfg['VERIFY']


class SnapshotWriter(DiagnosticsSink):
    '''
    Writes h^n and its free-energy density to <folder>/h_<step>.bin and <folder>/F_<step>.bin
    '''

    def __init__(self, params, folder):
        self.params = params
        self.folder = folder
        self.written = 0

    def on_snapshot(self, state):
        name = '{:08d}.bin'.format(state.step)
        write_snapshot(state.h_curr, os.path.join(self.folder, 'h_' + name), time=state.time, step=state.step)
        write_snapshot(free_energy_density(self.params, state.h_curr), os.path.join(self.folder, 'F_' + name),
                       time=state.time, step=state.step)
        self.written += 1


def _dissipation_summary(result, scheme):
    summary = {}
    if len(result.records) >= 2:
        report = check_dissipation(result.records)
        summary['ENERGY'] = {'HOLDS': report.holds, 'FIRST_VIOLATION_STEP': report.first_violation_step,
                             'MAX_INCREASE': float(report.max_increase)}
    modified = modified_energy_records(result.records)
    if scheme == SchemeKind.BDF2 and len(modified) >= 2:
        report = check_dissipation(modified, use_modified=True)
        summary['MODIFIED_ENERGY'] = {'HOLDS': report.holds, 'FIRST_VIOLATION_STEP': report.first_violation_step,
                                      'MAX_INCREASE': float(report.max_increase)}
    return summary


def simulate_run(run_config, h0=None, progress=True):
    '''
    Runs one configured simulation and writes energy.csv, metadata.yml and (if enabled) snapshots/ into the run's
    output directory

    :param run_config: RunConfig
    :param h0: Initial datum; built from the config when None
    :param progress: Show a progress bar
    :return: SimResult
    '''
    out = run_folder(run_config.output_dir)
    h0 = build_initial_condition(run_config) if h0 is None else h0
    sink = DiagnosticsSink()
    if run_config.scheme.snapshot_every > 0:
        folder = os.path.join(out, 'snapshots')
        refresh_folder(folder)
        sink = SnapshotWriter(run_config.model, folder)
    logging.info('Running {} / {} with tau={} for {} steps on {}x{}'.format(
        run_config.model.kind.value, run_config.scheme.scheme.value, run_config.scheme.tau,
        run_config.scheme.n_steps, run_config.grid.nx, run_config.grid.ny))
    result = run_simulation(run_config.model, run_config.scheme, h0, sink=sink, progress=progress)

    write_energy_csv(result.records, os.path.join(out, 'energy.csv'))
    metadata = {
        'CONFIG': run_config.to_dict(),
        'CONFIG_FILE': run_config.source,
        'N_STEPS': result.n_steps,
        'FINAL_TIME': result.final_time,
        'SEED': run_config.ic.seed,
        'BLOWUP': result.blowup,
        'BLOWUP_STEP': result.blowup_step,
        'BLOWUP_REASON': result.blowup_reason,
        'STEPS_RUN': result.state.step,
        'FIRST_STEP_RATIO': result.first_step_ratio,
        'MEAN_DRIFT': mean_drift(result),
        'DISSIPATION': _dissipation_summary(result, run_config.scheme.scheme),
        'VERSIONS': library_versions(),
        'CREATED': datetime.datetime.now().strftime('%Y%m%d-%H%M%S'),
    }
    write_yaml(metadata, os.path.join(out, 'metadata.yml'))
    return result


def _blowup_exit(run_config, result):
    if result.blowup:
        print('BLOWUP ({}) at step {}'.format(result.blowup_reason, result.blowup_step))
        if run_config.scheme.blowup_fatal:
            return EXIT_BLOWUP
    return EXIT_OK


def cmd_simulate(config_path, **overrides):
    run_config = apply_overrides(parse_config(config_path), **overrides)
    result = simulate_run(run_config)
    energies = [r.energy for r in result.records]
    print('{} steps to t={:g}; energy {:.12g} -> {:.12g}; output in {}'.format(
        result.state.step, result.state.time, energies[0], energies[-1], run_config.output_dir))
    return _blowup_exit(run_config, result)


def cmd_compare(config_a, config_b, output_dir=None, **overrides):
    '''
    Runs two configs from the initial datum of the first and joins their energy logs on step
    '''
    run_a = apply_overrides(parse_config(config_a), **overrides)
    run_b = apply_overrides(parse_config(config_b), **overrides)
    if (run_a.grid.nx, run_a.grid.ny) != (run_b.grid.nx, run_b.grid.ny):
        raise ConfigError('compare needs equal grids, got {}x{} and {}x{}'.format(
            run_a.grid.nx, run_a.grid.ny, run_b.grid.nx, run_b.grid.ny))
    if output_dir is None:
        name = 'compare_{}_{}'.format(os.path.splitext(os.path.basename(config_a))[0],
                                      os.path.splitext(os.path.basename(config_b))[0])
        output_dir = os.path.join(cfg['PATHS']['RESULTS'], name)
    out = run_folder(output_dir)
    run_a = replace(run_a, output_dir=os.path.join(out, 'a'))
    run_b = replace(run_b, output_dir=os.path.join(out, 'b'))

    h0 = build_initial_condition(run_a)
    result_a = simulate_run(run_a, h0=h0)
    result_b = simulate_run(run_b, h0=h0.copy())
    frames = []
    for result in (result_a, result_b):
        frame = records_to_frame(result.records)
        frame['step'] = frame['step'].astype(int)
        frames.append(frame)
    joined = frames[0].merge(frames[1], on='step', how='outer', suffixes=('_a', '_b'))
    joined.sort_values('step').to_csv(os.path.join(out, 'compare.csv'), index=False)
    print('a: {} steps, blowup={}; b: {} steps, blowup={}; output in {}'.format(
        result_a.state.step, result_a.blowup, result_b.state.step, result_b.blowup, out))
    return max(_blowup_exit(run_a, result_a), _blowup_exit(run_b, result_b))


def cmd_sweep(config_path, **overrides):
    '''
    Brackets the critical time step of a configured model / scheme pair over the SWEEP.TAUS list
    '''
    run_config = apply_overrides(parse_config(config_path), **overrides)
    if run_config.sweep is None:
        raise ConfigError('{} has no SWEEP section'.format(config_path))
    out = run_folder(run_config.output_dir)
    h0 = build_initial_condition(run_config)
    sweep = run_config.sweep
    result = find_tau_c(run_config.model, run_config.scheme.scheme, run_config.grid, h0,
                        run_config.scheme.t_final, sweep.taus, refine_iters=sweep.refine_iters,
                        use_modified=sweep.use_modified, n_workers=sweep.n_workers, progress=True)
    result.trace_frame().to_csv(os.path.join(out, 'sweep_trace.csv'), index=False)
    write_yaml({'CONFIG': run_config.to_dict(), 'TAU_LO': result.tau_lo, 'TAU_HI': result.tau_hi,
                'BRACKET': result.describe(), 'VERSIONS': library_versions(),
                'CREATED': datetime.datetime.now().strftime('%Y%m%d-%H%M%S')},
               os.path.join(out, 'bracket.yml'))
    print(result.describe())
    return EXIT_OK


def verification_suite(samples=VERIFY['SAMPLES'], seed=VERIFY['SEED'], radius=VERIFY['RADIUS'],
                       taus=VERIFY['TAUS'], n=VERIFY['N'], steps=VERIFY['RECURRENCE_STEPS'],
                       a0=VERIFY['FORCING_A0']):
    '''
    Runs every certified bound and returns one row per check
    :return: DataFrame with columns check, value, bound, passed
    '''
    rows = []
    lemma = lemma_sampler(samples, radius, seed)
    bound = 1.0 + BOUND_TOL
    rows.append(['hessian_ratio', lemma.hessian_max_ratio, bound, lemma.hessian_max_ratio <= bound])
    rows.append(['lipschitz_ratio', lemma.lipschitz_max_ratio, bound, lemma.lipschitz_max_ratio <= bound])
    rows.append(['flux_sup', lemma.flux_max, bound, lemma.flux_max <= bound])

    grid = GridSpec.square(n)
    for tau in taus:
        mult = build_multipliers(tau, grid)
        m = mult.mode_mask
        sum_defect = float(np.max(np.abs(mult.t_plus + mult.t_minus - 4.0 * mult.t_hat)[m]))
        prod_defect = float(np.max(np.abs(mult.t_plus * mult.t_minus - mult.t_hat)[m]))
        complex_modes = m & ~mult.real_branch
        modulus_defect = 0.0
        if complex_modes.any():
            modulus_defect = float(np.max(np.abs(np.abs(mult.t_plus) - np.sqrt(mult.t_hat))[complex_modes]))
        rows.append(['theta0 tau={:g}'.format(tau), mult.theta0, 1.0, mult.theta0 < 1.0])
        rows.append(['root_sum tau={:g}'.format(tau), sum_defect, BOUND_TOL, sum_defect <= BOUND_TOL])
        rows.append(['root_product tau={:g}'.format(tau), prod_defect, BOUND_TOL, prod_defect <= BOUND_TOL])
        rows.append(['complex_modulus tau={:g}'.format(tau), modulus_defect, BOUND_TOL,
                     modulus_defect <= BOUND_TOL])
        decay = verify_recurrence_contraction(tau, grid, n_steps=steps, seed=seed, a0=0.0)
        rows.append(['geometric_decay tau={:g}'.format(tau), decay.w_norms[-1], decay.theta0 ** steps *
                     decay.w_norms[0], decay.holds])
        forced = verify_recurrence_contraction(tau, grid, n_steps=steps, seed=seed, a0=a0)
        rows.append(['forced_bound tau={:g}'.format(tau), forced.sup_norm, forced.sup_bound, forced.holds])

    uniform = certify_theta0_uniform(VERIFY['TAU0'], grid, VERIFY['TAU0_GRID'])
    rows.append(['theta0_uniform tau0={:g}'.format(VERIFY['TAU0']), uniform.bound, 1.0, uniform.holds])
    df = pd.DataFrame(rows, columns=['check', 'value', 'bound', 'passed'])
    df['passed'] = df['passed'].astype(bool)
    return df


def cmd_verify(samples=VERIFY['SAMPLES'], seed=VERIFY['SEED'], output_dir=None):
    df = verification_suite(samples=samples, seed=seed)
    print(df.to_string(index=False))
    if output_dir is not None:
        df.to_csv(os.path.join(run_folder(output_dir), 'verify.csv'), index=False)
    if not df['passed'].all():
        logging.warning('Verification failed: {}'.format(', '.join(df.loc[~df['passed'], 'check'])))
        return EXIT_VERIFICATION
    return EXIT_OK


def cmd_plot(csv_paths, snapshot=None, output_dir=None):
    from src.visualization.visualization import plot_energy_curves, plot_snapshot
    out = run_folder(output_dir if output_dir is not None else os.path.join(cfg['PATHS']['RESULTS'], 'figures'))
    print(plot_energy_curves(csv_paths, out))
    if snapshot is not None:
        print(plot_snapshot(snapshot, out))
    return EXIT_OK


def parse_args(argv=None):
    '''
    Parses command line arguments
    :return: Parsed arguments
    '''
    parser = argparse.ArgumentParser(description='Pseudo-spectral solver for sinc-type and classical MBE models')
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    def add_overrides(p):
        p.add_argument('--output-dir', default=None, type=str, help='overrides OUTPUT_DIR')
        p.add_argument('--record-every', default=None, type=int, help='overrides SCHEME.RECORD_EVERY')
        p.add_argument('--snapshot-every', default=None, type=int, help='overrides SCHEME.SNAPSHOT_EVERY')
        p.add_argument('--seed', default=None, type=int, help='overrides IC.SEED')

    p = sub.add_parser('simulate', help='run one configured simulation')
    p.add_argument('config', type=str)
    add_overrides(p)
    p = sub.add_parser('compare', help='run two configs from the same initial datum')
    p.add_argument('config_a', type=str)
    p.add_argument('config_b', type=str)
    add_overrides(p)
    p = sub.add_parser('sweep', help='bracket the critical time step')
    p.add_argument('config', type=str)
    add_overrides(p)
    p = sub.add_parser('verify', help='certify the pointwise and multiplier bounds')
    p.add_argument('--samples', default=VERIFY['SAMPLES'], type=int)
    p.add_argument('--seed', default=VERIFY['SEED'], type=int)
    p.add_argument('--output-dir', default=None, type=str)
    p = sub.add_parser('plot', help='render energy curves and snapshot isolines')
    p.add_argument('csvs', nargs='+', type=str)
    p.add_argument('--snapshot', default=None, type=str)
    p.add_argument('--output-dir', default=None, type=str)
    return parser.parse_args(argv)


def _overrides(args):
    return {'output_dir': args.output_dir, 'record_every': args.record_every,
            'snapshot_every': args.snapshot_every, 'seed': args.seed}


def main(argv=None):
    logging.basicConfig(level=cfg['LOGGING']['LEVEL'], format='%(asctime)s %(levelname)s %(message)s')
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    try:
        if args.command == 'simulate':
            return cmd_simulate(args.config, **_overrides(args))
        if args.command == 'compare':
            return cmd_compare(args.config_a, args.config_b, **_overrides(args))
        if args.command == 'sweep':
            return cmd_sweep(args.config, **_overrides(args))
        if args.command == 'verify':
            if args.samples < 1:
                raise ConfigError('--samples must be >= 1, got {}'.format(args.samples))
            return cmd_verify(samples=args.samples, seed=args.seed, output_dir=args.output_dir)
        return cmd_plot(args.csvs, snapshot=args.snapshot, output_dir=args.output_dir)
    except (ConfigError, CsvFormatError, SnapshotFormatError, FieldError, FileNotFoundError) as e:
        logging.error(str(e))
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
