import os

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.config import ConfigError
from src.custom.metrics import EnergyRecord
from src.data.energy_csv import COLUMNS, CsvFormatError, write_energy_csv, read_energy_csv
from src.data.run_config import parse_config, config_from_dict, apply_overrides, build_initial_condition
from src.data.snapshot import HEADER, SnapshotFormatError, write_snapshot, read_snapshot
from src.models.models import ModelKind
from src.schemes.simulation import initial_condition_trig
from src.schemes.steppers import SchemeKind
from src.spectral.core import GridSpec, RealField, random_band_limited

HEADER_LINE = ','.join(COLUMNS)
MINIMAL = '''
MODEL:
  KIND: sinc
  ETA_SQ: 0.01
SCHEME:
  KIND: imex
  TAU: 0.001
  T_FINAL: 1.0
GRID:
  N: 256
IC:
  TYPE: trig
'''


def write_text(path, text):
    with open(path, 'w') as f:
        f.write(text)
    return str(path)


def random_records(rng, n):
    records = []
    for i in range(n):
        modified = None if i == 0 else float(rng.normal())
        ratio = float(rng.exponential()) if i == 1 else None
        records.append(EnergyRecord(step=3 * i, time=float(rng.uniform(0, 1e3)), energy=float(rng.normal() * 1e4),
                                    modified_energy=modified, mass=float(rng.normal() * 1e-15),
                                    l2_norm=float(rng.uniform()), h2_seminorm=float(rng.uniform() * 1e6),
                                    first_step_ratio=ratio))
    return records


def test_empty_record_list_writes_header_only(tmp_path):
    path = tmp_path / 'energy.csv'
    write_energy_csv([], path)
    assert path.read_text().strip() == HEADER_LINE
    assert read_energy_csv(path) == []


def test_single_record_round_trips_exactly(tmp_path):
    path = tmp_path / 'energy.csv'
    record = EnergyRecord(step=0, time=0.0, energy=1.0 / 3.0, modified_energy=None, mass=-2.5e-300,
                          l2_norm=0.1, h2_seminorm=np.nextafter(1.0, 2.0), first_step_ratio=None)
    write_energy_csv([record], path)
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert lines[1].startswith('0,0,0.33333333333333331,,')
    assert read_energy_csv(path) == [record]


def test_random_records_round_trip(tmp_path, rng):
    records = random_records(rng, 1000)
    path = tmp_path / 'energy.csv'
    write_energy_csv(records, path)
    assert read_energy_csv(path) == records


@pytest.mark.parametrize('body, line', [
    ('', 1),
    ('step,time,energy\n0,0,1\n', 1),
    (HEADER_LINE + '\n0,0,1,,0,1,1,\n1,0.1,abc,,0,1,1,\n', 3),
    (HEADER_LINE + '\n0.5,0,1,,0,1,1,\n', 2),
    (HEADER_LINE + '\n0,0,,,0,1,1,\n', 2),
    (HEADER_LINE + '\n0,0,1\n', 2),
    (HEADER_LINE + '\n0,0,1,,0,1,1,\n1,0.1,1,,0,1,1,\n1,0.2,1,,0,1,1,\n', 4),
    (HEADER_LINE + '\n0,0,1,,0,1,1,\n\n1,0.1,1,,0,1,1,\n', 3),
])
def test_malformed_csv_reports_line(tmp_path, body, line):
    path = write_text(tmp_path / 'energy.csv', body)
    with pytest.raises(CsvFormatError) as e:
        read_energy_csv(path)
    assert e.value.line == line
    assert str(e.value).startswith('line {}: '.format(line))


def test_snapshot_round_trip_is_bit_exact(tmp_path, rng):
    grid = GridSpec(16, 8)
    field = random_band_limited(grid, rng)
    path = tmp_path / 'h.bin'
    write_snapshot(field, path, time=1.25, step=125)
    assert os.path.getsize(path) == HEADER.size + 16 * 8 * 8
    loaded, time, step = read_snapshot(path)
    assert loaded.grid == grid
    assert np.array_equal(loaded.values, field.values)
    assert (time, step) == (1.25, 125)


def test_snapshot_payload_is_row_major_little_endian(tmp_path):
    grid = GridSpec(4, 6)
    field = RealField(grid, np.arange(24, dtype=np.float64).reshape(4, 6))
    path = tmp_path / 'h.bin'
    write_snapshot(field, path)
    data = path.read_bytes()
    assert data[:4] == b'MBEF'
    payload = np.frombuffer(data, dtype='<f8', offset=HEADER.size)
    assert payload[1 * 6 + 2] == field.values[1, 2]


def test_snapshot_rejects_corrupt_files(tmp_path):
    field = initial_condition_trig(GridSpec.square(8))
    good = tmp_path / 'good.bin'
    write_snapshot(field, good)
    data = good.read_bytes()
    cases = {'short.bin': data[:10], 'magic.bin': b'XXXX' + data[4:], 'truncated.bin': data[:-8],
             'version.bin': data[:4] + (7).to_bytes(4, 'little') + data[8:]}
    for name, content in cases.items():
        path = tmp_path / name
        path.write_bytes(content)
        with pytest.raises(SnapshotFormatError):
            read_snapshot(path)


def test_parse_minimal_config_uses_defaults(tmp_path):
    run = parse_config(write_text(tmp_path / 'minimal.yml', MINIMAL))
    assert run.model.kind == ModelKind.SINC
    assert run.model.beta == 1.0 and run.model.beta1 == 1.0
    assert run.scheme.scheme == SchemeKind.IMEX1
    assert run.scheme.record_every == 1
    assert run.scheme.n_steps == 1000
    assert run.ic.kind == 'trig' and run.ic.amplitude == 0.01
    assert (run.grid.nx, run.grid.ny) == (256, 256)
    assert os.path.basename(os.path.normpath(run.output_dir)) == 'minimal'
    assert run.sweep is None
    assert run.source == os.path.abspath(str(tmp_path / 'minimal.yml'))


@pytest.mark.parametrize('old, new, fragment', [
    ('TAU: 0.001', 'TAU: -1', 'SCHEME.TAU'),
    ('ETA_SQ: 0.01', 'ETA_SQ: 0', 'MODEL.ETA_SQ'),
    ('ETA_SQ: 0.01', 'ETA: 0.01', 'Unknown key MODEL.ETA'),
    ('  T_FINAL: 1.0\n', '', 'SCHEME.T_FINAL'),
    ('KIND: sinc', 'KIND: quartic', 'MODEL.KIND'),
    ('N: 256', 'N: 255', 'GRID.N'),
    ('TYPE: trig', 'TYPE: file', 'IC.PATH'),
    ('TAU: 0.001', 'TAU: 5.0', 'zero steps'),
])
def test_parse_config_errors_name_the_key(tmp_path, old, new, fragment):
    assert old in MINIMAL
    path = write_text(tmp_path / 'bad.yml', MINIMAL.replace(old, new))
    with pytest.raises(ConfigError) as e:
        parse_config(path)
    assert fragment in str(e.value)


def test_parse_config_rejects_missing_and_empty_files(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(str(tmp_path / 'missing.yml'))
    with pytest.raises(ConfigError):
        parse_config(write_text(tmp_path / 'empty.yml', ''))
    with pytest.raises(ConfigError):
        parse_config(write_text(tmp_path / 'extra.yml', MINIMAL + 'PLOTS: true\n'))


def test_sweep_config_defaults_tau_to_first_probe(tmp_path):
    text = MINIMAL.replace('  TAU: 0.001\n', '') + 'SWEEP:\n  TAUS: [0.09, 0.1]\n  N_WORKERS: 2\n'
    run = parse_config(write_text(tmp_path / 'sweep.yml', text))
    assert run.scheme.tau == 0.09
    assert run.sweep.taus == [0.09, 0.1]
    assert run.sweep.n_workers == 2 and run.sweep.refine_iters == 0
    with pytest.raises(ConfigError):
        parse_config(write_text(tmp_path / 'bad.yml', text.replace('[0.09, 0.1]', '[0.1, 0.09]')))



def test_modified_energy_sweep_needs_bdf2_config(tmp_path):
    text = MINIMAL + 'SWEEP:\n  TAUS: [0.5, 2.0]\n  USE_MODIFIED: true\n'
    with pytest.raises(ConfigError) as e:
        parse_config(write_text(tmp_path / 'imex.yml', text))
    assert 'SWEEP.USE_MODIFIED' in str(e.value)
    run = parse_config(write_text(tmp_path / 'bdf2.yml', text.replace('KIND: imex', 'KIND: bdf2')))
    assert run.sweep.use_modified
    assert run.scheme.scheme == SchemeKind.BDF2


def test_config_dict_round_trip(tmp_path):
    text = MINIMAL + 'SWEEP:\n  TAUS: [0.5, 1.0]\nOUTPUT_DIR: somewhere\n'
    run = parse_config(write_text(tmp_path / 'run.yml', text))
    assert config_from_dict(run.to_dict()) == run


def test_file_initial_condition_is_resolved_next_to_config(tmp_path):
    grid = GridSpec.square(16)
    field = initial_condition_trig(grid)
    write_snapshot(field, tmp_path / 'h0.bin')
    text = MINIMAL.replace('N: 256', 'N: 16').replace('TYPE: trig', 'TYPE: file\n  PATH: h0.bin')
    run = parse_config(write_text(tmp_path / 'from_file.yml', text))
    assert run.ic.path == str(tmp_path / 'h0.bin')
    assert_allclose(build_initial_condition(run).values, field.values, rtol=0, atol=0)

    mismatched = parse_config(write_text(tmp_path / 'mismatch.yml', text.replace('N: 16', 'N: 32')))
    with pytest.raises(ConfigError):
        build_initial_condition(mismatched)


def test_random_initial_condition_from_config(tmp_path):
    text = MINIMAL.replace('N: 256', 'N: 16').replace('TYPE: trig', 'TYPE: random\n  AMPLITUDE: 0.5\n  SEED: 9')
    run = parse_config(write_text(tmp_path / 'random.yml', text))
    h0 = build_initial_condition(run)
    assert h0.max_abs() <= 0.5
    assert np.array_equal(h0.values, build_initial_condition(run).values)


def test_apply_overrides(tmp_path):
    run = parse_config(write_text(tmp_path / 'run.yml', MINIMAL))
    same = apply_overrides(run)
    assert same == run
    changed = apply_overrides(run, output_dir='elsewhere', record_every=10, snapshot_every=100, seed=4)
    assert changed.output_dir == 'elsewhere'
    assert changed.scheme.record_every == 10 and changed.scheme.snapshot_every == 100
    assert changed.ic.seed == 4
    with pytest.raises(ConfigError):
        apply_overrides(run, record_every=0)
