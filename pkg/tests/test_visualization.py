import os

from src.data.energy_csv import write_energy_csv
from src.data.snapshot import write_snapshot
from src.schemes.simulation import initial_condition_trig
from src.spectral.core import GridSpec
from src.visualization.visualization import plot_energy_curves, plot_snapshot
from tests.conftest import make_records


def test_plot_energy_curves_overlays_runs(tmp_path):
    paths = []
    for name, energies in (('sinc', [3.0, 2.0, 1.5, 1.2]), ('classical', [3.0, 2.5, 2.4, 2.35])):
        os.makedirs(tmp_path / name)
        path = str(tmp_path / name / 'energy.csv')
        write_energy_csv(make_records(energies), path)
        paths.append(path)
    image = plot_energy_curves(paths, str(tmp_path / 'figures'), log_time=False, title='Example')
    assert os.path.isfile(image)
    assert image.endswith('.png')
    image = plot_energy_curves(paths, str(tmp_path / 'figures'), labels=['a', 'b'])
    assert os.path.isfile(image)


def test_plot_snapshot(tmp_path):
    path = str(tmp_path / 'h_00000000.bin')
    write_snapshot(initial_condition_trig(GridSpec.square(32)), path, time=0.0, step=0)
    image = plot_snapshot(path, str(tmp_path / 'figures'), n_levels=10)
    assert os.path.basename(image).startswith('h_00000000_')
    assert os.path.getsize(image) > 0
