'''
Script for plotting energy curves and free-energy isolines from the files written by the CLI
'''
import argparse
import datetime
import os

import matplotlib as mpl
mpl.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

from src.config import cfg
from src.data.energy_csv import read_energy_csv
from src.data.snapshot import read_snapshot


def _stamp():
    return datetime.datetime.now().strftime("%Y%m%d-%H%M%S")


def plot_energy_curves(csv_paths, dir_path, labels=None, log_time=True, title=None):
    '''
    Plots the energy against time for one or more runs on shared axes
    :param csv_paths: List of energy CSV paths
    :param dir_path: Directory in which to save the image
    :param labels: Legend entries, defaults to the CSVs' parent folder names
    :param log_time: Use a logarithmic time axis (the t = 0 record is dropped)
    :return: Path to the saved PNG
    '''
    if labels is None:
        labels = [os.path.basename(os.path.dirname(os.path.abspath(p))) for p in csv_paths]
    fig, ax = plt.subplots(figsize=(6, 4))
    for path, label in zip(csv_paths, labels):
        records = read_energy_csv(path)
        t = np.array([r.time for r in records])
        e = np.array([r.energy for r in records])
        if log_time:
            keep = t > 0
            t, e = t[keep], e[keep]
        ax.plot(t, e, linewidth=1.5, label=label)
    if log_time:
        ax.set_xscale('log')
    ax.set_xlabel('t')
    ax.set_ylabel('E(t)')
    ax.set_title('Energy evolution' if title is None else title)
    ax.grid(True)
    ax.legend()
    os.makedirs(dir_path, exist_ok=True)
    path = os.path.join(dir_path, 'energy_' + _stamp() + '.png')
    fig.savefig(path, dpi=150, bbox_inches='tight')
    plt.close(fig)
    return path


def plot_snapshot(snapshot_path, dir_path, n_levels=20):
    '''
    Filled contour plot of a field snapshot (height h or free-energy density F)
    :param snapshot_path: Path to a snapshot file
    :param dir_path: Directory in which to save the image
    :param n_levels: Number of isolines
    :return: Path to the saved PNG
    '''
    field, time, step = read_snapshot(snapshot_path)
    x, y = field.grid.coordinates()
    fig, ax = plt.subplots(figsize=(5, 4.5))
    contours = ax.contourf(x, y, field.values, levels=n_levels, cmap='viridis')
    fig.colorbar(contours, ax=ax)
    ax.set_aspect('equal')
    ax.set_xlabel('x')
    ax.set_ylabel('y')
    name = os.path.splitext(os.path.basename(snapshot_path))[0]
    ax.set_title('{} at t = {:g} (step {})'.format(name, time, step))
    os.makedirs(dir_path, exist_ok=True)
    path = os.path.join(dir_path, name + '_' + _stamp() + '.png')
    fig.savefig(path, dpi=150, bbox_inches='tight')
    plt.close(fig)
    return path


if __name__ == '__main__':
    parser = argparse.ArgumentParser(description='Plot energy curves and snapshot isolines')
    parser.add_argument('csvs', nargs='*', type=str)
    parser.add_argument('--snapshot', default=None, type=str)
    parser.add_argument('--output-dir', default=os.path.join(cfg['PATHS']['RESULTS'], 'figures'), type=str)
    args = parser.parse_args()
    if args.csvs:
        print(plot_energy_curves(args.csvs, args.output_dir))
    if args.snapshot is not None:
        print(plot_snapshot(args.snapshot, args.output_dir))
