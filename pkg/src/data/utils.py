import os
import sys
from shutil import rmtree

import matplotlib
import numpy as np
import pandas as pd
import scipy
import yaml


def refresh_folder(path):
    '''
    Ensures the folder exists and is empty
    :param path: Path to the folder of interest
    '''
    if os.path.exists(path):
        rmtree(path)
    os.makedirs(path)


def run_folder(output_dir, *parts):
    '''
    Creates (if needed) and returns a run-scoped output folder; nothing outside it is written by a run
    :param output_dir: Root output directory of the run
    :param parts: Optional sub-folders
    :return: Path to the folder
    '''
    path = os.path.join(output_dir, *parts)
    os.makedirs(path, exist_ok=True)
    return path


def library_versions():
    '''
    Versions of the interpreter and numerical libraries, recorded in run metadata
    '''
    return {'python': sys.version.split()[0], 'numpy': np.__version__, 'scipy': scipy.__version__,
            'pandas': pd.__version__, 'matplotlib': matplotlib.__version__, 'pyyaml': yaml.__version__}


def write_yaml(data, path):
    with open(path, 'w') as f:
        yaml.dump(data, f, default_flow_style=False, sort_keys=False)
