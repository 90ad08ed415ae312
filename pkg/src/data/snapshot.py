'''
Portable binary field snapshots.
Layout: 32-byte little-endian header (magic "MBEF", version u32, nx u32, ny u32, time f64, step u64) followed by
nx*ny little-endian f64 values in row-major order (values[i, j] at offset 8*(i*ny + j)).
'''
import struct
import numpy as np

from src.spectral.core import GridSpec, RealField

MAGIC = b'MBEF'
VERSION = 1
HEADER = struct.Struct('<4sIIIdQ')
PAYLOAD_DTYPE = np.dtype('<f8')


class SnapshotFormatError(ValueError):
    pass


def write_snapshot(field, path, time=0.0, step=0):
    '''
    Writes a field snapshot
    :param field: RealField
    :param path: Output file path
    :param time: Simulation time of the field
    :param step: Step index of the field
    '''
    grid = field.grid
    with open(path, 'wb') as f:
        f.write(HEADER.pack(MAGIC, VERSION, grid.nx, grid.ny, float(time), int(step)))
        f.write(np.ascontiguousarray(field.values, dtype=PAYLOAD_DTYPE).tobytes(order='C'))


def read_snapshot(path):
    '''
    Reads a field snapshot written by write_snapshot
    :param path: Path to the snapshot file
    :return: Tuple (RealField, time, step)
    '''
    with open(path, 'rb') as f:
        data = f.read()
    if len(data) < HEADER.size:
        raise SnapshotFormatError('{}: {} bytes is shorter than the {}-byte header'.format(path, len(data),
                                                                                          HEADER.size))
    magic, version, nx, ny, time, step = HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise SnapshotFormatError('{}: bad magic {!r}, expected {!r}'.format(path, magic, MAGIC))
    if version != VERSION:
        raise SnapshotFormatError('{}: unsupported version {}'.format(path, version))
    expected = nx * ny * PAYLOAD_DTYPE.itemsize
    if len(data) - HEADER.size != expected:
        raise SnapshotFormatError('{}: payload has {} bytes, header declares {}x{} values ({} bytes)'
                                  .format(path, len(data) - HEADER.size, nx, ny, expected))
    try:
        grid = GridSpec(nx, ny)
    except ValueError as e:
        raise SnapshotFormatError('{}: {}'.format(path, e))
    values = np.frombuffer(data, dtype=PAYLOAD_DTYPE, offset=HEADER.size).reshape(nx, ny)
    return RealField(grid, values.astype(np.float64)), time, step
