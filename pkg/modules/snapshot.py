# Binary snapshots of the prognostic state plus p_s and w
# Layout (little-endian): header, then v1, v2, T, p_s, w as f64 with x varying fastest
import os

import numpy as np

from modules.errors import SnapshotFormatError
from modules.fields import State
from modules.geometry import Grid
from modules.log import logger
import modules.settings as my_settings

HEADER = np.dtype([("magic", "S4"), ("version", "<u4"),
                   ("Nx", "<u4"), ("Ny", "<u4"), ("Nz", "<u4"),
                   ("Lx", "<f8"), ("Ly", "<f8"), ("h", "<f8"), ("t", "<f8")])
FLOAT = np.dtype("<f8")


def _payload_size(Nx, Ny, Nz):
    return (4 * Nx * Ny * Nz + Nx * Ny) * FLOAT.itemsize


def write_snapshot(state, p_s, w, path, grid):
    header = np.zeros(1, dtype=HEADER)
    header[0] = (my_settings.SNAPSHOT_MAGIC, my_settings.SNAPSHOT_VERSION, grid.Nx, grid.Ny, grid.Nz,
                 grid.Lx, grid.Ly, grid.h, state.t)
    arrays = (state.v1, state.v2, state.T, p_s, w)
    expected = (grid.shape,) * 3 + (grid.shape2, grid.shape)
    for a, shape in zip(arrays, expected):
        if a.shape != shape:
            raise SnapshotFormatError(f"array of shape {a.shape} does not match grid {shape}")
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as f:
        f.write(header.tobytes())
        for a in arrays:
            f.write(np.asarray(a, dtype=FLOAT).tobytes(order="F"))
    os.replace(tmp, path)
    logger.debug(f"System: snapshot t={state.t:.6g} written to {path}")


def read_snapshot_header(raw):
    if len(raw) < HEADER.itemsize:
        raise SnapshotFormatError(f"truncated snapshot: {len(raw)} bytes, header needs {HEADER.itemsize}")
    header = np.frombuffer(raw, dtype=HEADER, count=1)[0]
    if bytes(header["magic"]) != my_settings.SNAPSHOT_MAGIC:
        raise SnapshotFormatError(f"bad magic {bytes(header['magic'])!r}")
    if int(header["version"]) != my_settings.SNAPSHOT_VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {int(header['version'])}")
    return header


def read_snapshot(path, grid=None):
    """Returns (State, p_s, w, Grid); grid, when given, must match the stored dimensions."""
    with open(path, "rb") as f:
        raw = f.read()
    header = read_snapshot_header(raw)
    Nx, Ny, Nz = int(header["Nx"]), int(header["Ny"]), int(header["Nz"])
    stored = Grid(float(header["Lx"]), float(header["Ly"]), float(header["h"]), Nx, Ny, Nz)
    if grid is not None and (grid.shape != stored.shape or (grid.Lx, grid.Ly, grid.h) != (stored.Lx, stored.Ly, stored.h)):
        raise SnapshotFormatError(f"snapshot grid {stored.shape} does not match expected {grid.shape}")
    expected = HEADER.itemsize + _payload_size(Nx, Ny, Nz)
    if len(raw) != expected:
        raise SnapshotFormatError(f"snapshot is {len(raw)} bytes, expected {expected}")

    offset = HEADER.itemsize
    out = []
    for shape in (stored.shape,) * 3 + (stored.shape2, stored.shape):
        count = int(np.prod(shape))
        flat = np.frombuffer(raw, dtype=FLOAT, count=count, offset=offset)
        out.append(flat.reshape(shape, order="F").astype(float))
        offset += count * FLOAT.itemsize
    v1, v2, T, p_s, w = out
    return State(v1, v2, T, float(header["t"])), p_s, w, stored
