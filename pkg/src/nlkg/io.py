"""CSV and JSON input/output.  Every file is written to a temporary name and renamed."""

import csv
import json
import os
import tempfile
from contextlib import contextmanager

import numpy as np

from .core import RadialGrid, State
from .errors import ParameterError

STATE_HEADER = ("r", "re_u1", "im_u1", "re_u2", "im_u2", "re_v1", "im_v1", "re_v2", "im_v2")
TRAJECTORY_HEADER = ("t", "E", "Q", "H", "P_omega", "S_omega", "xnorm", "I_rho")


def _fmt(x):
    return repr(float(x))


@contextmanager
def atomic_open(path, mode="w"):
    """Open a temporary file next to ``path``; rename it into place on success."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, mode, newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj):
    with atomic_open(path) as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"not JSON serializable: {type(x)!r}")


def write_state_csv(path, s):
    grid = s.grid
    u1, u2, v1, v2 = s.arrays()
    with atomic_open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STATE_HEADER)
        for j in range(grid.npts):
            w.writerow(
                [_fmt(grid.r[j])]
                + [_fmt(x) for a in (u1, u2, v1, v2) for x in (a[j].real, a[j].imag)]
            )


def read_state_csv(path, dim):
    """Read a State; the grid is reconstructed from the r column."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(h.strip() for h in rows[0]) != STATE_HEADER:
        raise ParameterError(f"{path}: expected header {','.join(STATE_HEADER)}")
    data = np.array([[float(x) for x in row] for row in rows[1:] if row], dtype=float)
    if data.ndim != 2 or data.shape[1] != len(STATE_HEADER):
        raise ParameterError(f"{path}: malformed state rows")
    r = data[:, 0]
    grid = RadialGrid(dim=dim, rmax=float(r[-1]), npts=len(r))
    if r[0] != 0 or not np.allclose(r, grid.r, rtol=0, atol=1e-9 * grid.rmax):
        raise ParameterError(f"{path}: r column is not a uniform grid starting at 0")
    comps = [data[:, 1 + 2 * k] + 1j * data[:, 2 + 2 * k] for k in range(4)]
    return State.from_arrays(grid, *comps)


class TrajectoryWriter:
    """Streams TrajectoryRecord rows; the file appears atomically on close."""

    def __init__(self, path):
        self.path = os.fspath(path)
        self._ctx = atomic_open(self.path)
        self._fh = self._ctx.__enter__()
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(TRAJECTORY_HEADER)

    def __call__(self, rec):
        self._w.writerow([_fmt(x) for x in rec.as_row()])

    def close(self, error=None):
        if error is None:
            self._ctx.__exit__(None, None, None)
        else:
            self._ctx.__exit__(type(error), error, error.__traceback__)

    def __enter__(self):
        return self

    def __exit__(self, et, ev, tb):
        self.close(ev)
        return False


def read_trajectory_csv(path):
    from .evolution import TrajectoryRecord

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(h.strip() for h in next(reader))
        if header != TRAJECTORY_HEADER:
            raise ParameterError(f"{path}: expected header {','.join(TRAJECTORY_HEADER)}")
        return [TrajectoryRecord(*(float(x) for x in row)) for row in reader if row]
