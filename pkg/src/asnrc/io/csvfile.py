"""CSV emission for traces and state matrices.

Files are comma separated with ``.`` decimals and LF line endings. The first
column is the step index ``t``; values use 17 significant digits.
"""

from pathlib import Path
from typing import Sequence, Union

import numpy as np

from asnrc.errors import DimensionError


def emit_csv(data, path: Union[str, Path], labels: Sequence[str]) -> Path:
    """Write a T x k matrix (or a list of k equal-length series) under ``labels``.

    An empty input writes the header row only.
    """
    labels = list(labels)
    if any("," in label for label in labels):
        raise ValueError("column labels may not contain commas")
    matrix = _as_columns(data, len(labels))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ",".join(["t"] + labels)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if matrix.shape[0] == 0:
            fh.write(header + "\n")
            return path
        t = np.arange(matrix.shape[0])[:, np.newaxis]
        rows = np.hstack([t, matrix])
        np.savetxt(fh, rows, delimiter=",", header=header, comments="", newline="\n",
                   fmt=["%d"] + ["%.17g"] * matrix.shape[1])
    return path


def emit_states(states: np.ndarray, path: Union[str, Path]) -> Path:
    """Write an n x T state matrix as one row per step, columns ``x0..x{n-1}``."""
    states = np.asarray(states, dtype=float)
    if states.ndim != 2:
        raise DimensionError(f"states must be n x T, got {states.shape}")
    return emit_csv(states.T, path, [f"x{i}" for i in range(states.shape[0])])


def _as_columns(data, k: int) -> np.ndarray:
    if isinstance(data, (list, tuple)):
        if not data:
            return np.zeros((0, k))
        lengths = {len(np.ravel(series)) for series in data}
        if len(lengths) > 1:
            raise DimensionError(f"series lengths differ: {sorted(lengths)}")
        if len(data) != k:
            raise DimensionError(f"{len(data)} series for {k} labels")
        if lengths == {0}:
            return np.zeros((0, k))
        return np.column_stack([np.ravel(np.asarray(s, dtype=float)) for s in data])
    matrix = np.asarray(data, dtype=float)
    if matrix.size == 0:
        return np.zeros((0, k))
    if matrix.ndim == 1:
        matrix = matrix[:, np.newaxis]
    if matrix.ndim != 2 or matrix.shape[1] != k:
        raise DimensionError(f"data is {matrix.shape}, expected T x {k}")
    return matrix
