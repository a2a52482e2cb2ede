from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator
from scipy import linalg

from asnrc.errors import DimensionError, NumericalError, TrainingError


class TrainingInfo(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    samples: int = Field(ge=0)
    ridge: float = Field(default=0.0, ge=0)
    seed: Optional[int] = None


class ReadoutWeights(BaseModel):
    """Trained linear sampling matrix ``W_out`` (p outputs x n neurons)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    w_out: np.ndarray
    trained_on: TrainingInfo = TrainingInfo(samples=0)

    @field_validator("w_out", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        w = np.array(value, dtype=float)
        if w.ndim == 1:
            w = w[np.newaxis, :]
        if w.ndim != 2:
            raise ValueError(f"w_out must be a matrix, got {w.ndim} dimensions")
        if not np.all(np.isfinite(w)):
            raise ValueError("w_out has non-finite entries")
        w.setflags(write=False)
        return w

    @property
    def n(self) -> int:
        return self.w_out.shape[1]

    @property
    def p(self) -> int:
        return self.w_out.shape[0]

    def top_neurons(self, k: int, output: int = 0) -> List[int]:
        """Indices of the ``k`` neurons sampled most heavily for ``output``."""
        order = np.argsort(-np.abs(self.w_out[output]), kind="stable")
        return [int(i) for i in order[:k]]


def readout(w: ReadoutWeights, x: np.ndarray) -> np.ndarray:
    """``y = W_out x`` for a state vector (or an n x T block of states)."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != w.n:
        raise DimensionError(f"state has {x.shape[0]} entries, readout expects {w.n}")
    return w.w_out @ x


def pinv(m: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    """Moore-Penrose pseudo-inverse through the singular value decomposition.

    Args:
        m: Matrix to invert.
        tol: Relative cutoff; singular values at or below ``tol * s_max`` are
            treated as zero. Defaults to ``max(rows, cols) * eps``.

    Returns:
        The cols x rows pseudo-inverse.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise DimensionError(f"pinv expects a matrix, got {m.ndim} dimensions")
    if not np.all(np.isfinite(m)):
        raise NumericalError("pinv input has non-finite entries")
    rows, cols = m.shape
    if m.size == 0:
        return np.zeros((cols, rows))
    if tol is None:
        tol = max(rows, cols) * np.finfo(float).eps
    if tol < 0:
        raise ValueError("tol must be non-negative")

    u, s, vh = linalg.svd(m, full_matrices=False, check_finite=False, lapack_driver="gesvd")
    cutoff = tol * s[0] if s.size else 0.0
    keep = s > cutoff
    # Rows of vh and columns of u beyond the effective rank drop out
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return (vh.T * inv_s) @ u.T


def train_readout(x: np.ndarray, y: np.ndarray, ridge: float = 0.0,
                  seed: Optional[int] = None) -> ReadoutWeights:
    """One-shot least-squares readout from harvested states.

    With ``ridge == 0`` this is ``W_out = Y pinv(X)``. With ``ridge > 0`` the
    Tikhonov-regularised form ``Y X^T (X X^T + ridge I)^-1`` is used instead.

    Args:
        x: n x T state matrix, one column per time step.
        y: p x T target matrix (a 1-D target is treated as p = 1).
        ridge: Regularisation strength, >= 0.
        seed: Recorded in the training metadata.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[np.newaxis, :]
    if x.ndim != 2 or y.ndim != 2:
        raise DimensionError("states and targets must be matrices")
    if x.shape[1] != y.shape[1]:
        raise DimensionError(f"states have {x.shape[1]} columns, targets have {y.shape[1]}")
    samples = x.shape[1]
    if samples == 0:
        raise TrainingError("cannot train a readout on zero samples")
    if ridge < 0:
        raise TrainingError("ridge must be non-negative")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise TrainingError("harvested states or targets contain non-finite values")

    if ridge == 0.0:
        w_out = y @ pinv(x)
    else:
        n = x.shape[0]
        gram = x @ x.T + ridge * np.eye(n)
        w_out = linalg.solve(gram, x @ y.T, assume_a="pos").T
    return ReadoutWeights(w_out=w_out, trained_on=TrainingInfo(samples=samples, ridge=ridge, seed=seed))
