from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from asnrc.errors import DimensionError, MetricError

BINARIZE_AT = 0.5


class MetricReport(BaseModel):
    """Metrics a task run produced; a task fills the ones that apply to it."""

    model_config = ConfigDict(extra="forbid")

    nrmse: Optional[float] = Field(default=None, ge=0)
    sign_agreement: Optional[float] = Field(default=None, ge=0, le=1)
    recovery_rate: Optional[float] = Field(default=None, ge=0, le=1)
    divergence_horizon: Optional[int] = Field(default=None, ge=0)


def _paired(y_true, y_pred):
    a = np.asarray(y_true, dtype=float).ravel()
    b = np.asarray(y_pred, dtype=float).ravel()
    if a.shape != b.shape:
        raise DimensionError(f"series lengths differ: {a.size} vs {b.size}")
    return a, b


def nrmse(y_true, y_pred, reference_var: Optional[float] = None) -> float:
    """Root-mean-square error normalised by the target variance.

    ``reference_var`` replaces the variance of ``y_true`` when the caller
    normalises against a longer reference signal.
    """
    a, b = _paired(y_true, y_pred)
    if a.size < 2:
        raise MetricError("nrmse needs at least two samples")
    var = float(np.var(a)) if reference_var is None else float(reference_var)
    if var <= 0.0:
        raise MetricError("nrmse is undefined for a zero-variance target")
    return float(np.sqrt(np.mean((a - b) ** 2) / var))


def sign_agreement(y_true, y_pred) -> float:
    """Fraction of samples where prediction and target have the same sign."""
    a, b = _paired(y_true, y_pred)
    if a.size == 0:
        raise MetricError("sign agreement needs at least one sample")
    return float(np.mean(np.sign(a) == np.sign(b)))


def pixel_accuracy(true_frames, recovered_frames) -> np.ndarray:
    """Per-frame fraction of pixels whose binarised values agree."""
    t = np.asarray(true_frames, dtype=float)
    r = np.asarray(recovered_frames, dtype=float)
    if t.shape != r.shape:
        raise DimensionError(f"frame stacks differ in shape: {t.shape} vs {r.shape}")
    if t.ndim < 2 or t.shape[0] == 0:
        raise MetricError("expected a non-empty stack of frames")
    t = t.reshape(t.shape[0], -1) > BINARIZE_AT
    r = r.reshape(r.shape[0], -1) > BINARIZE_AT
    return np.mean(t == r, axis=1)


def recovery_rate(true_frames, recovered_frames, pixel_thresh: float = 0.95) -> float:
    """Fraction of frames recovered on at least ``pixel_thresh`` of their pixels."""
    accuracy = pixel_accuracy(true_frames, recovered_frames)
    return float(np.mean(accuracy >= pixel_thresh))


def divergence_horizon(y_true, y_pred, epsilon: float, hold: int = 1) -> Optional[int]:
    """First step where ``|y_true - y_pred| > epsilon`` holds for ``hold`` steps in a row."""
    a, b = _paired(y_true, y_pred)
    hold = max(int(hold), 1)
    over = np.abs(a - b) > epsilon
    run = 0
    for t, flag in enumerate(over):
        run = run + 1 if flag else 0
        if run == hold:
            return t - hold + 1
    return None


def windowed_nrmse(y_true, y_pred, window: int, reference_var: Optional[float] = None) -> List[float]:
    """NRMSE over consecutive non-overlapping windows.

    Windows are normalised by ``reference_var`` (default: variance of the whole
    of ``y_true``) so a flat stretch of the target does not blow up.
    """
    a, b = _paired(y_true, y_pred)
    if window < 2:
        raise MetricError("window must span at least two samples")
    ref = float(np.var(a)) if reference_var is None else float(reference_var)
    return [nrmse(a[i:i + window], b[i:i + window], reference_var=ref)
            for i in range(0, a.size - window + 1, window)]
