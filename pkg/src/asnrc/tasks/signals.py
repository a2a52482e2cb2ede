"""Scalar test signals for the inverter and autoencoder tasks."""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import signal

from asnrc.errors import SignalError

SignalKind = Literal["square", "sine", "triangle", "double_sinusoid", "mackey_glass", "constant"]


class SignalSpec(BaseModel):
    """What to generate.

    ``period`` applies to square, sine and triangle waves; ``f1``/``f2`` (cycles
    per step) to the double sinusoid; the ``mg_*`` fields and ``tau_mg`` to the
    Mackey-Glass series. All kinds are deterministic; ``seed`` is carried so a
    spec fully names the series it produced.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: SignalKind = "square"
    amplitude: float = 1.0
    length: int = Field(default=1000, gt=0)
    seed: int = Field(default=0, ge=0)
    period: int = Field(default=20, ge=2)
    f1: float = Field(default=0.0211, gt=0, lt=0.5)
    f2: float = Field(default=0.0034, gt=0, lt=0.5)
    mg_a: float = 0.2
    mg_b: float = 0.1
    mg_p: float = 10.0
    tau_mg: int = Field(default=17, ge=1)
    mg_discard: int = Field(default=500, ge=0)
    mg_initial: float = 1.2

    @model_validator(mode="after")
    def _check(self) -> "SignalSpec":
        if self.kind == "mackey_glass" and self.amplitude <= 0:
            raise ValueError("mackey_glass needs a positive amplitude to normalise into")
        return self


def mackey_glass(length: int, a: float = 0.2, b: float = 0.1, p: float = 10.0, tau: int = 17,
                 discard: int = 500, initial: float = 1.2) -> np.ndarray:
    """Euler-integrated Mackey-Glass series with unit step, raw amplitude."""
    total = discard + length
    x = np.empty(total + tau)
    x[:tau + 1] = initial
    for i in range(tau, total + tau - 1):
        lagged = x[i - tau]
        x[i + 1] = x[i] + a * lagged / (1.0 + lagged ** p) - b * x[i]
    return x[tau + discard:tau + total]


def gen_signal(spec: SignalSpec) -> np.ndarray:
    """Generate ``spec.length`` samples of the requested signal."""
    t = np.arange(spec.length, dtype=float)
    amp = spec.amplitude
    phase = 2.0 * np.pi * t / spec.period
    if spec.kind == "square":
        return amp * signal.square(phase)
    if spec.kind == "sine":
        return amp * np.sin(phase)
    if spec.kind == "triangle":
        return amp * signal.sawtooth(phase, width=0.5)
    if spec.kind == "double_sinusoid":
        return amp * np.sin(2.0 * np.pi * spec.f1 * t) * np.sin(2.0 * np.pi * spec.f2 * t)
    if spec.kind == "constant":
        return np.full(spec.length, amp)

    raw = mackey_glass(spec.length, spec.mg_a, spec.mg_b, spec.mg_p, spec.tau_mg,
                       spec.mg_discard, spec.mg_initial)
    if not np.all(np.isfinite(raw)):
        raise SignalError("Mackey-Glass integration diverged for these parameters")
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        return np.zeros(spec.length)
    return amp * (2.0 * (raw - lo) / (hi - lo) - 1.0)
