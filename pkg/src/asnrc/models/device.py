"""Analog stochastic neuron (ASN) device model.

The cell is a low energy-barrier magnetic tunnel junction in series with a
transistor, buffered by a current mirror. Its long-term mean transfer curve is
``(v_dd / 2) * tanh(beta * v_in)``; on top of it sits white Gaussian noise that
is large around 0 V and vanishes once the cell saturates.
"""

from typing import Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import constants

ArrayLike = Union[float, np.ndarray]

ROOM_TEMPERATURE = 300.0  # K
ATTEMPT_TIME = 1e-10  # s, inverse attempt frequency of the free layer
ELECTRON_GYROMAGNETIC_RATIO = constants.physical_constants["electron gyromag. ratio"][0]

BarrierClass = Literal["low-barrier", "intermediate", "storage-class", "high-barrier"]


class DeviceParams(BaseModel):
    """Cell constants of the ASN transfer model.

    Attributes:
        v_dd: Full supply in volts; the output swings between -v_dd/2 and +v_dd/2.
        slope_beta: Sigmoid steepness in 1/V.
        noise_amp_alpha: Peak noise standard deviation in volts, reached at zero input.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    v_dd: float = Field(default=0.8, gt=0)
    slope_beta: float = Field(default=5.0, gt=0)
    # 5% of the full 0.8 V swing
    noise_amp_alpha: float = Field(default=0.04, ge=0)

    @property
    def half_swing(self) -> float:
        return self.v_dd / 2.0


class MagnetParams(BaseModel):
    """Material and geometry of the free-layer magnet."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    gyromagnetic_ratio: float = Field(default=ELECTRON_GYROMAGNETIC_RATIO, ge=0)  # rad/(s*T)
    saturation_magnetization: float = Field(ge=0)  # A/m
    anisotropy_field: float = Field(ge=0)  # A/m
    volume: float = Field(ge=0)  # m^3


class BarrierEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    joules: float
    kt: float
    barrier_class: BarrierClass
    retention_time: float  # seconds


def noise_sigma(v_in: ArrayLike, p: DeviceParams) -> ArrayLike:
    """Standard deviation of the output noise at input ``v_in``.

    Follows the sigmoid derivative: ``alpha * (1 - tanh(beta * v_in)**2)``.
    Peaks at ``alpha`` for zero input and decays to zero in saturation.
    """
    t = np.tanh(p.slope_beta * np.asarray(v_in, dtype=float))
    sigma = p.noise_amp_alpha * (1.0 - t * t)
    return float(sigma) if np.ndim(sigma) == 0 else sigma


def mean_response(v_in: ArrayLike, p: DeviceParams) -> ArrayLike:
    """Deterministic long-term mean of the cell output."""
    mean = p.half_swing * np.tanh(p.slope_beta * np.asarray(v_in, dtype=float))
    return float(mean) if np.ndim(mean) == 0 else mean


def asn_response(v_in: ArrayLike, p: DeviceParams, rng: np.random.Generator) -> ArrayLike:
    """One noisy sample of the ASN output voltage per input.

    Draws one standard-normal value per element of ``v_in`` from ``rng``, so the
    same seed and the same input sequence give bit-identical outputs.
    """
    v = np.asarray(v_in, dtype=float)
    t = np.tanh(p.slope_beta * v)
    eta = rng.standard_normal(v.shape)
    out = p.half_swing * t + eta * p.noise_amp_alpha * (1.0 - t * t)
    return float(out) if out.ndim == 0 else out


def asn_binary_response(v_in: ArrayLike, p: DeviceParams, rng: np.random.Generator) -> ArrayLike:
    """Rail-to-rail flavour of the cell.

    Each sample is ``+v_dd/2`` with probability ``(1 + tanh(beta * v_in)) / 2``
    and ``-v_dd/2`` otherwise, so the long-term average is the same sigmoid as
    :func:`asn_response`.
    """
    v = np.asarray(v_in, dtype=float)
    p_up = 0.5 * (1.0 + np.tanh(p.slope_beta * v))
    up = rng.random(v.shape) < p_up
    out = np.where(up, p.half_swing, -p.half_swing)
    return float(out) if out.ndim == 0 else out


def thermal_energy(temperature: float = ROOM_TEMPERATURE) -> float:
    return constants.k * temperature


def barrier_class(u_kt: float) -> BarrierClass:
    """Classify a barrier height given in units of kT."""
    if u_kt < 5.0:
        return "low-barrier"
    if u_kt < 40.0:
        return "intermediate"
    if u_kt <= 60.0:
        return "storage-class"
    return "high-barrier"


def retention_time(u_joules: float, attempt_time: float = ATTEMPT_TIME,
                   temperature: float = ROOM_TEMPERATURE) -> float:
    """Neel-Arrhenius state retention ``attempt_time * exp(U / kT)`` in seconds."""
    with np.errstate(over="ignore"):
        return float(attempt_time * np.exp(u_joules / thermal_energy(temperature)))


def energy_barrier(m: MagnetParams, temperature: float = ROOM_TEMPERATURE) -> BarrierEstimate:
    """Energy barrier ``U = gamma * M_s * H_k * volume / 2``.

    The gyromagnetic-ratio prefactor is part of the formula, so the result is
    only as meaningful as the units fed in. U/kT, its class and the retention
    time are reported alongside.
    """
    joules = m.gyromagnetic_ratio * m.saturation_magnetization * m.anisotropy_field * m.volume / 2.0
    kt = joules / thermal_energy(temperature)
    return BarrierEstimate(
        joules=joules,
        kt=kt,
        barrier_class=barrier_class(kt),
        retention_time=retention_time(joules, temperature=temperature),
    )
