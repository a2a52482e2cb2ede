import logging
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from asnrc.errors import DimensionError, TrainingError
from asnrc.logs import log_tag
from asnrc.models import metrics
from asnrc.models.readout import ReadoutWeights, train_readout
from asnrc.models.reservoir import (ClosedLoop, OpenLoop, ReservoirParams, ReservoirState, Topology,
                                    run)
from asnrc.seeding import derive_rng
from asnrc.tasks.base import ReservoirConfig, TaskReport
from asnrc.tasks.signals import SignalSpec, gen_signal

logger = logging.getLogger(__name__)


class AutoencoderInput(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    reservoir: ReservoirConfig = ReservoirConfig.for_task("autoencoder")
    signal: SignalSpec = SignalSpec(kind="double_sinusoid")
    teach_len: int = Field(default=2000, ge=1)
    free_len: int = Field(default=500, ge=2)
    eval_len: int = Field(default=300, ge=2)
    window: int = Field(default=50, ge=2)
    epsilon: float = Field(default=0.2, gt=0)
    hold: int = Field(default=10, ge=1)
    inject_len: int = Field(default=20, ge=0)
    # Bias unit: no signal enters, the idle input channel holds this level in every phase
    bias: float = 0.5
    # Gaussian jitter on the teacher fed back while teaching; the readout still fits the clean signal
    teacher_noise: float = Field(default=3e-4, ge=0)
    seed: int = Field(default=0, ge=0)


def reference_variance(signal: np.ndarray) -> float:
    """Normaliser for free-run errors; falls back to signal power for flat signals."""
    var = float(np.var(signal))
    if var > 0.0:
        return var
    power = float(np.mean(signal ** 2))
    return power if power > 0.0 else 1.0


def bias_inputs(steps: int, level: float) -> np.ndarray:
    """A ``steps`` x 1 input holding ``level`` throughout."""
    return np.full((steps, 1), float(level))


def inject_correction(topo: Topology, rp: ReservoirParams, weights: ReadoutWeights, state: ReservoirState,
                      truth: np.ndarray, inject_len: int, rng: np.random.Generator,
                      y_last: Optional[float] = None, bias: float = 0.0) -> Tuple[np.ndarray, ReservoirState]:
    """Re-inject the true signal, then let the reservoir run free again.

    ``truth`` covers the injection window followed by the stretch to free-run
    over; the first ``inject_len`` samples are teacher-forced. ``bias`` is the
    constant input level the readout was trained under.

    Returns:
        The free-run output after the injection and the final state.
    """
    if inject_len >= truth.size:
        raise DimensionError("nothing left to free-run after the injection window")
    y_init = None if y_last is None else np.array([y_last])
    if inject_len > 0:
        forced = run(topo, rp, bias_inputs(inject_len, bias),
                     OpenLoop(teacher=truth[:inject_len], y_init=y_init),
                     state=state, washout=0, rng=rng)
        state = forced.final_state
    resumed = run(topo, rp, bias_inputs(truth.size - inject_len, bias), ClosedLoop(weights=weights),
                  state=state, washout=0, rng=rng)
    return resumed.outputs[0], resumed.final_state


class AutoencoderTask:
    """
    Learns the generator of a signal, then reproduces it running blind.

    Phase one teacher-forces the true signal, lightly jittered, through the
    feedback path and fits the readout to predict the clean signal. Phase two disconnects the signal and
    feeds the readout's own output back. A final corrective injection of the
    true signal checks that a diverged trajectory can be pulled back.
    """

    def __init__(self, inp: AutoencoderInput, topology: Optional[Topology] = None):
        self.inp = inp
        self.topology = topology
        self.weights: Optional[ReadoutWeights] = None

    def run(self) -> TaskReport:
        inp = self.inp
        rp = inp.reservoir.params
        topo = self.topology or inp.reservoir.build(m=1, p=1, seed=inp.seed)
        self.topology = topo
        if topo.p != 1:
            raise DimensionError(f"the autoencoder reproduces one signal, topology has {topo.p} outputs")
        if not np.any(topo.w_fb):
            raise TrainingError("the autoencoder needs a nonzero feedback path")

        teach = rp.washout + inp.teach_len
        correction = inp.inject_len + inp.window if inp.inject_len > 0 else 0
        total = teach + inp.free_len + correction
        s = gen_signal(inp.signal.model_copy(update={"length": total}))
        ref_var = reference_variance(s)
        rng = derive_rng(inp.seed, "reservoir/noise")
        fed_back = s[:teach]
        if inp.teacher_noise > 0:
            jitter = derive_rng(inp.seed, "autoencoder/teacher_noise").standard_normal(teach)
            fed_back = fed_back + inp.teacher_noise * jitter

        log_tag(logger, "Harvest", "autoencoder: teacher forcing %d steps on %d neurons", teach, topo.n)
        taught = run(topo, rp, bias_inputs(teach, inp.bias), OpenLoop(teacher=fed_back), washout=0, rng=rng)
        if not taught.finite:
            return TaskReport.failed("autoencoder", inp.seed, "reservoir states became non-finite while teaching")
        self.weights = train_readout(taught.states[:, rp.washout:], s[rp.washout:teach],
                                     ridge=inp.reservoir.ridge, seed=inp.seed)
        log_tag(logger, "Train", "readout fitted on %d samples", inp.teach_len)

        free = run(topo, rp, bias_inputs(inp.free_len, inp.bias), ClosedLoop(weights=self.weights),
                   state=taught.final_state, washout=0, rng=rng)
        if not free.finite:
            return TaskReport.failed("autoencoder", inp.seed, "free run became non-finite")
        truth = s[teach:teach + inp.free_len]
        pred = free.outputs[0]

        eval_len = min(inp.eval_len, inp.free_len)
        nrmse = metrics.nrmse(truth[:eval_len], pred[:eval_len], reference_var=ref_var)
        horizon = metrics.divergence_horizon(truth, pred, inp.epsilon * np.sqrt(ref_var), inp.hold)
        windows = metrics.windowed_nrmse(truth, pred, inp.window, reference_var=ref_var)
        log_tag(logger, "Free Run", "nrmse over %d steps=%.4f, divergence at %s", eval_len, nrmse, horizon)

        extras = {
            "n": topo.n,
            "signal": inp.signal.kind,
            "eval_len": eval_len,
            "windowed_nrmse": windows,
        }
        traces = {"target": truth, "output": pred}

        if correction:
            after, _ = inject_correction(topo, rp, self.weights, free.final_state,
                                         s[teach + inp.free_len:], inp.inject_len, rng,
                                         y_last=float(truth[-1]), bias=inp.bias)
            target_after = s[teach + inp.free_len + inp.inject_len:]
            extras["nrmse_before_correction"] = windows[-1] if windows else None
            extras["nrmse_after_correction"] = metrics.nrmse(target_after, after, reference_var=ref_var)
            log_tag(logger, "Correction", "window nrmse %.4f -> %.4f after %d injected steps",
                    extras["nrmse_before_correction"] or float("nan"), extras["nrmse_after_correction"],
                    inp.inject_len)

        return TaskReport(
            task="autoencoder",
            seed=inp.seed,
            metrics=metrics.MetricReport(nrmse=nrmse, divergence_horizon=horizon),
            extras=extras,
            traces=traces,
        )


def task_autoencoder(config: Optional[ReservoirConfig] = None, signal: Optional[SignalSpec] = None,
                     teach_len: int = 2000, free_len: int = 500, seed: int = 0) -> TaskReport:
    inp = AutoencoderInput(
        reservoir=config or ReservoirConfig.for_task("autoencoder"),
        signal=signal or SignalSpec(kind="double_sinusoid"),
        teach_len=teach_len,
        free_len=free_len,
        seed=seed,
    )
    return AutoencoderTask(inp).run()
