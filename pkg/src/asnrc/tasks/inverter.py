import logging
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from asnrc.errors import DimensionError
from asnrc.logs import log_tag
from asnrc.models import metrics
from asnrc.models.readout import ReadoutWeights, readout, train_readout
from asnrc.models.reservoir import NoFeedback, Topology, run
from asnrc.tasks.base import ReservoirConfig, TaskReport
from asnrc.tasks.signals import SignalSpec, gen_signal

logger = logging.getLogger(__name__)


class InverterInput(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    reservoir: ReservoirConfig = ReservoirConfig.for_task("inverter")
    signal: SignalSpec = SignalSpec(kind="square", period=20)
    train_len: int = Field(default=1000, ge=1)
    test_len: int = Field(default=500, ge=2)
    seed: int = Field(default=0, ge=0)
    # -1 inverts, +1 is the identity control
    target_gain: float = -1.0
    traced_neurons: int = Field(default=3, ge=0)


class InverterTask:
    """
    Teaches a reservoir to output the negative of its input.

    The input drives the reservoir without any output feedback; the readout is
    trained on a prefix of the run and scored on the held-out continuation.
    """

    def __init__(self, inp: InverterInput, topology: Optional[Topology] = None):
        self.inp = inp
        self.topology = topology
        self.weights: Optional[ReadoutWeights] = None

    def run(self) -> TaskReport:
        inp = self.inp
        rp = inp.reservoir.params
        topo = self.topology or inp.reservoir.build(m=1, p=1, seed=inp.seed)
        self.topology = topo
        if topo.m != 1:
            raise DimensionError(f"the inverter drives one input channel, topology has {topo.m}")

        total = rp.washout + inp.train_len + inp.test_len
        u = gen_signal(inp.signal.model_copy(update={"length": total}))
        target = inp.target_gain * u

        log_tag(logger, "Harvest", "inverter: %d steps on a %d-neuron reservoir", total, topo.n)
        result = run(topo, rp, u[:, np.newaxis], NoFeedback(), seed=inp.seed, washout=rp.washout)
        if not result.finite:
            return TaskReport.failed("inverter", inp.seed, "reservoir states became non-finite")

        x = result.states
        y = target[rp.washout:]
        split = inp.train_len
        self.weights = train_readout(x[:, :split], y[:split], ridge=inp.reservoir.ridge, seed=inp.seed)
        log_tag(logger, "Train", "readout fitted on %d samples (ridge=%g)", split, inp.reservoir.ridge)

        y_test = y[split:]
        y_hat = readout(self.weights, x[:, split:])[0]
        report_metrics = metrics.MetricReport(
            nrmse=metrics.nrmse(y_test, y_hat),
            sign_agreement=metrics.sign_agreement(y_test, y_hat),
        )

        top = self.weights.top_neurons(max(inp.traced_neurons, 1))
        traces = {
            "input": u[rp.washout + split:],
            "target": y_test,
            "output": y_hat,
        }
        for i in top[:inp.traced_neurons]:
            traces[f"neuron_{i}"] = x[i, split:]

        log_tag(logger, "Summary", "inverter nrmse=%.4f sign agreement=%.3f",
                report_metrics.nrmse, report_metrics.sign_agreement)
        return TaskReport(
            task="inverter",
            seed=inp.seed,
            metrics=report_metrics,
            extras={"n": topo.n, "signal": inp.signal.kind, "top_neurons": top},
            traces=traces,
        )


def task_inverter(config: Optional[ReservoirConfig] = None, train_len: int = 1000, test_len: int = 500,
                  seed: int = 0, signal: Optional[SignalSpec] = None) -> TaskReport:
    inp = InverterInput(
        reservoir=config or ReservoirConfig.for_task("inverter"),
        signal=signal or SignalSpec(kind="square", period=20),
        train_len=train_len,
        test_len=test_len,
        seed=seed,
    )
    return InverterTask(inp).run()
