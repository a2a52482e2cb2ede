from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from asnrc.models.metrics import MetricReport
from asnrc.models.reservoir import ReservoirParams, Topology, generate_topology

TaskName = Literal["inverter", "video", "autoencoder"]

# Reservoir settings each experiment starts from when the caller leaves them out
TASK_PRESETS: Dict[str, Dict[str, Any]] = {
    "inverter": {"n": 25, "connectivity": 0.2},
    "video": {"n": 200, "connectivity": 0.05, "input_scale": 0.1, "ridge": 1e-3},
    # A free-running generator drifts off under the default 5% state noise
    "autoencoder": {"n": 100, "connectivity": 0.1, "spectral_radius": 0.6, "fb_scale": 1.0,
                    "params": {"noise_gain": 1e-5}},
}


class ReservoirConfig(BaseModel):
    """How to build a reservoir: topology knobs, dynamics and readout ridge."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    n: int = Field(default=25, ge=1)
    connectivity: float = Field(default=0.2, gt=0, le=1)
    spectral_radius: float = Field(default=0.9, gt=0)
    input_scale: float = Field(default=1.0, ge=0)
    fb_scale: float = Field(default=1.0, ge=0)
    tau0: float = Field(default=1.0, gt=0)
    d_max: int = Field(default=10, ge=1)
    params: ReservoirParams = ReservoirParams()
    ridge: float = Field(default=1e-8, ge=0)

    @classmethod
    def for_task(cls, task: str, **overrides: Any) -> "ReservoirConfig":
        return cls(**{**TASK_PRESETS[task], **overrides})

    def build(self, m: int, p: int, seed: int) -> Topology:
        return generate_topology(
            n=self.n, m=m, p_out=p, connectivity=self.connectivity,
            spectral_radius=self.spectral_radius, input_scale=self.input_scale,
            fb_scale=self.fb_scale, tau0=self.tau0, d_max=self.d_max, seed=seed,
        )


class TaskReport(BaseModel):
    """Outcome of one experiment run.

    ``traces`` holds named time series (one value per step or frame) for CSV
    emission and ``frames`` holds frame stacks; neither goes into the summary.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    task: TaskName
    seed: int
    status: Literal["ok", "failed"] = "ok"
    message: Optional[str] = None
    metrics: MetricReport = MetricReport()
    extras: Dict[str, Any] = {}
    traces: Dict[str, np.ndarray] = Field(default_factory=dict, exclude=True)
    frames: Dict[str, np.ndarray] = Field(default_factory=dict, exclude=True)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def summary_json(self) -> str:
        return self.model_dump_json(indent=2)

    @classmethod
    def failed(cls, task: TaskName, seed: int, message: str) -> "TaskReport":
        return cls(task=task, seed=seed, status="failed", message=message)


def trace_columns(report: TaskReport, names: Optional[List[str]] = None):
    """Labels and a T x k matrix of the requested (default: all) traces."""
    names = list(report.traces) if names is None else names
    if not names:
        return [], np.zeros((0, 0))
    return names, np.column_stack([report.traces[name] for name in names])
