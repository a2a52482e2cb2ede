"""Versioned JSON model files.

A model file carries the device constants, the reservoir dynamics, the full
topology (matrices row-major) and, once trained, the readout. Floats are
written as the shortest decimal that reads back to the same double, so
save -> load -> save is byte-identical.
"""

import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from asnrc.errors import ModelDimensionError, ModelFileError, ModelNotFoundError
from asnrc.logs import log_tag
from asnrc.models.device import DeviceParams
from asnrc.models.readout import ReadoutWeights, TrainingInfo
from asnrc.models.reservoir import ReservoirParams, Topology

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

Matrix = List[List[float]]


class TopologyRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int
    m: int
    p: int
    d_max: int
    seed: int
    spectral_radius: float
    w_in: Matrix
    w_self: Matrix
    w_fb: Matrix
    delays: List[List[int]]


class ReadoutRecord(BaseModel):
    model_config = ConfigDict(extra="forbid")

    task: Optional[str] = None
    # Constant input level the readout was trained under
    bias: float = 0.0
    trained_on: TrainingInfo
    w_out: Matrix


class ReservoirSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    params: ReservoirParams
    topology: TopologyRecord


class ModelFile(BaseModel):
    # Newer minor revisions may add sections; readers of the same major ignore them
    model_config = ConfigDict(extra="ignore")

    format_version: int = FORMAT_VERSION
    device: DeviceParams = DeviceParams()
    reservoir: ReservoirSection
    readout: Optional[ReadoutRecord] = None

    @classmethod
    def from_parts(cls, topo: Topology, rp: ReservoirParams, device: Optional[DeviceParams] = None,
                   weights: Optional[ReadoutWeights] = None, task: Optional[str] = None) -> "ModelFile":
        if device is None:
            device = getattr(rp.activation_backend, "device", DeviceParams())
        record = TopologyRecord(
            n=topo.n, m=topo.m, p=topo.p, d_max=topo.d_max, seed=topo.seed,
            spectral_radius=topo.spectral_radius,
            w_in=topo.w_in.tolist(),
            w_self=topo.w_self.toarray().tolist(),
            w_fb=topo.w_fb.tolist(),
            delays=topo.delays.tolist(),
        )
        model = cls(device=device, reservoir=ReservoirSection(params=rp, topology=record))
        return model.with_readout(weights, task) if weights is not None else model

    def with_readout(self, weights: ReadoutWeights, task: Optional[str] = None,
                     bias: float = 0.0) -> "ModelFile":
        record = ReadoutRecord(task=task, bias=bias, trained_on=weights.trained_on, w_out=weights.w_out.tolist())
        return self.model_copy(update={"readout": record})

    def check_dimensions(self) -> None:
        t = self.reservoir.topology
        _check_shape("w_self", t.w_self, t.n, t.n)
        _check_shape("w_in", t.w_in, t.n, t.m)
        _check_shape("w_fb", t.w_fb, t.n, t.p)
        _check_shape("delays", t.delays, t.n, t.n)
        if self.readout is not None:
            _check_shape("w_out", self.readout.w_out, t.p, t.n)

    def topology(self) -> Topology:
        self.check_dimensions()
        t = self.reservoir.topology
        topo = Topology.from_arrays(
            w_in=np.array(t.w_in, dtype=float).reshape(t.n, t.m),
            w_self=np.array(t.w_self, dtype=float).reshape(t.n, t.n),
            w_fb=np.array(t.w_fb, dtype=float).reshape(t.n, t.p),
            delays=np.array(t.delays, dtype=np.int64).reshape(t.n, t.n),
            seed=t.seed,
            d_max=t.d_max,
        )
        # Keep the radius recorded at generation time rather than a recomputed one
        return topo.model_copy(update={"spectral_radius": t.spectral_radius})

    def readout_weights(self) -> Optional[ReadoutWeights]:
        if self.readout is None:
            return None
        t = self.reservoir.topology
        w = np.array(self.readout.w_out, dtype=float).reshape(t.p, t.n)
        return ReadoutWeights(w_out=w, trained_on=self.readout.trained_on)


def _check_shape(name: str, rows: list, n_rows: int, n_cols: int) -> None:
    if len(rows) != n_rows or any(len(r) != n_cols for r in rows):
        widths = sorted({len(r) for r in rows})
        raise ModelDimensionError(f"{name} must be {n_rows}x{n_cols}, file has {len(rows)} rows of width {widths}")


def save_model(model: ModelFile, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    log_tag(logger, "Model", "saved %s", path, level=logging.DEBUG)
    return path


def load_model(path: Union[str, Path]) -> ModelFile:
    path = Path(path)
    if not path.exists():
        raise ModelNotFoundError(f"model not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        model = ModelFile.model_validate_json(text)
    except ValidationError as exc:
        raise ModelFileError(f"malformed model file {path}: {exc.error_count()} validation error(s)") from exc
    if model.format_version != FORMAT_VERSION:
        raise ModelFileError(f"{path} has format version {model.format_version}, expected {FORMAT_VERSION}")
    model.check_dimensions()
    return model
