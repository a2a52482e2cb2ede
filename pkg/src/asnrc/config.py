import json
import os
from pathlib import Path
from typing import Any, Optional, Union

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, model_validator

from asnrc.models.device import DeviceParams
from asnrc.models.reservoir import AsnBackend, AsnBinaryBackend, Topology
from asnrc.tasks.autoencoder import AutoencoderInput, AutoencoderTask
from asnrc.tasks.base import TASK_PRESETS, ReservoirConfig, TaskName
from asnrc.tasks.glyphs import GlyphVideoSpec, load_glyph_set
from asnrc.tasks.inverter import InverterInput, InverterTask
from asnrc.tasks.signals import SignalSpec
from asnrc.tasks.video_filter import VideoFilterInput, VideoFilterTask

load_dotenv()

Task = Union[InverterTask, VideoFilterTask, AutoencoderTask]

DEFAULT_SIGNALS = {
    "inverter": SignalSpec(kind="square", period=20),
    "autoencoder": SignalSpec(kind="double_sinusoid"),
}


class Settings(BaseModel):
    """Process-wide settings taken from the environment (and a ``.env`` file)."""

    output_dir: str = "results"
    log_level: str = "INFO"
    database_url: str = "sqlite:///asnrc_results.db"


def settings() -> Settings:
    return Settings(
        output_dir=os.getenv("ASNRC_OUTPUT_DIR", "results"),
        log_level=os.getenv("ASNRC_LOG_LEVEL", "INFO"),
        database_url=os.getenv("ASNRC_DATABASE_URL", "sqlite:///asnrc_results.db"),
    )


class RunConfig(BaseModel):
    """Everything one invocation needs; every field has a default.

    Reservoir knobs left out of ``reservoir`` are filled from the preset of
    the selected task. ``device`` is the cell used by the ASN backends.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    task: TaskName = "inverter"
    reservoir: ReservoirConfig = ReservoirConfig.for_task("inverter")
    device: DeviceParams = DeviceParams()
    signal: Optional[SignalSpec] = None
    video: GlyphVideoSpec = GlyphVideoSpec()
    train_len: int = Field(default=1000, ge=1)
    test_len: int = Field(default=500, ge=2)
    teach_len: int = Field(default=2000, ge=1)
    free_len: int = Field(default=500, ge=2)
    seed: int = Field(default=0, ge=0)
    trials: int = Field(default=1, ge=1)
    output_dir: Optional[str] = None

    @model_validator(mode="before")
    @classmethod
    def _apply_preset(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        task = data.get("task", "inverter")
        reservoir = data.get("reservoir", {})
        if isinstance(reservoir, dict) and task in TASK_PRESETS:
            preset = TASK_PRESETS[task]
            merged = {**preset, **reservoir}
            if isinstance(preset.get("params"), dict) and isinstance(reservoir.get("params"), dict):
                merged["params"] = {**preset["params"], **reservoir["params"]}
            data = {**data, "reservoir": merged}
        return data

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunConfig":
        return cls.from_sources(path)

    @classmethod
    def from_sources(cls, path: Optional[Union[str, Path]] = None, **overrides: Any) -> "RunConfig":
        """Config file (if any) with command-line overrides applied on top.

        Overrides of ``None`` are ignored. Presets are resolved after the
        overrides so a task chosen on the command line gets its own preset.
        """
        data = {}
        if path is not None:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
            if not isinstance(data, dict):
                raise ValueError(f"{path} must hold a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(data)

    def resolved_reservoir(self) -> ReservoirConfig:
        params = self.reservoir.params
        backend = params.activation_backend
        if isinstance(backend, (AsnBackend, AsnBinaryBackend)):
            params = params.model_copy(update={"activation_backend": backend.model_copy(update={"device": self.device})})
        return self.reservoir.model_copy(update={"params": params})

    def resolved_signal(self) -> SignalSpec:
        if self.signal is not None:
            return self.signal
        return DEFAULT_SIGNALS.get(self.task, SignalSpec())

    def output_path(self) -> Path:
        return Path(self.output_dir or settings().output_dir)

    def make_task(self, seed: Optional[int] = None, topology: Optional[Topology] = None) -> Task:
        """The task object for this configuration; call ``run()`` on it."""
        seed = self.seed if seed is None else seed
        reservoir = self.resolved_reservoir()
        if self.task == "inverter":
            inp = InverterInput(reservoir=reservoir, signal=self.resolved_signal(),
                                train_len=self.train_len, test_len=self.test_len, seed=seed)
            return InverterTask(inp, topology)
        if self.task == "video":
            return VideoFilterTask(VideoFilterInput(reservoir=reservoir, video=self.video, seed=seed), topology)
        inp = AutoencoderInput(reservoir=reservoir, signal=self.resolved_signal(),
                               teach_len=self.teach_len, free_len=self.free_len, seed=seed)
        return AutoencoderTask(inp, topology)

    def io_width(self) -> int:
        """Input and output channel count of the selected task."""
        if self.task == "video":
            glyphs = load_glyph_set(self.video.glyphs)
            h, w = next(iter(glyphs.values())).shape
            return h * w
        return 1
