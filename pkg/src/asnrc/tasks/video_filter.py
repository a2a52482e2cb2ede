import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from asnrc.errors import DimensionError
from asnrc.logs import log_tag
from asnrc.models import metrics
from asnrc.models.readout import ReadoutWeights, readout, train_readout
from asnrc.models.reservoir import NoFeedback, Topology, run
from asnrc.tasks.base import ReservoirConfig, TaskReport
from asnrc.tasks.glyphs import GlyphVideoSpec, make_video

logger = logging.getLogger(__name__)


class VideoFilterInput(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    reservoir: ReservoirConfig = ReservoirConfig.for_task("video")
    video: GlyphVideoSpec = GlyphVideoSpec()
    train_fraction: float = Field(default=0.75, gt=0, lt=1)
    pixel_thresh: float = Field(default=0.95, gt=0, le=1)
    seed: int = Field(default=0, ge=0)


def transition_lags(labels: List[str], accuracy: np.ndarray, pixel_thresh: float) -> List[int]:
    """Frames after each glyph change until a frame is recovered again.

    A lag of 0 means the first frame of the new glyph was already recovered.
    Changes whose recovery never happens before the next change are counted
    up to that next change.
    """
    lags = []
    for k in range(1, len(labels)):
        if labels[k] == labels[k - 1]:
            continue
        lag = 0
        while k + lag < len(labels) and accuracy[k + lag] < pixel_thresh:
            if lag > 0 and labels[k + lag] != labels[k + lag - 1]:
                break
            lag += 1
        lags.append(lag)
    return lags


class VideoFilterTask:
    """
    Recovers glyph frames from a distorted, noisy video stream.

    One reservoir step per frame; frames are flattened row-major into the
    input vector, and the readout maps states back to clean pixels.
    """

    def __init__(self, inp: VideoFilterInput, topology: Optional[Topology] = None):
        self.inp = inp
        self.topology = topology
        self.weights: Optional[ReadoutWeights] = None

    def run(self) -> TaskReport:
        inp = self.inp
        rp = inp.reservoir.params
        video = inp.video.model_copy(update={"seed": inp.seed})
        clean, noisy, labels = make_video(video)
        frames, h, w = clean.shape
        pixels = h * w

        topo = self.topology or inp.reservoir.build(m=pixels, p=pixels, seed=inp.seed)
        self.topology = topo
        if topo.m != pixels or topo.p != pixels:
            raise DimensionError(f"{h}x{w} frames need {pixels} inputs and outputs, "
                                 f"reservoir has {topo.m} and {topo.p}")
        if frames <= rp.washout + 2:
            raise DimensionError(f"{frames} frames leave nothing after a washout of {rp.washout}")

        log_tag(logger, "Harvest", "video: %d frames of %dx%d through %d neurons", frames, h, w, topo.n)
        result = run(topo, rp, noisy.reshape(frames, pixels), NoFeedback(), seed=inp.seed, washout=rp.washout)
        if not result.finite:
            return TaskReport.failed("video", inp.seed, "reservoir states became non-finite")

        x = result.states
        targets = clean.reshape(frames, pixels)[rp.washout:].T
        kept_labels = labels[rp.washout:]
        split = max(1, int(round(inp.train_fraction * x.shape[1])))
        self.weights = train_readout(x[:, :split], targets[:, :split], ridge=inp.reservoir.ridge, seed=inp.seed)
        log_tag(logger, "Train", "readout fitted on %d frames", split)

        recovered = readout(self.weights, x[:, split:]).T.reshape(-1, h, w)
        truth = clean[rp.washout + split:]
        accuracy = metrics.pixel_accuracy(truth, recovered)
        rate = metrics.recovery_rate(truth, recovered, inp.pixel_thresh)
        lags = transition_lags(kept_labels[split:], accuracy, inp.pixel_thresh)

        log_tag(logger, "Summary", "video recovery rate=%.3f over %d test frames", rate, truth.shape[0])
        return TaskReport(
            task="video",
            seed=inp.seed,
            metrics=metrics.MetricReport(recovery_rate=rate),
            extras={
                "n": topo.n,
                "test_frames": int(truth.shape[0]),
                "glyph_changes": len(lags),
                "mean_transition_lag": float(np.mean(lags)) if lags else 0.0,
                "max_transition_lag": int(max(lags)) if lags else 0,
            },
            traces={"pixel_accuracy": accuracy},
            frames={
                "original": truth,
                "distorted": noisy[rp.washout + split:],
                "recovered": recovered,
            },
        )


def task_video_filter(config: Optional[ReservoirConfig] = None, video: Optional[GlyphVideoSpec] = None,
                      seed: int = 0) -> TaskReport:
    inp = VideoFilterInput(
        reservoir=config or ReservoirConfig.for_task("video"),
        video=video or GlyphVideoSpec(),
        seed=seed,
    )
    return VideoFilterTask(inp).run()
