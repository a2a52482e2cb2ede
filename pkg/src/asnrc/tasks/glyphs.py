"""Glyph videos and the noisy nonlinear channel they are sent through."""

from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from asnrc.errors import DimensionError
from asnrc.seeding import derive_rng

GLYPH_DIR = Path(__file__).parent.parent / "data" / "glyphs"


class DistortionParams(BaseModel):
    """Per-frame gain/offset jitter, a tanh channel and per-pixel noise."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    gain_jitter: float = Field(default=0.2, ge=0)
    offset_jitter: float = Field(default=0.2, ge=0)
    pixel_noise: float = Field(default=0.1, ge=0)
    nonlinearity_gain: float = Field(default=2.0, ge=0)

    @classmethod
    def clean(cls, nonlinearity_gain: float = 2.0) -> "DistortionParams":
        """Noise-free channel that keeps the tanh nonlinearity."""
        return cls(gain_jitter=0.0, offset_jitter=0.0, pixel_noise=0.0, nonlinearity_gain=nonlinearity_gain)


class GlyphVideoSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    glyphs: List[str] = ["I", "7"]
    frames_per_glyph: int = Field(default=8, ge=1)
    total_frames: int = Field(default=960, ge=1)
    distortion: DistortionParams = DistortionParams()
    seed: int = Field(default=0, ge=0)


def parse_glyph(text: str) -> np.ndarray:
    """Parse a grid of ``0``/``1`` characters, one row per line."""
    rows = [line.strip() for line in text.splitlines() if line.strip()]
    if not rows:
        raise ValueError("empty glyph")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DimensionError("glyph rows differ in length")
    if any(c not in "01" for r in rows for c in r):
        raise ValueError("glyph pixels must be 0 or 1")
    return np.array([[int(c) for c in r] for r in rows], dtype=float)


def load_glyph(name: str, glyph_dir: Path = GLYPH_DIR) -> np.ndarray:
    path = Path(glyph_dir) / f"{name}.txt"
    if not path.exists():
        raise FileNotFoundError(f"no glyph asset for {name!r} in {glyph_dir}")
    return parse_glyph(path.read_text())


def available_glyphs(glyph_dir: Path = GLYPH_DIR) -> List[str]:
    return sorted(p.stem for p in Path(glyph_dir).glob("*.txt"))


def load_glyph_set(names: List[str], glyph_dir: Path = GLYPH_DIR) -> Dict[str, np.ndarray]:
    glyphs = {name: load_glyph(name, glyph_dir) for name in names}
    shapes = {g.shape for g in glyphs.values()}
    if len(shapes) > 1:
        raise DimensionError(f"glyphs differ in shape: {sorted(shapes)}")
    return glyphs


def distort_frame(frame: np.ndarray, t: int, d: DistortionParams, seed: int) -> np.ndarray:
    """Send one frame through the channel.

    ``tanh(nonlinearity_gain * (g_t * frame + b_t)) + eps`` with
    ``g_t ~ 1 + N(0, gain_jitter)`` and ``b_t ~ N(0, offset_jitter)`` drawn once
    per frame and ``eps ~ N(0, pixel_noise)`` per pixel. The draws depend only
    on ``(seed, t)``.
    """
    frame = np.asarray(frame, dtype=float)
    rng = np.random.default_rng([int(seed), int(t)])
    g = 1.0 + d.gain_jitter * rng.standard_normal()
    b = d.offset_jitter * rng.standard_normal()
    eps = d.pixel_noise * rng.standard_normal(frame.shape)
    return np.tanh(d.nonlinearity_gain * (g * frame + b)) + eps


def make_video(spec: GlyphVideoSpec, glyph_dir: Path = GLYPH_DIR) -> Tuple[np.ndarray, np.ndarray, List[str]]:
    """Clean and distorted frame stacks plus the glyph shown in every frame.

    Each segment of ``frames_per_glyph`` frames shows one glyph picked
    uniformly from the set.
    """
    glyphs = load_glyph_set(spec.glyphs, glyph_dir)
    names = list(spec.glyphs)
    rng = derive_rng(spec.seed, "video/sequence")
    labels: List[str] = []
    while len(labels) < spec.total_frames:
        labels.extend([names[rng.integers(len(names))]] * spec.frames_per_glyph)
    labels = labels[:spec.total_frames]
    clean = np.stack([glyphs[name] for name in labels])
    distortion_seed = int(derive_rng(spec.seed, "video/distortion").integers(2 ** 62))
    noisy = np.stack([distort_frame(frame, t, spec.distortion, distortion_seed) for t, frame in enumerate(clean)])
    return clean, noisy, labels
