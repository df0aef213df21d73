"""Hand-appearance randomization: repaint mesh-covered pixels flat colors.

The mesh extracted upstream is re-rendered over the original frame and the
covered pixels are replaced with one random flat color, erasing skin color
and texture while preserving hand silhouette and pose. FULL repaints the
whole hand, PARTIAL only the thumb and index finger, NONE passes frames
through untouched. Background pixels are never modified.

Color draws are uniform in HSV and fully seeded. With per-frame draws the
generator for frame i is seeded with color_seed XOR i, so parallel and
serial episode runs paint identical colors.
"""

from __future__ import annotations

import colorsys
import enum
from dataclasses import dataclass, field

import numpy as np

from .calibration import CameraModel
from .errors import EmptyMesh, MissingTopology
from .hand import HandFrame
from .rasterize import Coverage, HandPart, MeshTopology, rasterize_mesh

PARTIAL_PARTS = frozenset({HandPart.THUMB, HandPart.INDEX})


class AugmentMode(enum.Enum):
    FULL = "full"
    PARTIAL = "partial"
    NONE = "none"


class ColorDraw(enum.Enum):
    FRAME = "frame"
    EPISODE = "episode"


HUE_BOUNDS = (0.0, 360.0)
SAT_BOUNDS = (0.3, 1.0)
VAL_BOUNDS = (0.4, 1.0)


@dataclass(frozen=True)
class AugmentConfig:
    mode: AugmentMode = AugmentMode.FULL
    color_seed: int = 0
    hue_range: tuple[float, float] = HUE_BOUNDS
    sat_range: tuple[float, float] = SAT_BOUNDS
    val_range: tuple[float, float] = VAL_BOUNDS
    per: ColorDraw = ColorDraw.FRAME

    def __post_init__(self):
        for name, rng, bounds in (
            ("hue", self.hue_range, HUE_BOUNDS),
            ("saturation", self.sat_range, SAT_BOUNDS),
            ("value", self.val_range, VAL_BOUNDS),
        ):
            lo, hi = rng
            if not (bounds[0] <= lo <= hi <= bounds[1]):
                raise ValueError(f"{name} range {rng} outside bounds {bounds}")

    def subset(self) -> set[HandPart] | None:
        return set(PARTIAL_PARTS) if self.mode is AugmentMode.PARTIAL else None


def draw_color(cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    """One flat RGB8 color, uniform in the configured HSV box.

    Draw order (hue, saturation, value) is part of the determinism
    contract.
    """
    h = rng.uniform(*cfg.hue_range)
    s = rng.uniform(*cfg.sat_range)
    v = rng.uniform(*cfg.val_range)
    r, g, b = colorsys.hsv_to_rgb(h / 360.0, s, v)
    return np.array([round(r * 255), round(g * 255), round(b * 255)], dtype=np.uint8)


def apply_color(img: np.ndarray, coverage: Coverage, color: np.ndarray) -> np.ndarray:
    """Replace covered pixels with the flat color; everything else is
    byte-identical to the input."""
    if coverage.face_index.shape != img.shape[:2]:
        raise ValueError(
            f"coverage {coverage.face_index.shape} does not match image {img.shape[:2]}"
        )
    out = img.copy()
    out[coverage.mask] = color
    return out


def augment_frame(
    img: np.ndarray, coverage: Coverage | None, cfg: AugmentConfig, rng: np.random.Generator
) -> np.ndarray:
    """Repaint one frame. Mode NONE (or an empty coverage) returns the
    input unchanged, bit for bit."""
    if cfg.mode is AugmentMode.NONE or coverage is None or not coverage.mask.any():
        return img.copy()
    return apply_color(img, coverage, draw_color(cfg, rng))


@dataclass
class FrameAugmentStats:
    frame: int
    covered_pixels: int
    augmented: bool


@dataclass
class EpisodeAugmentStats:
    frames: list[FrameAugmentStats] = field(default_factory=list)

    @property
    def n_augmented(self) -> int:
        return sum(1 for f in self.frames if f.augmented)

    @property
    def n_skipped(self) -> int:
        return sum(1 for f in self.frames if not f.augmented)

    @property
    def augmented_fraction(self) -> float:
        return self.n_augmented / len(self.frames) if self.frames else 0.0


def augment_episode(
    frames: list[np.ndarray],
    hand_frames: list[HandFrame],
    cam: CameraModel,
    topo: MeshTopology | None,
    cfg: AugmentConfig,
) -> tuple[list[np.ndarray], EpisodeAugmentStats]:
    """Repaint a time-aligned episode of frames.

    Frames without mesh vertices (or whose mesh is entirely off-camera)
    pass through unaugmented and show up in the stats. Requires a loaded
    topology unless mode is NONE.
    """
    if len(frames) != len(hand_frames):
        raise ValueError("frames and hand frames must be time-aligned, same length")
    if cfg.mode is AugmentMode.NONE:
        stats = EpisodeAugmentStats(
            frames=[FrameAugmentStats(i, 0, False) for i in range(len(frames))]
        )
        return [f.copy() for f in frames], stats
    if topo is None:
        raise MissingTopology("mesh augmentation requires a topology file")

    episode_color: np.ndarray | None = None
    if cfg.per is ColorDraw.EPISODE:
        episode_color = draw_color(cfg, np.random.default_rng(cfg.color_seed))

    out: list[np.ndarray] = []
    stats = EpisodeAugmentStats()
    subset = cfg.subset()
    for i, (img, hf) in enumerate(zip(frames, hand_frames)):
        if hf.vertices is None:
            out.append(img.copy())
            stats.frames.append(FrameAugmentStats(i, 0, False))
            continue
        try:
            coverage = rasterize_mesh(cam, hf.vertices, topo, subset)
        except EmptyMesh:
            out.append(img.copy())
            stats.frames.append(FrameAugmentStats(i, 0, False))
            continue
        if episode_color is not None:
            color = episode_color
        else:
            color = draw_color(cfg, np.random.default_rng(cfg.color_seed ^ i))
        out.append(apply_color(img, coverage, color))
        stats.frames.append(FrameAugmentStats(i, coverage.pixel_count, True))
    return out, stats
