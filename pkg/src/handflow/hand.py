"""Hand keypoint/mesh conventions, track parsing, and raw-track cleanup.

Hand track input format (normative, JSON Lines, UTF-8):

  line 1       metadata record   {"fps": <Hz>, "camera_id": <str>}
  lines 2..N   frame records     {"t": <s>, "hand": "L"|"R", "conf": <0..1>,
                                  "kp": [63 reals], "verts": [2334 reals]}

"verts" is optional. "kp" is the flat (x, y, z) concatenation of the 21
keypoints in `Keypoint` order, meters, camera frame. "verts" likewise holds
778 mesh vertices. Field order within a record is normative for canonical
serialization.

Left hands are mirrored into the right-hand convention at parse time
(x negated, handedness flipped); serialization inverts the mirror so a
parse/write round trip is byte-exact.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import EmptyTrack, NonMonotonicTime, ParseError

NUM_KEYPOINTS = 21
NUM_VERTICES = 778


class Keypoint(enum.IntEnum):
    """Indices into the 21-point array, wrist first, then per-finger
    base-to-tip. The thumb has no anatomical PIP; its interphalangeal
    joint (THUMB_IP) is the analogous landmark and is what retargeting
    uses wherever a "thumb PIP" is called for.
    """

    WRIST = 0
    THUMB_CMC = 1
    THUMB_MCP = 2
    THUMB_IP = 3
    THUMB_TIP = 4
    INDEX_MCP = 5
    INDEX_PIP = 6
    INDEX_DIP = 7
    INDEX_TIP = 8
    MIDDLE_MCP = 9
    MIDDLE_PIP = 10
    MIDDLE_DIP = 11
    MIDDLE_TIP = 12
    RING_MCP = 13
    RING_PIP = 14
    RING_DIP = 15
    RING_TIP = 16
    PINKY_MCP = 17
    PINKY_PIP = 18
    PINKY_DIP = 19
    PINKY_TIP = 20


class Handedness(enum.Enum):
    LEFT = "L"
    RIGHT = "R"


@dataclass(frozen=True)
class HandFrame:
    """One timestamped hand observation in camera coordinates (meters)."""

    timestamp: float
    keypoints: np.ndarray  # (21, 3)
    confidence: float
    handedness: Handedness
    vertices: np.ndarray | None = None  # (778, 3)

    def validate(self) -> None:
        if not np.isfinite(self.timestamp):
            raise ValueError("non-finite timestamp")
        if self.keypoints.shape != (NUM_KEYPOINTS, 3):
            raise ValueError(f"keypoints shape {self.keypoints.shape}, want (21, 3)")
        if not np.all(np.isfinite(self.keypoints)):
            raise ValueError("non-finite keypoints")
        if self.vertices is not None:
            if self.vertices.shape != (NUM_VERTICES, 3):
                raise ValueError(f"vertices shape {self.vertices.shape}, want (778, 3)")
            if not np.all(np.isfinite(self.vertices)):
                raise ValueError("non-finite vertices")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class HandTrack:
    """Time-ordered hand frames from a single camera, single chirality.

    Frames are stored in the right-hand convention. `source_handedness`
    records what the file declared so serialization can restore it.
    """

    frames: list[HandFrame]
    source_fps: float
    camera_id: str
    source_handedness: Handedness = Handedness.RIGHT

    def __post_init__(self):
        ts = [f.timestamp for f in self.frames]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise NonMonotonicTime("track timestamps must be strictly increasing")
        hands = {f.handedness for f in self.frames}
        if len(hands) > 1:
            raise ValueError("all frames in a track must share handedness")
        for f in self.frames:
            f.keypoints.setflags(write=False)
            if f.vertices is not None:
                f.vertices.setflags(write=False)

    def __len__(self) -> int:
        return len(self.frames)

    def timestamps(self) -> np.ndarray:
        return np.array([f.timestamp for f in self.frames])

    def keypoint_array(self) -> np.ndarray:
        """(N, 21, 3) stack of all keypoints."""
        return np.stack([f.keypoints for f in self.frames])


def _mirror_frame(frame: HandFrame) -> HandFrame:
    """Negate camera x and flip chirality. Exact involution in IEEE floats."""
    kp = frame.keypoints * np.array([-1.0, 1.0, 1.0])
    verts = None
    if frame.vertices is not None:
        verts = frame.vertices * np.array([-1.0, 1.0, 1.0])
    flipped = (
        Handedness.RIGHT if frame.handedness is Handedness.LEFT else Handedness.LEFT
    )
    return replace(frame, keypoints=kp, vertices=verts, handedness=flipped)


def _parse_float(record: dict, key: str, line: int) -> float:
    v = record.get(key)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ParseError(f"field '{key}' missing or not a number", line)
    return float(v)


def _parse_coords(record: dict, key: str, count: int, line: int) -> np.ndarray:
    v = record.get(key)
    if not isinstance(v, list) or len(v) != count * 3:
        got = len(v) if isinstance(v, list) else type(v).__name__
        raise ParseError(f"field '{key}' must be a flat list of {count * 3} reals, got {got}", line)
    a = np.asarray(v, dtype=np.float64).reshape(count, 3)
    if not np.all(np.isfinite(a)):
        raise ParseError(f"field '{key}' contains non-finite values", line)
    return a


def parse_hand_track(path: str | Path, mirror_left: bool = True) -> HandTrack:
    """Parse and validate a hand track file.

    Raises ParseError (with line number), EmptyTrack, or NonMonotonicTime.
    With mirror_left (the default) left-hand tracks are converted to the
    right-hand convention; `source_handedness` preserves the original.
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise EmptyTrack(f"{path}: empty file")
    try:
        meta = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise ParseError(f"bad metadata record: {e}", 1) from e
    if not isinstance(meta, dict) or "fps" not in meta or "camera_id" not in meta:
        raise ParseError("metadata record must carry 'fps' and 'camera_id'", 1)
    fps = _parse_float(meta, "fps", 1)
    camera_id = meta["camera_id"]
    if not isinstance(camera_id, str):
        raise ParseError("'camera_id' must be a string", 1)

    frames: list[HandFrame] = []
    last_t = None
    source_hand: Handedness | None = None
    for i, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ParseError(f"bad frame record: {e}", i) from e
        if not isinstance(rec, dict):
            raise ParseError("frame record must be an object", i)
        t = _parse_float(rec, "t", i)
        if not np.isfinite(t):
            raise ParseError("non-finite timestamp", i)
        hand_code = rec.get("hand")
        if hand_code not in ("L", "R"):
            raise ParseError(f"field 'hand' must be 'L' or 'R', got {hand_code!r}", i)
        hand = Handedness(hand_code)
        if source_hand is None:
            source_hand = hand
        elif hand is not source_hand:
            raise ParseError("mixed handedness within one track", i)
        conf = _parse_float(rec, "conf", i)
        if not (0.0 <= conf <= 1.0):
            raise ParseError(f"confidence {conf} outside [0, 1]", i)
        kp = _parse_coords(rec, "kp", NUM_KEYPOINTS, i)
        verts = None
        if "verts" in rec:
            verts = _parse_coords(rec, "verts", NUM_VERTICES, i)
        if last_t is not None and t <= last_t:
            raise NonMonotonicTime(
                f"line {i}: timestamp {t} does not increase past {last_t}"
            )
        last_t = t
        frame = HandFrame(
            timestamp=t, keypoints=kp, confidence=conf, handedness=hand, vertices=verts
        )
        frame.validate()
        if mirror_left and hand is Handedness.LEFT:
            frame = _mirror_frame(frame)
        frames.append(frame)

    if not frames:
        raise EmptyTrack(f"{path}: no frame records")
    return HandTrack(
        frames=frames,
        source_fps=fps,
        camera_id=camera_id,
        source_handedness=source_hand or Handedness.RIGHT,
    )


def write_hand_track(track: HandTrack, path: str | Path) -> None:
    """Serialize a track in the canonical on-disk form.

    Tracks that were mirrored from a left-hand file are mirrored back, so
    parse -> write reproduces the source file's numeric content byte-exactly.
    """
    path = Path(path)
    rows = [json.dumps({"fps": track.source_fps, "camera_id": track.camera_id})]
    unmirror = track.source_handedness is Handedness.LEFT
    for frame in track.frames:
        out = _mirror_frame(frame) if unmirror else frame
        rec: dict = {
            "t": out.timestamp,
            "hand": out.handedness.value,
            "conf": out.confidence,
            "kp": [float(v) for v in out.keypoints.reshape(-1)],
        }
        if out.vertices is not None:
            rec["verts"] = [float(v) for v in out.vertices.reshape(-1)]
        rows.append(json.dumps(rec))
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class FlickerReport:
    removed_timestamps: list[float]
    removed_indices: list[int]

    @property
    def n_removed(self) -> int:
        return len(self.removed_indices)


def reject_flicker(
    track: HandTrack, jump_threshold: float = 0.05, window: int = 5
) -> tuple[HandTrack, FlickerReport]:
    """Drop frames whose wrist teleports away from the windowed median.

    A frame is flagged when its wrist keypoint is more than jump_threshold
    meters from the per-coordinate median wrist over a centered window
    (clipped at the track ends). Worst case removes every frame, which
    raises EmptyTrack.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError("window must be an odd integer >= 3")
    if jump_threshold <= 0:
        raise ValueError("jump_threshold must be positive")
    wrists = np.stack([f.keypoints[Keypoint.WRIST] for f in track.frames])
    n = len(track.frames)
    half = window // 2
    keep: list[int] = []
    removed: list[int] = []
    for i in range(n):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        med = np.median(wrists[lo:hi], axis=0)
        if float(np.linalg.norm(wrists[i] - med)) > jump_threshold:
            removed.append(i)
        else:
            keep.append(i)
    if not keep:
        raise EmptyTrack("flicker rejection removed every frame")
    cleaned = HandTrack(
        frames=[track.frames[i] for i in keep],
        source_fps=track.source_fps,
        camera_id=track.camera_id,
        source_handedness=track.source_handedness,
    )
    report = FlickerReport(
        removed_timestamps=[track.frames[i].timestamp for i in removed],
        removed_indices=removed,
    )
    return cleaned, report


def _interp_columns(
    t_out: np.ndarray, t_src: np.ndarray, values: np.ndarray
) -> np.ndarray:
    """Piecewise-linear interpolation of (N, ...) values onto t_out.

    Exact at the knots: a query equal to a source timestamp returns the
    source value bit-for-bit.
    """
    idx = np.searchsorted(t_src, t_out, side="right") - 1
    idx = np.clip(idx, 0, len(t_src) - 2)
    t0 = t_src[idx]
    t1 = t_src[idx + 1]
    w = (t_out - t0) / (t1 - t0)
    flat = values.reshape(len(t_src), -1)
    out = flat[idx] * (1.0 - w)[:, None] + flat[idx + 1] * w[:, None]
    exact = w == 0.0
    out[exact] = flat[idx[exact]]
    return out.reshape((len(t_out),) + values.shape[1:])


def resample_track(track: HandTrack, target_fps: float) -> HandTrack:
    """Resample to uniform timestamps spanning [first, last] at target_fps.

    Keypoints (and vertices, when every frame has them) are interpolated
    linearly per coordinate. Output has floor((t_last - t_first) * fps) + 1
    frames.
    """
    if target_fps <= 0:
        raise ValueError("target_fps must be positive")
    if len(track.frames) < 2:
        raise EmptyTrack("resampling needs at least 2 frames")
    t_src = track.timestamps()
    t0, t1 = float(t_src[0]), float(t_src[-1])
    count = int(np.floor((t1 - t0) * target_fps)) + 1
    t_out = t0 + np.arange(count) / target_fps

    kp_out = _interp_columns(t_out, t_src, track.keypoint_array())
    conf_src = np.array([f.confidence for f in track.frames])
    conf_out = np.clip(_interp_columns(t_out, t_src, conf_src[:, None])[:, 0], 0.0, 1.0)

    have_all_verts = all(f.vertices is not None for f in track.frames)
    verts_out = None
    if have_all_verts:
        verts_out = _interp_columns(
            t_out, t_src, np.stack([f.vertices for f in track.frames])
        )

    hand = track.frames[0].handedness
    frames = [
        HandFrame(
            timestamp=float(t_out[i]),
            keypoints=kp_out[i],
            confidence=float(conf_out[i]),
            handedness=hand,
            vertices=verts_out[i] if verts_out is not None else None,
        )
        for i in range(count)
    ]
    return HandTrack(
        frames=frames,
        source_fps=target_fps,
        camera_id=track.camera_id,
        source_handedness=track.source_handedness,
    )
