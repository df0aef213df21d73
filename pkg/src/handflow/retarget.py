"""Map hand tracks to end-effector state trajectories.

Per frame: the anchor point (midpoint of thumb IP and index MCP) gives the
position, a plane fitted to five index/thumb keypoints gives the orientation,
and the normalized thumb-index fingertip distance gives the gripper state.
A pre-calibrated camera-to-base transform then moves everything into the
robot's base frame.

Orientation frame convention: X along the index proximal phalanx (MCP to
PIP), Z along the palm-plane normal pointing out of the palm. A flat right
hand lying in the camera z = 0 plane with the index along +x and the thumb
on the -y side therefore maps to the identity orientation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import (
    DegenerateCalibration,
    DegenerateFit,
    EmptyTrack,
    ParallelAxes,
    TooManyGaps,
)
from .geometry import RigidTransform
from .hand import HandFrame, HandTrack, Keypoint

# Five keypoints defining the palm plane: the four index-finger joints plus
# the thumb's interphalangeal joint.
PLANE_KEYPOINTS = (
    Keypoint.INDEX_MCP,
    Keypoint.INDEX_PIP,
    Keypoint.INDEX_DIP,
    Keypoint.INDEX_TIP,
    Keypoint.THUMB_IP,
)

DEFAULT_D_MIN = 0.02
DEFAULT_D_MAX = 0.10


class Embodiment(enum.Enum):
    HUMAN_HAND = "human_hand"
    ROBOT = "robot"


class Frame(enum.Enum):
    CAMERA = "camera"
    ROBOT_BASE = "robot_base"


@dataclass(frozen=True)
class EndEffectorPose:
    """Position (m), unit quaternion orientation, gripper in [0, 1]."""

    position: np.ndarray
    orientation: np.ndarray
    gripper: float
    timestamp: float

    def validate(self) -> None:
        if not (0.0 <= self.gripper <= 1.0):
            raise ValueError(f"gripper {self.gripper} outside [0, 1]")
        if abs(float(np.dot(self.orientation, self.orientation)) - 1.0) > 1e-9:
            raise ValueError("orientation is not unit norm")


@dataclass(frozen=True)
class GripperCalibration:
    """Fingertip distances mapping to fully closed / fully open."""

    d_min: float
    d_max: float

    def __post_init__(self):
        if not (0.0 < self.d_min < self.d_max):
            raise DegenerateCalibration(
                f"need 0 < d_min < d_max, got ({self.d_min}, {self.d_max})"
            )


@dataclass(frozen=True)
class StateTrajectory:
    poses: list[EndEffectorPose]
    embodiment: Embodiment
    frame: Frame

    def __post_init__(self):
        ts = [p.timestamp for p in self.poses]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("trajectory timestamps must be strictly increasing")

    def __len__(self) -> int:
        return len(self.poses)

    def positions(self) -> np.ndarray:
        return np.stack([p.position for p in self.poses]) if self.poses else np.zeros((0, 3))

    def grippers(self) -> np.ndarray:
        return np.array([p.gripper for p in self.poses])

    def timestamps(self) -> np.ndarray:
        return np.array([p.timestamp for p in self.poses])


def anchor_position(frame: HandFrame) -> np.ndarray:
    """Midpoint of the thumb IP joint and the index MCP joint."""
    kp = frame.keypoints
    return (kp[Keypoint.THUMB_IP] + kp[Keypoint.INDEX_MCP]) / 2.0


def _resolve_normal_sign(normal: np.ndarray, kp: np.ndarray, centroid: np.ndarray) -> np.ndarray:
    """Point the palm normal out of the palm (right-hand convention).

    The thumb sits on one fixed side of the index finger for a given
    chirality, so the sign of normal . ((thumb_ip - centroid) x
    (index_tip - index_mcp)) is a deterministic, scale-invariant
    orientation witness.
    """
    thumb_side = kp[Keypoint.THUMB_IP] - centroid
    index_dir = kp[Keypoint.INDEX_TIP] - kp[Keypoint.INDEX_MCP]
    witness = np.cross(thumb_side, index_dir)
    if float(np.dot(normal, witness)) < 0.0:
        return -normal
    return normal


def hand_orientation(frame: HandFrame) -> np.ndarray:
    """Palm orientation quaternion from the five-point palm plane.

    Z is the sign-resolved plane normal, X the index MCP-to-PIP direction
    projected into the plane. Propagates DegenerateFit / ParallelAxes for
    collapsed configurations; callers may interpolate across such frames.
    """
    kp = frame.keypoints
    pts = kp[list(PLANE_KEYPOINTS)]
    plane = geometry.fit_plane(pts)
    normal = _resolve_normal_sign(plane.normal, kp, plane.centroid)
    x_hint = kp[Keypoint.INDEX_PIP] - kp[Keypoint.INDEX_MCP]
    R = geometry.frame_from_axes(x_hint, normal)
    return geometry.quat_from_matrix(R)


def gripper_state(frame: HandFrame, cal: GripperCalibration) -> float:
    """Thumb-index fingertip distance normalized to [0, 1].

    g = clip((d - d_min) / (d_max - d_min), 0, 1); 0 closed, 1 open.
    """
    kp = frame.keypoints
    d = float(np.linalg.norm(kp[Keypoint.THUMB_TIP] - kp[Keypoint.INDEX_TIP]))
    g = (d - cal.d_min) / (cal.d_max - cal.d_min)
    return float(np.clip(g, 0.0, 1.0))


def fingertip_distances(track: HandTrack) -> np.ndarray:
    kps = track.keypoint_array()
    return np.linalg.norm(
        kps[:, Keypoint.THUMB_TIP] - kps[:, Keypoint.INDEX_TIP], axis=1
    )


def calibrate_gripper(
    track: HandTrack, low_pct: float = 5.0, high_pct: float = 95.0
) -> GripperCalibration:
    """Per-track calibration from fingertip-distance percentiles.

    Raises DegenerateCalibration when the track has no usable aperture
    spread (static hand, single frame); callers fall back to defaults.
    """
    if not (0.0 <= low_pct < high_pct <= 100.0):
        raise ValueError("need 0 <= low_pct < high_pct <= 100")
    if len(track.frames) == 0:
        raise EmptyTrack("cannot calibrate an empty track")
    d = fingertip_distances(track)
    d_min = float(np.percentile(d, low_pct))
    d_max = float(np.percentile(d, high_pct))
    if d_min >= d_max:
        raise DegenerateCalibration(
            f"fingertip distance percentiles collapsed: {d_min} >= {d_max}"
        )
    return GripperCalibration(d_min=d_min, d_max=d_max)


def _fill_orientation_gaps(
    quats: list[np.ndarray | None],
    timestamps: np.ndarray,
    max_gap: int,
) -> tuple[list[np.ndarray | None], int]:
    """Slerp orientations across invalid runs of length <= max_gap.

    Runs without a valid neighbor on both sides, or longer than max_gap,
    stay None (the caller drops those frames). Returns the filled list and
    the number of interpolated entries.
    """
    n = len(quats)
    filled = list(quats)
    interpolated = 0
    i = 0
    while i < n:
        if filled[i] is not None:
            i += 1
            continue
        j = i
        while j < n and filled[j] is None:
            j += 1
        run = j - i
        left = i - 1
        if left >= 0 and j < n and run <= max_gap:
            q0, q1 = filled[left], filled[j]
            t0, t1 = timestamps[left], timestamps[j]
            for k in range(i, j):
                w = (timestamps[k] - t0) / (t1 - t0)
                filled[k] = geometry.slerp(q0, q1, float(w))
                interpolated += 1
        i = j
    return filled, interpolated


def retarget_track(
    track: HandTrack,
    cal: GripperCalibration,
    T_cam_to_base: RigidTransform,
    max_gap: int = 5,
    min_valid_fraction: float = 0.8,
) -> StateTrajectory:
    """Full track retargeting into the robot base frame.

    Anchor position and gripper state are computed directly for every frame
    (they cannot degenerate); frames whose orientation fit fails are filled
    by slerp between the nearest valid neighbors when the gap is at most
    max_gap frames, otherwise dropped. Raises TooManyGaps when the fraction
    of frames with a direct orientation falls below min_valid_fraction, and
    EmptyTrack when nothing survives.
    """
    n = len(track.frames)
    if n == 0:
        raise EmptyTrack("cannot retarget an empty track")

    timestamps = track.timestamps()
    quats: list[np.ndarray | None] = []
    prev_q: np.ndarray | None = None
    for hf in track.frames:
        try:
            q = hand_orientation(hf)
        except (DegenerateFit, ParallelAxes):
            quats.append(None)
            continue
        if prev_q is not None:
            # Suppress plane-normal sign flips on jittery near-degenerate
            # frames: prefer the hemisphere of the previous valid Z axis.
            z_now = geometry.quat_rotate(q, np.array([0.0, 0.0, 1.0]))
            z_prev = geometry.quat_rotate(prev_q, np.array([0.0, 0.0, 1.0]))
            if float(np.dot(z_now, z_prev)) < 0.0:
                x_hint = hf.keypoints[Keypoint.INDEX_PIP] - hf.keypoints[Keypoint.INDEX_MCP]
                q = geometry.quat_from_matrix(geometry.frame_from_axes(x_hint, -z_now))
        quats.append(q)
        prev_q = q

    n_valid = sum(1 for q in quats if q is not None)
    if n_valid == 0:
        raise EmptyTrack("no frame produced a valid orientation")
    if n_valid / n < min_valid_fraction:
        raise TooManyGaps(
            f"only {n_valid}/{n} frames have a valid orientation "
            f"(floor {min_valid_fraction})"
        )
    quats, _ = _fill_orientation_gaps(quats, timestamps, max_gap)

    poses = []
    for hf, q in zip(track.frames, quats):
        if q is None:
            continue
        p_cam = anchor_position(hf)
        g = gripper_state(hf, cal)
        p_base, q_base = geometry.transform_pose(T_cam_to_base, p_cam, q)
        poses.append(
            EndEffectorPose(
                position=p_base, orientation=q_base, gripper=g, timestamp=hf.timestamp
            )
        )
    if not poses:
        raise EmptyTrack("every frame was dropped during retargeting")
    return StateTrajectory(poses=poses, embodiment=Embodiment.HUMAN_HAND, frame=Frame.ROBOT_BASE)


def _window_bounds(i: int, n: int, window: int) -> tuple[int, int]:
    half = window // 2
    return max(0, i - half), min(n, i + half + 1)


def _average_quaternions(quats: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Iterative mean of nearby unit quaternions, hemisphere-aligned."""
    aligned = quats.copy()
    flip = aligned @ reference < 0.0
    aligned[flip] = -aligned[flip]
    mean = reference
    for _ in range(4):
        m = aligned.mean(axis=0)
        norm = float(np.linalg.norm(m))
        if norm < 1e-12:
            return geometry.quat_canonical(reference)
        mean = m / norm
    return geometry.quat_canonical(mean)


def smooth_trajectory(
    traj: StateTrajectory, position_window: int = 1, orientation_window: int = 1
) -> StateTrajectory:
    """Centered moving-average smoothing; windows shrink at the endpoints.

    window 1 is the identity. Positions and gripper use an arithmetic mean
    (gripper re-clipped to [0, 1]); orientations use iterative quaternion
    averaging.
    """
    for w in (position_window, orientation_window):
        if w < 1 or w % 2 == 0:
            raise ValueError("windows must be odd integers >= 1")
    if position_window == 1 and orientation_window == 1:
        return traj
    n = len(traj.poses)
    positions = traj.positions()
    grippers = traj.grippers()
    quats = np.stack([p.orientation for p in traj.poses])

    out = []
    for i, pose in enumerate(traj.poses):
        lo, hi = _window_bounds(i, n, position_window)
        p = positions[lo:hi].mean(axis=0)
        g = float(np.clip(grippers[lo:hi].mean(), 0.0, 1.0))
        qlo, qhi = _window_bounds(i, n, orientation_window)
        q = _average_quaternions(quats[qlo:qhi], quats[i])
        out.append(
            EndEffectorPose(position=p, orientation=q, gripper=g, timestamp=pose.timestamp)
        )
    return StateTrajectory(poses=out, embodiment=traj.embodiment, frame=traj.frame)


def transform_trajectory(traj: StateTrajectory, T: RigidTransform, frame: Frame) -> StateTrajectory:
    """Apply a rigid transform to every pose, retagging the result frame."""
    poses = []
    for p in traj.poses:
        pos, q = geometry.transform_pose(T, p.position, p.orientation)
        poses.append(
            EndEffectorPose(position=pos, orientation=q, gripper=p.gripper, timestamp=p.timestamp)
        )
    return StateTrajectory(poses=poses, embodiment=traj.embodiment, frame=frame)
