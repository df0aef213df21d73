"""Synthetic hand tracks and demo bundles with known ground truth.

The hand template is a flat right hand: index finger along +x, thumb on the
-y side, palm plane z = 0 with the palm facing +z. Its anchor point (thumb
IP / index MCP midpoint) sits at the origin and its palm orientation is the
identity, so a template posed with rotation R and translation p retargets
back to exactly (p, R).
"""

from __future__ import annotations

import numpy as np

from . import kinematics
from .geometry import RigidTransform
from .hand import NUM_KEYPOINTS, HandFrame, Handedness, HandTrack, Keypoint


def hand_template(grip_distance: float = 0.08) -> np.ndarray:
    """Canonical right-hand keypoints (21, 3) with a controllable aperture.

    The thumb tip is placed so the thumb-to-index fingertip distance equals
    grip_distance exactly; the five palm-plane keypoints are unaffected.
    """
    kp = np.zeros((NUM_KEYPOINTS, 3))
    kp[Keypoint.WRIST] = (-0.07, -0.005, 0.004)
    kp[Keypoint.THUMB_CMC] = (-0.045, -0.028, 0.003)
    kp[Keypoint.THUMB_MCP] = (-0.016, -0.026, 0.001)
    kp[Keypoint.THUMB_IP] = (0.0, -0.02, 0.0)
    kp[Keypoint.INDEX_MCP] = (0.0, 0.02, 0.0)
    kp[Keypoint.INDEX_PIP] = (0.035, 0.02, 0.0)
    kp[Keypoint.INDEX_DIP] = (0.06, 0.02, 0.0)
    kp[Keypoint.INDEX_TIP] = (0.08, 0.02, 0.0)
    kp[Keypoint.THUMB_TIP] = kp[Keypoint.INDEX_TIP] + (0.0, -grip_distance, 0.0)
    for f, base_y in ((Keypoint.MIDDLE_MCP, 0.042), (Keypoint.RING_MCP, 0.063), (Keypoint.PINKY_MCP, 0.082)):
        for k, x in enumerate((0.0, 0.032, 0.055, 0.073)):
            kp[f + k] = (x - 0.004 * (f - Keypoint.MIDDLE_MCP) / 4, base_y, 0.003)
    return kp


def posed_hand_frame(
    timestamp: float,
    pose_cam: RigidTransform,
    grip_distance: float = 0.08,
    confidence: float = 1.0,
    with_vertices: bool = False,
) -> HandFrame:
    """Template hand placed at a camera-frame pose.

    When with_vertices is set, the demo blob mesh rides along at the anchor
    so mesh-dependent stages (rendering, augmentation) have input.
    """
    kp = pose_cam.apply(hand_template(grip_distance))
    verts = None
    if with_vertices:
        cloud, _ = demo_mesh_cloud()
        verts = pose_cam.apply(cloud)
    return HandFrame(
        timestamp=timestamp,
        keypoints=kp,
        confidence=confidence,
        handedness=Handedness.RIGHT,
        vertices=verts,
    )


DEMO_POSTURE = np.array([0.3, 0.7, -1.2, 0.4, -0.8, 0.5])


def smooth_joint_path(
    chain: kinematics.KinematicChain, n: int, amplitude: float = 0.25
) -> np.ndarray:
    """C1 joint-space path around a bent working posture, inside the limits.

    The posture keeps the wrist away from its aligned singularity so warm
    started IK tracks the path without branch flips.
    """
    base = chain.clamp(DEMO_POSTURE[: chain.dof])
    t = np.linspace(0.0, 1.0, n)[:, None]
    phases = np.linspace(0.0, np.pi, chain.dof)[None, :]
    path = base[None, :] + amplitude * np.sin(np.pi * t) * np.cos(2 * np.pi * t + phases)
    return np.clip(path, chain.limits_low() + 1e-6, chain.limits_high() - 1e-6)


def grasp_track(
    chain: kinematics.KinematicChain,
    T_cam_to_base: RigidTransform,
    n_frames: int = 60,
    fps: float = 15.0,
    d_max: float = 0.09,
    d_min: float = 0.02,
    camera_id: str = "top",
    with_vertices: bool = False,
) -> tuple[HandTrack, np.ndarray]:
    """Scripted grasp: FK poses on a smooth joint path, aperture ramping
    d_max -> d_min. Returns the camera-frame hand track and the ground
    truth joint path.

    The hand keypoints are constructed so retargeting through T_cam_to_base
    reproduces the FK poses in the base frame exactly (up to float error).
    """
    T_base_to_cam = T_cam_to_base.inverse()
    qs = smooth_joint_path(chain, n_frames)
    distances = np.linspace(d_max, d_min, n_frames)
    frames = []
    for i in range(n_frames):
        ee = kinematics.forward_kinematics(chain, qs[i])
        pose_cam = T_base_to_cam @ ee
        frames.append(
            posed_hand_frame(
                timestamp=i / fps,
                pose_cam=pose_cam,
                grip_distance=float(distances[i]),
                with_vertices=with_vertices,
            )
        )
    return (
        HandTrack(frames=frames, source_fps=fps, camera_id=camera_id),
        qs,
    )


def sphere_mesh(
    center, radius: float, n_lat: int = 8, n_lon: int = 12
) -> tuple[np.ndarray, np.ndarray]:
    """UV-sphere vertices and faces; n_lat interior rings plus two poles."""
    center = np.asarray(center, dtype=np.float64)
    verts = [center + [0.0, 0.0, radius]]
    for i in range(1, n_lat + 1):
        phi = np.pi * i / (n_lat + 1)
        for j in range(n_lon):
            theta = 2 * np.pi * j / n_lon
            verts.append(
                center
                + radius
                * np.array(
                    [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)]
                )
            )
    verts.append(center + [0.0, 0.0, -radius])
    faces = []
    def ring(i, j):
        return 1 + i * n_lon + (j % n_lon)
    for j in range(n_lon):
        faces.append([0, ring(0, j), ring(0, j + 1)])
        faces.append([len(verts) - 1, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)])
    for i in range(n_lat - 1):
        for j in range(n_lon):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            faces.append([a, b, c])
            faces.append([b, d, c])
    return np.array(verts), np.array(faces, dtype=np.int32)


def demo_mesh_cloud(n_vertices: int = 778) -> tuple[np.ndarray, np.ndarray]:
    """Blob mesh stand-in for an upstream hand mesh, sized like a palm.

    A UV sphere is padded with inert duplicate vertices up to n_vertices so
    the cloud flows through the 778-vertex track format; faces never index
    the padding.
    """
    n_lat, n_lon = 24, 32  # 770 sphere vertices
    verts, faces = sphere_mesh([0.0, 0.0, 0.0], 0.045, n_lat=n_lat, n_lon=n_lon)
    pad = n_vertices - len(verts)
    if pad < 0:
        raise ValueError("sphere larger than requested vertex budget")
    verts = np.vstack([verts, np.tile(verts[-1], (pad, 1))])
    return verts, faces


def demo_topology() -> "MeshTopology":
    """Topology for the demo blob mesh, parts labeled by nearest keypoint
    of the canonical template."""
    from .rasterize import MeshTopology, label_vertices_by_nearest_keypoint

    verts, faces = demo_mesh_cloud()
    parts = label_vertices_by_nearest_keypoint(verts, hand_template())
    return MeshTopology(faces=faces, vertex_parts=parts)


def demo_hand_eye() -> RigidTransform:
    """Fixed camera looking straight down at the demo workspace.

    Centered over the demo joint path's end-effector envelope so the hand
    and its mesh stay in frame with positive depth everywhere.
    """
    x_cam = np.array([0.0, -1.0, 0.0])
    y_cam = np.array([-1.0, 0.0, 0.0])
    z_cam = np.array([0.0, 0.0, -1.0])
    R = np.column_stack([x_cam, y_cam, z_cam])
    return RigidTransform(R, np.array([-0.04, -0.02, 0.75]))
