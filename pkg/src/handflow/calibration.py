"""Hand-eye calibration and pinhole camera intrinsics.

Calibration file (JSON): {"camera_id": str, "matrix": [16 reals, row-major
4x4 camera-to-base transform], "rms_error": optional meters}.

Intrinsics file (JSON): {"fx", "fy", "cx", "cy": pixels, "width", "height":
ints}. No lens distortion model: inputs come from consumer RGB cameras and
a distortion model would be speculative.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BehindCamera, InvalidMatrix, ParseError
from .geometry import RigidTransform

BOTTOM_ROW_TOL = 1e-12
ORTHONORMAL_ACCEPT_TOL = 1e-9
ORTHONORMAL_REPAIR_TOL = 1e-6
NEAR_PLANE = 1e-6


@dataclass(frozen=True)
class CameraModel:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")


@dataclass(frozen=True)
class HandEyeCalibration:
    T_cam_to_base: RigidTransform
    camera_id: str
    rms_error: float | None = None


def _orthonormalize(R: np.ndarray) -> np.ndarray:
    """Nearest rotation matrix via polar decomposition (SVD)."""
    U, _, Vt = np.linalg.svd(R)
    out = U @ Vt
    if np.linalg.det(out) < 0:
        out = U @ np.diag([1.0, 1.0, -1.0]) @ Vt
    return out


def load_calibration(path: str | Path) -> HandEyeCalibration:
    """Load and validate a hand-eye calibration file.

    Rotation blocks already orthonormal to ORTHONORMAL_ACCEPT_TOL pass
    through untouched (keeps save/load byte-exact); blocks within
    ORTHONORMAL_REPAIR_TOL are re-orthonormalized by polar decomposition;
    anything further off, or with negative determinant, is rejected as
    InvalidMatrix.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e}") from e
    if not isinstance(data, dict):
        raise ParseError(f"{path}: calibration file must hold a JSON object")
    matrix = data.get("matrix")
    if not isinstance(matrix, list) or len(matrix) != 16:
        raise ParseError(f"{path}: 'matrix' must be a 16-element row-major list")
    camera_id = data.get("camera_id")
    if not isinstance(camera_id, str):
        raise ParseError(f"{path}: 'camera_id' must be a string")
    rms = data.get("rms_error")
    if rms is not None and not isinstance(rms, (int, float)):
        raise ParseError(f"{path}: 'rms_error' must be a number")

    M = np.asarray(matrix, dtype=np.float64).reshape(4, 4)
    if not np.all(np.isfinite(M)):
        raise InvalidMatrix("calibration matrix has non-finite entries")
    if np.max(np.abs(M[3] - np.array([0.0, 0.0, 0.0, 1.0]))) > BOTTOM_ROW_TOL:
        raise InvalidMatrix(f"bottom row must be (0, 0, 0, 1), got {M[3]}")
    R = M[:3, :3]
    if np.linalg.det(R) <= 0:
        raise InvalidMatrix("rotation block has non-positive determinant")
    deviation = float(np.max(np.abs(R.T @ R - np.eye(3))))
    if deviation > ORTHONORMAL_REPAIR_TOL:
        raise InvalidMatrix(
            f"rotation block deviates from orthonormal by {deviation:.3e} "
            f"(repair limit {ORTHONORMAL_REPAIR_TOL})"
        )
    if deviation > ORTHONORMAL_ACCEPT_TOL:
        R = _orthonormalize(R)
    return HandEyeCalibration(
        T_cam_to_base=RigidTransform(R, M[:3, 3].copy()),
        camera_id=camera_id,
        rms_error=float(rms) if rms is not None else None,
    )


def save_calibration(cal: HandEyeCalibration, path: str | Path) -> None:
    data: dict = {
        "camera_id": cal.camera_id,
        "matrix": [float(v) for v in cal.T_cam_to_base.as_matrix().reshape(-1)],
    }
    if cal.rms_error is not None:
        data["rms_error"] = cal.rms_error
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def load_intrinsics(path: str | Path) -> CameraModel:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e}") from e
    try:
        return CameraModel(
            fx=float(data["fx"]),
            fy=float(data["fy"]),
            cx=float(data["cx"]),
            cy=float(data["cy"]),
            width=int(data["width"]),
            height=int(data["height"]),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"{path}: bad intrinsics: {e}") from e


def save_intrinsics(cam: CameraModel, path: str | Path) -> None:
    data = {
        "fx": cam.fx,
        "fy": cam.fy,
        "cx": cam.cx,
        "cy": cam.cy,
        "width": cam.width,
        "height": cam.height,
    }
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def project_point(cam: CameraModel, p: np.ndarray) -> tuple[float, float]:
    """Pinhole projection of a camera-frame point to pixel coordinates.

    Raises BehindCamera for points with z <= NEAR_PLANE.
    """
    x, y, z = np.asarray(p, dtype=np.float64).reshape(3)
    if z <= NEAR_PLANE:
        raise BehindCamera(f"point depth {z} is behind the near plane")
    return cam.fx * (x / z) + cam.cx, cam.fy * (y / z) + cam.cy


def project_points(cam: CameraModel, pts: np.ndarray) -> np.ndarray:
    """Vectorized pinhole projection; caller guarantees z > NEAR_PLANE."""
    pts = np.asarray(pts, dtype=np.float64)
    z = pts[:, 2]
    return np.column_stack(
        [cam.fx * (pts[:, 0] / z) + cam.cx, cam.fy * (pts[:, 1] / z) + cam.cy]
    )
