"""3D math primitives: vectors, quaternions, rigid transforms, plane fitting.

Conventions used throughout the package:
  - vectors are float64 arrays of shape (3,), meters
  - quaternions are float64 arrays of shape (4,) in (w, x, y, z) order,
    unit norm, sign-canonicalized (w >= 0, tie-break on first nonzero)
  - rotation matrices are (3, 3) float64, right-handed, det = +1
  - all angles are radians
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFit, ParallelAxes

IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])

# Eigenvalue-gap tolerance for plane-fit degeneracy and axis parallelism
# tolerance, scaled to double precision at hand scale (~0.1 m).
EIGENVALUE_TIE_TOL = 1e-12
PARALLEL_AXIS_TOL = 1e-9


def as_vec3(v) -> np.ndarray:
    """Coerce to a finite (3,) float64 vector."""
    a = np.asarray(v, dtype=np.float64).reshape(3)
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite vector: {a}")
    return a


def quat_canonical(q: np.ndarray) -> np.ndarray:
    """Fix the sign ambiguity: w >= 0, tie-break first nonzero component > 0."""
    q = np.asarray(q, dtype=np.float64).reshape(4)
    for c in q:
        if c > 0.0:
            return q.copy()
        if c < 0.0:
            return -q
    return q.copy()


def quat_normalize(q) -> np.ndarray:
    """Return the unit, sign-canonical quaternion closest to q."""
    q = np.asarray(q, dtype=np.float64).reshape(4)
    n = float(np.linalg.norm(q))
    if n == 0.0 or not np.isfinite(n):
        raise ValueError("cannot normalize zero/non-finite quaternion")
    return quat_canonical(q / n)


def quat_multiply(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Hamilton product q1 * q2 (apply q2 first, then q1)."""
    w1, x1, y1, z1 = q1
    w2, x2, y2, z2 = q2
    return np.array(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ]
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector v by unit quaternion q."""
    return matrix_from_quat(q) @ np.asarray(v, dtype=np.float64)


def quat_angle(q0: np.ndarray, q1: np.ndarray) -> float:
    """Relative rotation angle between two unit quaternions, in [0, pi].

    atan2 form: accurate for tiny angles where acos of the dot product
    loses ~8 digits.
    """
    rel = quat_multiply(quat_conjugate(np.asarray(q0, dtype=np.float64)), np.asarray(q1, dtype=np.float64))
    return 2.0 * float(np.arctan2(np.linalg.norm(rel[1:]), abs(rel[0])))


def matrix_from_quat(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_from_matrix(R: np.ndarray) -> np.ndarray:
    """Rotation matrix to quaternion, Shepperd-style branch selection.

    Branching on the largest of trace / diagonal entries keeps the divisor
    well away from zero, so the conversion is stable near trace = -1.
    """
    R = np.asarray(R, dtype=np.float64)
    t = R[0, 0] + R[1, 1] + R[2, 2]
    if t > R[0, 0] and t > R[1, 1] and t > R[2, 2]:
        s = np.sqrt(t + 1.0) * 2.0
        q = np.array(
            [
                0.25 * s,
                (R[2, 1] - R[1, 2]) / s,
                (R[0, 2] - R[2, 0]) / s,
                (R[1, 0] - R[0, 1]) / s,
            ]
        )
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        q = np.array(
            [
                (R[2, 1] - R[1, 2]) / s,
                0.25 * s,
                (R[0, 1] + R[1, 0]) / s,
                (R[0, 2] + R[2, 0]) / s,
            ]
        )
    elif R[1, 1] > R[2, 2]:
        s = np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        q = np.array(
            [
                (R[0, 2] - R[2, 0]) / s,
                (R[0, 1] + R[1, 0]) / s,
                0.25 * s,
                (R[1, 2] + R[2, 1]) / s,
            ]
        )
    else:
        s = np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        q = np.array(
            [
                (R[1, 0] - R[0, 1]) / s,
                (R[0, 2] + R[2, 0]) / s,
                (R[1, 2] + R[2, 1]) / s,
                0.25 * s,
            ]
        )
    return quat_normalize(q)


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation matrix for a unit axis and angle in radians."""
    axis = as_vec3(axis)
    n = float(np.linalg.norm(axis))
    if n < PARALLEL_AXIS_TOL:
        raise ValueError("rotation axis has near-zero norm")
    x, y, z = axis / n
    c, s = np.cos(angle), np.sin(angle)
    C = 1.0 - c
    return np.array(
        [
            [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
            [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
            [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
        ]
    )


def axis_angle_from_matrix(R: np.ndarray) -> np.ndarray:
    """Rotation vector (axis * angle) of R; the SO(3) log map."""
    t = float(np.trace(R))
    c = np.clip((t - 1.0) * 0.5, -1.0, 1.0)
    angle = float(np.arccos(c))
    if angle < 1e-9:
        # First-order: R ~ I + [w]x
        return 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if np.pi - angle < 1e-6:
        # Near pi the antisymmetric part vanishes; recover axis from R + I.
        A = 0.5 * (R + np.eye(3))
        axis = np.sqrt(np.clip(np.diag(A), 0.0, None))
        k = int(np.argmax(axis))
        if axis[k] > 0.0:
            axis = A[:, k] / axis[k]
            axis[k] = np.sqrt(max(0.0, A[k, k]))
        n = float(np.linalg.norm(axis))
        if n > 0.0:
            axis = axis / n
        # Sign of the axis from the (small) antisymmetric residual.
        w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
        if float(np.dot(axis, w)) < 0.0:
            axis = -axis
        return axis * angle
    s = angle / (2.0 * np.sin(angle))
    return s * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])


def is_rotation_matrix(R: np.ndarray, tol: float = 1e-9) -> bool:
    R = np.asarray(R, dtype=np.float64)
    if R.shape != (3, 3):
        return False
    ortho = float(np.max(np.abs(R.T @ R - np.eye(3))))
    return ortho <= tol and abs(float(np.linalg.det(R)) - 1.0) <= tol


@dataclass(frozen=True)
class RigidTransform:
    """Rigid map p -> rotation @ p + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform(np.eye(3), np.zeros(3))

    @staticmethod
    def from_matrix(M: np.ndarray) -> "RigidTransform":
        M = np.asarray(M, dtype=np.float64)
        return RigidTransform(M[:3, :3].copy(), M[:3, 3].copy())

    def as_matrix(self) -> np.ndarray:
        M = np.eye(4)
        M[:3, :3] = self.rotation
        M[:3, 3] = self.translation
        return M

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self after other: (self o other)(p) = self(other(p))."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return self.compose(other)

    def inverse(self) -> "RigidTransform":
        Rt = self.rotation.T
        return RigidTransform(Rt, -(Rt @ self.translation))

    def apply(self, p) -> np.ndarray:
        """Transform one point (3,) or a stack of points (..., 3)."""
        p = np.asarray(p, dtype=np.float64)
        return p @ self.rotation.T + self.translation


@dataclass(frozen=True)
class Plane:
    """Least-squares plane: unit normal (sign unresolved), centroid, RMS residual."""

    normal: np.ndarray
    centroid: np.ndarray
    residual_rms: float


def fit_plane(points) -> Plane:
    """Total-least-squares plane through n >= 3 points.

    The normal is the covariance eigenvector with the smallest eigenvalue.
    Its sign is NOT resolved here; callers disambiguate.

    Raises DegenerateFit when the two smallest covariance eigenvalues are
    within EIGENVALUE_TIE_TOL of each other (collinear or coincident input).
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 3:
        raise ValueError("fit_plane needs an (n, 3) array with n >= 3")
    if not np.all(np.isfinite(pts)):
        raise ValueError("fit_plane: non-finite input points")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    cov = (centered.T @ centered) / pts.shape[0]
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals[1] - eigvals[0] <= EIGENVALUE_TIE_TOL:
        raise DegenerateFit(
            f"plane fit degenerate: smallest covariance eigenvalues "
            f"{eigvals[0]:.3e} and {eigvals[1]:.3e} are tied"
        )
    normal = eigvecs[:, 0]
    normal = normal / float(np.linalg.norm(normal))
    dists = centered @ normal
    residual_rms = float(np.sqrt(np.mean(dists * dists)))
    return Plane(normal=normal, centroid=centroid, residual_rms=residual_rms)


def frame_from_axes(x_hint: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Rotation matrix with Z = normalize(z), X = x_hint projected off Z.

    Columns are [X Y Z] with Y = Z x X, so the result maps the canonical
    basis onto the constructed frame.
    """
    x_hint = as_vec3(x_hint)
    z = as_vec3(z)
    zn = float(np.linalg.norm(z))
    if zn < PARALLEL_AXIS_TOL:
        raise ParallelAxes("z axis has near-zero norm")
    if float(np.linalg.norm(np.cross(x_hint, z))) < PARALLEL_AXIS_TOL:
        raise ParallelAxes("x hint is parallel to the z axis")
    Z = z / zn
    X = x_hint - float(np.dot(x_hint, Z)) * Z
    X = X / float(np.linalg.norm(X))
    Y = np.cross(Z, X)
    return np.column_stack([X, Y, Z])


def transform_pose(
    T: RigidTransform, p: np.ndarray, q: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Map a pose (position, orientation) through a rigid transform."""
    p2 = T.apply(p)
    q2 = quat_canonical(quat_multiply(quat_from_matrix(T.rotation), q))
    return p2, q2


def slerp(q0: np.ndarray, q1: np.ndarray, t: float) -> np.ndarray:
    """Shortest-arc spherical interpolation between unit quaternions.

    Constant angular velocity in t; endpoints reproduce the inputs up to
    quaternion sign (the result is sign-canonicalized).
    """
    q0 = np.asarray(q0, dtype=np.float64)
    q1 = np.asarray(q1, dtype=np.float64)
    dot = float(np.dot(q0, q1))
    if dot < 0.0:
        q1 = -q1
        dot = -dot
    if dot > 1.0 - 1e-12:
        # Angles this small are below slerp's numerical floor; nlerp is exact
        # to first order and avoids 0/0.
        return quat_normalize(q0 + t * (q1 - q0))
    theta = np.arccos(min(dot, 1.0))
    s = np.sin(theta)
    return quat_normalize(
        (np.sin((1.0 - t) * theta) / s) * q0 + (np.sin(t * theta) / s) * q1
    )
