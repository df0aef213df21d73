"""Serial-arm forward kinematics and damped-least-squares inverse kinematics.

Chain model: revolute joints, each described by a fixed link transform
(`origin_offset`, the pose of the joint frame at zero angle relative to the
previous frame) followed by a rotation about `axis` in that frame. The end
effector adds a fixed `tool_offset`.

Chain config file (JSON):
  {"name": str,
   "joints": [{"axis": [3], "offset": {"translation": [3], "rpy": [3]},
               "limits": [lo, hi]}, ...],
   "tool_offset": {"translation": [3], "rpy": [3]}}
rpy is (roll, pitch, yaw) applied as Rz(yaw) @ Ry(pitch) @ Rx(roll).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import geometry
from .errors import ParseError
from .geometry import RigidTransform
from .retarget import StateTrajectory


@dataclass(frozen=True)
class Joint:
    axis: np.ndarray  # unit (3,), in the joint's own frame
    origin_offset: RigidTransform
    limits: tuple[float, float]

    def __post_init__(self):
        n = float(np.linalg.norm(self.axis))
        if abs(n - 1.0) > 1e-9:
            object.__setattr__(self, "axis", self.axis / n)
        if self.limits[0] >= self.limits[1]:
            raise ValueError(f"joint limits {self.limits} must satisfy min < max")


class _ChainTables:
    """Per-joint constants prefactored for the FK/Jacobian hot loop."""

    def __init__(self, chain: "KinematicChain"):
        n = chain.dof
        self.r_off = np.stack([j.origin_offset.rotation for j in chain.joints])
        self.t_off = np.stack([j.origin_offset.translation for j in chain.joints])
        self.axes = np.stack([j.axis for j in chain.joints])
        self.skew = np.zeros((n, 3, 3))
        for i, (x, y, z) in enumerate(self.axes):
            self.skew[i] = [[0, -z, y], [z, 0, -x], [-y, x, 0]]
        self.skew2 = self.skew @ self.skew
        self.r_tool = chain.tool_offset.rotation
        self.t_tool = chain.tool_offset.translation
        self.eye = np.eye(3)


@dataclass(frozen=True)
class KinematicChain:
    """Serial revolute chain. The shipped robot model has 6 joints; the
    math is generic over joint count so reduced chains can be tested."""

    joints: list[Joint]
    tool_offset: RigidTransform
    name: str = "chain"

    @property
    def dof(self) -> int:
        return len(self.joints)

    @cached_property
    def _tables(self) -> _ChainTables:
        return _ChainTables(self)

    @cached_property
    def _limits(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.array([j.limits[0] for j in self.joints]),
            np.array([j.limits[1] for j in self.joints]),
        )

    def limits_low(self) -> np.ndarray:
        return self._limits[0]

    def limits_high(self) -> np.ndarray:
        return self._limits[1]

    def mid_range(self) -> np.ndarray:
        return 0.5 * (self._limits[0] + self._limits[1])

    def clamp(self, q: np.ndarray) -> np.ndarray:
        return np.clip(q, self._limits[0], self._limits[1])


def _rpy_matrix(rpy) -> np.ndarray:
    roll, pitch, yaw = [float(v) for v in rpy]
    Rx = geometry.rotation_about_axis(np.array([1.0, 0.0, 0.0]), roll)
    Ry = geometry.rotation_about_axis(np.array([0.0, 1.0, 0.0]), pitch)
    Rz = geometry.rotation_about_axis(np.array([0.0, 0.0, 1.0]), yaw)
    return Rz @ Ry @ Rx


def _transform_from_config(obj: dict) -> RigidTransform:
    t = np.asarray(obj.get("translation", [0.0, 0.0, 0.0]), dtype=np.float64)
    R = _rpy_matrix(obj.get("rpy", [0.0, 0.0, 0.0]))
    return RigidTransform(R, t)


def load_chain(path: str | Path, require_dof: int | None = 6) -> KinematicChain:
    """Load a chain config; by default enforce the 6-joint robot contract."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e}") from e
    try:
        joints = [
            Joint(
                axis=np.asarray(j["axis"], dtype=np.float64),
                origin_offset=_transform_from_config(j.get("offset", {})),
                limits=(float(j["limits"][0]), float(j["limits"][1])),
            )
            for j in data["joints"]
        ]
        tool = _transform_from_config(data.get("tool_offset", {}))
        name = data.get("name", path.stem)
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"{path}: bad chain config: {e}") from e
    if require_dof is not None and len(joints) != require_dof:
        raise ParseError(f"{path}: chain must have {require_dof} joints, has {len(joints)}")
    return KinematicChain(joints=joints, tool_offset=tool, name=name)


def default_chain_path() -> Path:
    return Path(__file__).parent / "data" / "so100_plus.json"


def load_default_chain() -> KinematicChain:
    return load_chain(default_chain_path())


def _fk_pass(
    chain: KinematicChain, q: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One kinematics sweep: world joint axes, joint origins, end rotation
    and position. Shared by FK, the Jacobian, and the IK hot loop."""
    tb = chain._tables
    n = chain.dof
    R = tb.eye
    t = np.zeros(3)
    axes_w = np.empty((n, 3))
    origins = np.empty((n, 3))
    cos_q = np.cos(q)
    sin_q = np.sin(q)
    for i in range(n):
        t = R @ tb.t_off[i] + t
        R = R @ tb.r_off[i]
        axes_w[i] = R @ tb.axes[i]
        origins[i] = t
        Rj = tb.eye + sin_q[i] * tb.skew[i] + (1.0 - cos_q[i]) * tb.skew2[i]
        R = R @ Rj
    p_ee = R @ tb.t_tool + t
    R_ee = R @ tb.r_tool
    return axes_w, origins, R_ee, p_ee


def forward_kinematics(chain: KinematicChain, q: np.ndarray) -> RigidTransform:
    """End-effector pose for joint angles q (radians)."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (chain.dof,):
        raise ValueError(f"expected {chain.dof} joint angles, got shape {q.shape}")
    _, _, R_ee, p_ee = _fk_pass(chain, q)
    return RigidTransform(R_ee, p_ee)


def jacobian(chain: KinematicChain, q: np.ndarray) -> np.ndarray:
    """Geometric Jacobian in the world frame, shape (6, dof).

    Rows 0..2 are linear velocity (axis x (p_ee - p_joint)), rows 3..5
    angular velocity (the joint axis).
    """
    q = np.asarray(q, dtype=np.float64)
    axes_w, origins, _, p_ee = _fk_pass(chain, q)
    J = np.empty((6, chain.dof))
    J[:3] = np.cross(axes_w, p_ee - origins).T
    J[3:] = axes_w.T
    return J


@dataclass(frozen=True)
class IkOptions:
    """Damped-least-squares settings.

    max_iters is the total iteration budget. When the error stops improving
    for stall_window iterations the solve restarts from a deterministic
    uniform-in-limits seed; restarts spend the same shared budget. Set
    stall_window = 0 to disable restarts.

    Defaults were tuned on FK-generated random targets: damping 0.03 with
    restarts converges on >97% of uniform in-limit targets from a mid-range
    seed; larger damping slows the crawl through near-singular valleys and
    measurably lowers the success rate.
    """

    damping: float = 0.03
    max_iters: int = 1000
    pos_tol: float = 1e-4
    rot_tol: float = 1e-3
    stall_window: int = 6
    restart_seed: int = 0x5EED

    def __post_init__(self):
        if self.damping <= 0:
            raise ValueError("damping must be positive")


@dataclass(frozen=True)
class IkResult:
    joints: np.ndarray
    converged: bool
    iterations: int
    position_error: float
    orientation_error: float


def pose_error(
    current: RigidTransform, target_pos: np.ndarray, target_rot: np.ndarray
) -> tuple[np.ndarray, float, float]:
    """Error twist (6,) from current to target, plus its magnitudes."""
    e_pos = target_pos - current.translation
    e_rot = geometry.axis_angle_from_matrix(target_rot @ current.rotation.T)
    return (
        np.concatenate([e_pos, e_rot]),
        float(np.linalg.norm(e_pos)),
        float(np.linalg.norm(e_rot)),
    )


def solve_ik(
    chain: KinematicChain,
    target: tuple[np.ndarray, np.ndarray],
    seed: np.ndarray,
    opts: IkOptions = IkOptions(),
) -> IkResult:
    """Damped least squares IK: dq = J^T (J J^T + lambda^2 I)^-1 e.

    target is (position, orientation quaternion). Joint limits are enforced
    by clamping after every update. The iteration can park at a singular
    configuration with the residual in the lost direction; such stalls are
    detected and restarted from deterministic alternative seeds within the
    shared iteration budget, so the solve stays a pure function of
    (chain, target, seed, opts). Non-convergence is a normal result
    (converged=False), not an error.
    """
    target_pos = np.asarray(target[0], dtype=np.float64)
    target_rot = geometry.matrix_from_quat(np.asarray(target[1], dtype=np.float64))
    lo, hi = chain.limits_low(), chain.limits_high()
    q = chain.clamp(np.asarray(seed, dtype=np.float64).copy())
    lam2 = opts.damping * opts.damping
    damp = lam2 * np.eye(6)

    best_q = q
    best_err = np.inf
    best_pos = best_rot = np.inf
    stall_err = np.inf
    since_improve = 0
    attempt = 0
    it = 0
    while True:
        axes_w, origins, R_ee, p_ee = _fk_pass(chain, q)
        e_pos = target_pos - p_ee
        e_rot = geometry.axis_angle_from_matrix(target_rot @ R_ee.T)
        pos_err = float(np.linalg.norm(e_pos))
        rot_err = float(np.linalg.norm(e_rot))
        # single scalar for stall detection and best-iterate tracking;
        # 0.1 puts 1 mm and 10 mrad on equal footing
        err = pos_err + 0.1 * rot_err
        if err < best_err:
            best_err, best_q, best_pos, best_rot = err, q, pos_err, rot_err
        if pos_err <= opts.pos_tol and rot_err <= opts.rot_tol:
            return IkResult(
                joints=q,
                converged=True,
                iterations=it,
                position_error=pos_err,
                orientation_error=rot_err,
            )
        if it >= opts.max_iters:
            break

        if err < stall_err - 1e-12:
            stall_err = err
            since_improve = 0
        else:
            since_improve += 1
        if opts.stall_window and since_improve >= opts.stall_window:
            attempt += 1
            rng = np.random.default_rng(opts.restart_seed + attempt)
            q = lo + rng.uniform(size=chain.dof) * (hi - lo)
            stall_err = np.inf
            since_improve = 0
            it += 1
            continue

        J = np.empty((6, chain.dof))
        J[:3] = np.cross(axes_w, p_ee - origins).T
        J[3:] = axes_w.T
        e = np.concatenate([e_pos, e_rot])
        dq = J.T @ np.linalg.solve(J @ J.T + damp, e)
        q = chain.clamp(q + dq)
        it += 1

    return IkResult(
        joints=best_q,
        converged=False,
        iterations=it,
        position_error=best_pos,
        orientation_error=best_rot,
    )


@dataclass
class TrajectoryValidation:
    results: list[IkResult]
    reachable_fraction: float  # NaN when the trajectory is empty
    max_joint_jump: float
    joint_trajectory: np.ndarray | None = None

    @property
    def empty(self) -> bool:
        return not self.results


def validate_trajectory(
    chain: KinematicChain,
    traj: StateTrajectory,
    opts: IkOptions = IkOptions(),
    seed: np.ndarray | None = None,
    keep_joints: bool = False,
) -> TrajectoryValidation:
    """Check a base-frame trajectory for executability.

    Poses are solved sequentially, each seeded with the previous solution
    (warm start); the first pose is seeded mid-range unless a seed is given.
    """
    if not traj.poses:
        return TrajectoryValidation(results=[], reachable_fraction=float("nan"), max_joint_jump=0.0)
    q = chain.mid_range() if seed is None else np.asarray(seed, dtype=np.float64)
    results: list[IkResult] = []
    joints = []
    max_jump = 0.0
    prev_q: np.ndarray | None = None
    for pose in traj.poses:
        res = solve_ik(chain, (pose.position, pose.orientation), q, opts)
        results.append(res)
        joints.append(res.joints)
        if prev_q is not None:
            max_jump = max(max_jump, float(np.max(np.abs(res.joints - prev_q))))
        prev_q = res.joints
        q = res.joints
    frac = sum(1 for r in results if r.converged) / len(results)
    return TrajectoryValidation(
        results=results,
        reachable_fraction=frac,
        max_joint_jump=max_jump,
        joint_trajectory=np.stack(joints) if keep_joints else None,
    )
