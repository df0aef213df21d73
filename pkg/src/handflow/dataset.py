"""Episode data model and on-disk dataset format.

A state/action sample is the 8-vector (px, py, pz, qw, qx, qy, qz, g).
Action chunks hold the next h states: chunk t has actions[k] = state(t+1+k).

Episode directory layout (format version 1):

  <root>/manifest.json                    dataset manifest
  <root>/stats.json                       per-embodiment normalization stats
  <root>/episodes/<id>/meta.json          ids, embodiment, task text, shapes,
                                          view declarations, payload hashes
  <root>/episodes/<id>/timestamps.f32     (N,)    little-endian float32
  <root>/episodes/<id>/states.f32         (N, 8)  little-endian float32
  <root>/episodes/<id>/actions.f32        (M, h, 8) little-endian float32
  <root>/episodes/<id>/views/<view>/<nnnnnn>.png   RGB8 frames

Views absent from an embodiment (the wrist camera for human data) are
declared in meta.json as zero-padded with an explicit shape; readers
materialize them as all-zero tensors. Every payload file's SHA-256 is
recorded in meta.json and checked on read. Episode directories are written
to a temp path and renamed into place, so readers never see partial
episodes.
"""

from __future__ import annotations

import enum
import hashlib
import json
import os
import shutil
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import geometry
from .errors import (
    ChecksumMismatch,
    EmptySet,
    ParseError,
    VersionMismatch,
    ViewMismatch,
)
from .images import load_image, save_image
from .retarget import Embodiment, EndEffectorPose, Frame, StateTrajectory

FORMAT_VERSION = 1
STATE_DIM = 8

DEFAULT_ROUTES = {
    Embodiment.HUMAN_HAND.value: "human_head",
    Embodiment.ROBOT.value: "robot_head",
}


def pose_to_vector(pose: EndEffectorPose) -> np.ndarray:
    return np.concatenate([pose.position, pose.orientation, [pose.gripper]])


def vector_to_pose(vec: np.ndarray, timestamp: float) -> EndEffectorPose:
    vec = np.asarray(vec, dtype=np.float64)
    return EndEffectorPose(
        position=vec[:3],
        orientation=geometry.quat_normalize(vec[3:7]),
        gripper=float(np.clip(vec[7], 0.0, 1.0)),
        timestamp=timestamp,
    )


def trajectory_to_arrays(traj: StateTrajectory) -> tuple[np.ndarray, np.ndarray]:
    """(timestamps, states) as float32, the on-disk precision."""
    ts = np.array([p.timestamp for p in traj.poses], dtype=np.float32)
    states = np.stack([pose_to_vector(p) for p in traj.poses]).astype(np.float32)
    return ts, states


@dataclass(frozen=True)
class ActionChunk:
    """h future states; chunk at index t satisfies actions[k] = state(t+1+k)."""

    actions: np.ndarray  # (h, 8) float32
    start_index: int

    @property
    def horizon(self) -> int:
        return len(self.actions)


def make_chunks_from_states(states: np.ndarray, h: int) -> list[ActionChunk]:
    if h < 1:
        raise ValueError("chunk horizon must be >= 1")
    n = len(states)
    return [
        ActionChunk(actions=states[t + 1 : t + 1 + h], start_index=t)
        for t in range(max(0, n - h))
    ]


def make_chunks(traj: StateTrajectory, h: int) -> list[ActionChunk]:
    """Chunk a trajectory; trajectories shorter than h + 1 yield no chunks."""
    _, states = trajectory_to_arrays(traj)
    return make_chunks_from_states(states, h)


@dataclass(frozen=True)
class ZeroPadded:
    """Marker for a camera view absent from this embodiment's data."""

    shape: tuple[int, int, int]


@dataclass
class Episode:
    episode_id: str
    embodiment: Embodiment
    task_text: str
    horizon: int
    timestamps: np.ndarray  # (N,) float32
    states: np.ndarray  # (N, 8) float32
    chunks: list[ActionChunk]
    camera_streams: dict[str, list[np.ndarray] | ZeroPadded]

    @staticmethod
    def from_trajectory(
        episode_id: str,
        task_text: str,
        traj: StateTrajectory,
        horizon: int,
        camera_streams: dict[str, list[np.ndarray] | ZeroPadded],
    ) -> "Episode":
        ts, states = trajectory_to_arrays(traj)
        return Episode(
            episode_id=episode_id,
            embodiment=traj.embodiment,
            task_text=task_text,
            horizon=horizon,
            timestamps=ts,
            states=states,
            chunks=make_chunks_from_states(states, horizon),
            camera_streams=camera_streams,
        )

    @property
    def n_states(self) -> int:
        return len(self.states)

    def chunk_array(self) -> np.ndarray:
        if not self.chunks:
            return np.zeros((0, self.horizon, STATE_DIM), dtype=np.float32)
        return np.stack([c.actions for c in self.chunks])

    def validate(self) -> list[str]:
        """Re-check every episode invariant; returns human-readable findings."""
        findings = []
        expect = max(0, self.n_states - self.horizon)
        if len(self.chunks) != expect:
            findings.append(
                f"{self.episode_id}: chunk count {len(self.chunks)}, expected {expect}"
            )
        rederived = make_chunks_from_states(self.states, self.horizon)
        for got, want in zip(self.chunks, rederived):
            if got.actions.shape != want.actions.shape or not np.array_equal(
                got.actions, want.actions
            ):
                findings.append(
                    f"{self.episode_id}: chunk t={got.start_index} does not equal "
                    f"states[t+1 : t+1+h]"
                )
        if self.timestamps.shape != (self.n_states,):
            findings.append(f"{self.episode_id}: timestamp/state count mismatch")
        elif np.any(np.diff(self.timestamps) <= 0):
            findings.append(f"{self.episode_id}: timestamps not strictly increasing")
        quat_norm = np.linalg.norm(self.states[:, 3:7].astype(np.float64), axis=1)
        bad = np.nonzero(np.abs(quat_norm - 1.0) > 1e-6)[0]
        if bad.size:
            findings.append(
                f"{self.episode_id}: non-unit quaternion at state index {bad[0]}"
            )
        if np.any(self.states[:, 7] < 0.0) or np.any(self.states[:, 7] > 1.0):
            findings.append(f"{self.episode_id}: gripper outside [0, 1]")
        for name, stream in self.camera_streams.items():
            if isinstance(stream, ZeroPadded):
                continue
            if len(stream) != self.n_states:
                findings.append(
                    f"{self.episode_id}: view '{name}' has {len(stream)} frames "
                    f"for {self.n_states} states"
                )
        return findings


# ---------------------------------------------------------------------------
# normalization statistics


class NormScheme(enum.Enum):
    MIN_MAX_TO_UNIT = "min_max_to_unit"
    Z_SCORE = "z_score"


@dataclass
class DimensionStats:
    """Streaming-mergeable per-dimension statistics (Chan's method)."""

    count: int
    minimum: np.ndarray
    maximum: np.ndarray
    mean: np.ndarray
    m2: np.ndarray  # sum of squared deviations from the mean

    @staticmethod
    def from_array(arr: np.ndarray) -> "DimensionStats":
        arr = np.asarray(arr, dtype=np.float64).reshape(-1, arr.shape[-1])
        if arr.size == 0:
            raise EmptySet("cannot compute statistics of an empty array")
        mean = arr.mean(axis=0)
        return DimensionStats(
            count=len(arr),
            minimum=arr.min(axis=0),
            maximum=arr.max(axis=0),
            mean=mean,
            m2=((arr - mean) ** 2).sum(axis=0),
        )

    def merge(self, other: "DimensionStats") -> "DimensionStats":
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        m2 = self.m2 + other.m2 + delta * delta * (self.count * other.count / n)
        return DimensionStats(
            count=n,
            minimum=np.minimum(self.minimum, other.minimum),
            maximum=np.maximum(self.maximum, other.maximum),
            mean=mean,
            m2=m2,
        )

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.m2 / self.count)

    @property
    def constant_dims(self) -> np.ndarray:
        """Indices of dimensions with no spread; they normalize to 0."""
        return np.nonzero(self.maximum == self.minimum)[0]


@dataclass
class NormalizationStats:
    """Per-embodiment, per-dimension stats over states and chunk actions."""

    per_embodiment: dict[str, dict[str, DimensionStats]]

    def block(self, embodiment: Embodiment, kind: str = "state") -> DimensionStats:
        return self.per_embodiment[embodiment.value][kind]


def compute_stats(episodes: list[Episode]) -> NormalizationStats:
    """Stats over each embodiment's own data only.

    Accumulation is streaming (per-episode blocks merged with a numerically
    stable method), so incremental and one-shot computation agree.
    """
    if not episodes:
        raise EmptySet("no episodes to compute statistics over")
    acc: dict[str, dict[str, DimensionStats]] = {}
    for ep in episodes:
        blocks = {}
        if ep.n_states:
            blocks["state"] = DimensionStats.from_array(ep.states)
        if ep.chunks:
            blocks["action"] = DimensionStats.from_array(
                ep.chunk_array().reshape(-1, STATE_DIM)
            )
        slot = acc.setdefault(ep.embodiment.value, {})
        for kind, block in blocks.items():
            slot[kind] = slot[kind].merge(block) if kind in slot else block
    if not acc:
        raise EmptySet("episodes contained no states")
    return NormalizationStats(per_embodiment=acc)


def normalize(x: np.ndarray, stats: DimensionStats, scheme: NormScheme) -> np.ndarray:
    """Map raw values into the scheme's range; constant dimensions go to 0."""
    x = np.asarray(x, dtype=np.float64)
    span = stats.maximum - stats.minimum
    if scheme is NormScheme.MIN_MAX_TO_UNIT:
        safe = np.where(span == 0.0, 1.0, span)
        out = (x - stats.minimum) / safe
    elif scheme is NormScheme.Z_SCORE:
        std = stats.std
        safe = np.where(std == 0.0, 1.0, std)
        out = (x - stats.mean) / safe
    else:
        raise ValueError(f"unknown scheme {scheme}")
    out = np.where(span == 0.0, 0.0, out)
    return out


def denormalize(x: np.ndarray, stats: DimensionStats, scheme: NormScheme) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    span = stats.maximum - stats.minimum
    if scheme is NormScheme.MIN_MAX_TO_UNIT:
        out = x * span + stats.minimum
        return np.where(span == 0.0, stats.minimum, out)
    if scheme is NormScheme.Z_SCORE:
        out = x * stats.std + stats.mean
        return np.where(span == 0.0, stats.mean, out)
    raise ValueError(f"unknown scheme {scheme}")


def _stats_block_to_json(b: DimensionStats) -> dict:
    return {
        "count": b.count,
        "min": [float(v) for v in b.minimum],
        "max": [float(v) for v in b.maximum],
        "mean": [float(v) for v in b.mean],
        "std": [float(v) for v in b.std],
        "m2": [float(v) for v in b.m2],
        "constant_dims": [int(i) for i in b.constant_dims],
    }


def _stats_block_from_json(d: dict) -> DimensionStats:
    return DimensionStats(
        count=int(d["count"]),
        minimum=np.asarray(d["min"], dtype=np.float64),
        maximum=np.asarray(d["max"], dtype=np.float64),
        mean=np.asarray(d["mean"], dtype=np.float64),
        m2=np.asarray(d["m2"], dtype=np.float64),
    )


def save_stats(stats: NormalizationStats, path: str | Path) -> None:
    data = {
        "format_version": FORMAT_VERSION,
        "per_embodiment": {
            emb: {kind: _stats_block_to_json(b) for kind, b in blocks.items()}
            for emb, blocks in stats.per_embodiment.items()
        },
    }
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_stats(path: str | Path) -> NormalizationStats:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if data.get("format_version") != FORMAT_VERSION:
        raise VersionMismatch(
            f"{path}: stats format {data.get('format_version')}, reader supports {FORMAT_VERSION}"
        )
    return NormalizationStats(
        per_embodiment={
            emb: {kind: _stats_block_from_json(b) for kind, b in blocks.items()}
            for emb, blocks in data["per_embodiment"].items()
        }
    )


# ---------------------------------------------------------------------------
# episode serialization


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _payload_bytes(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f4").tobytes()


def write_episode(ep: Episode, root: str | Path) -> Path:
    """Write an episode directory atomically; returns its final path."""
    root = Path(root)
    final = root / "episodes" / ep.episode_id
    tmp = final.with_name(final.name + f".tmp-{os.getpid()}")
    if tmp.exists():
        shutil.rmtree(tmp)
    tmp.mkdir(parents=True)

    hashes: dict[str, str] = {}
    payloads = {
        "timestamps.f32": np.asarray(ep.timestamps, dtype="<f4"),
        "states.f32": np.asarray(ep.states, dtype="<f4"),
        "actions.f32": ep.chunk_array().astype("<f4"),
    }
    for name, arr in payloads.items():
        data = _payload_bytes(arr)
        (tmp / name).write_bytes(data)
        hashes[name] = _sha256(data)

    views_meta: dict[str, dict] = {}
    for name, stream in sorted(ep.camera_streams.items()):
        if isinstance(stream, ZeroPadded):
            views_meta[name] = {"zero_padded": True, "shape": list(stream.shape)}
            continue
        shape = list(stream[0].shape) if stream else [0, 0, 3]
        files = []
        for i, frame in enumerate(stream):
            rel = f"views/{name}/{i:06d}.png"
            save_image(frame, tmp / rel)
            hashes[rel] = _sha256((tmp / rel).read_bytes())
            files.append(rel)
        views_meta[name] = {"zero_padded": False, "shape": shape, "frames": files}

    meta = {
        "format_version": FORMAT_VERSION,
        "episode_id": ep.episode_id,
        "embodiment": ep.embodiment.value,
        "task_text": ep.task_text,
        "horizon": ep.horizon,
        "shapes": {
            "timestamps.f32": [ep.n_states],
            "states.f32": [ep.n_states, STATE_DIM],
            "actions.f32": [len(ep.chunks), ep.horizon, STATE_DIM],
        },
        "views": views_meta,
        "hashes": hashes,
    }
    (tmp / "meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    if final.exists():
        shutil.rmtree(final)
    final.parent.mkdir(parents=True, exist_ok=True)
    os.replace(tmp, final)
    return final


def _read_payload(path: Path, shape: list[int], want_hash: str) -> np.ndarray:
    data = path.read_bytes()
    if _sha256(data) != want_hash:
        raise ChecksumMismatch(f"{path}: payload does not match its recorded hash")
    expect = int(np.prod(shape)) * 4
    if len(data) != expect:
        raise ChecksumMismatch(f"{path}: payload length {len(data)}, expected {expect}")
    return np.frombuffer(data, dtype="<f4").reshape(shape).copy()


def read_episode(path: str | Path, load_frames: bool = True) -> Episode:
    """Read and verify an episode directory (version, hashes, shapes)."""
    path = Path(path)
    meta_path = path / "meta.json"
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError(f"{path}: not an episode directory (no meta.json)")
    except json.JSONDecodeError as e:
        raise ParseError(f"{meta_path}: {e}") from e
    version = meta.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(
            f"{path}: episode format version {version}; this reader supports "
            f"{FORMAT_VERSION}. Re-export the dataset or upgrade the package."
        )
    hashes = meta["hashes"]
    shapes = meta["shapes"]
    timestamps = _read_payload(
        path / "timestamps.f32", shapes["timestamps.f32"], hashes["timestamps.f32"]
    )
    states = _read_payload(path / "states.f32", shapes["states.f32"], hashes["states.f32"])
    actions = _read_payload(path / "actions.f32", shapes["actions.f32"], hashes["actions.f32"])

    streams: dict[str, list[np.ndarray] | ZeroPadded] = {}
    for name, view in meta["views"].items():
        if view["zero_padded"]:
            streams[name] = ZeroPadded(shape=tuple(view["shape"]))
            continue
        frames = []
        for rel in view["frames"]:
            fpath = path / rel
            blob = fpath.read_bytes()
            if _sha256(blob) != hashes[rel]:
                raise ChecksumMismatch(f"{fpath}: frame does not match its recorded hash")
            if load_frames:
                img = load_image(fpath)
                if list(img.shape) != list(view["shape"]):
                    raise ViewMismatch(
                        f"{fpath}: frame shape {list(img.shape)} != declared {view['shape']}"
                    )
                frames.append(img)
        streams[name] = frames if load_frames else []

    horizon = int(meta["horizon"])
    chunks = [
        ActionChunk(actions=actions[t], start_index=t) for t in range(len(actions))
    ]
    return Episode(
        episode_id=meta["episode_id"],
        embodiment=Embodiment(meta["embodiment"]),
        task_text=meta["task_text"],
        horizon=horizon,
        timestamps=timestamps,
        states=states,
        chunks=chunks,
        camera_streams=streams,
    )


# ---------------------------------------------------------------------------
# dataset manifest


@dataclass
class ManifestEntry:
    episode_id: str
    path: str
    embodiment: Embodiment
    n_chunks: int


@dataclass
class DatasetManifest:
    root: Path
    horizon: int
    episodes: list[ManifestEntry]
    routes: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_ROUTES))
    view_shapes: dict[str, tuple[int, int, int]] = field(default_factory=dict)
    stats_file: str | None = "stats.json"

    def entries_for(self, embodiment: Embodiment) -> list[ManifestEntry]:
        return [e for e in self.episodes if e.embodiment is embodiment]


def write_manifest(manifest: DatasetManifest, root: str | Path) -> Path:
    root = Path(root)
    data = {
        "format_version": FORMAT_VERSION,
        "horizon": manifest.horizon,
        "routes": manifest.routes,
        "view_shapes": {k: list(v) for k, v in manifest.view_shapes.items()},
        "stats_file": manifest.stats_file,
        "episodes": [
            {
                "episode_id": e.episode_id,
                "path": e.path,
                "embodiment": e.embodiment.value,
                "n_chunks": e.n_chunks,
            }
            for e in manifest.episodes
        ],
    }
    out = root / "manifest.json"
    out.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return out


def read_manifest(root: str | Path, check_paths: bool = True) -> DatasetManifest:
    root = Path(root)
    path = root / "manifest.json"
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError(f"{root}: no manifest.json")
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e}") from e
    if data.get("format_version") != FORMAT_VERSION:
        raise VersionMismatch(
            f"{path}: manifest format {data.get('format_version')}, reader supports {FORMAT_VERSION}"
        )
    episodes = [
        ManifestEntry(
            episode_id=e["episode_id"],
            path=e["path"],
            embodiment=Embodiment(e["embodiment"]),
            n_chunks=int(e["n_chunks"]),
        )
        for e in data["episodes"]
    ]
    if check_paths:
        for e in episodes:
            if not (root / e.path / "meta.json").exists():
                raise ParseError(f"{path}: episode '{e.episode_id}' missing at {e.path}")
    return DatasetManifest(
        root=root,
        horizon=int(data["horizon"]),
        episodes=episodes,
        routes=dict(data["routes"]),
        view_shapes={k: tuple(v) for k, v in data.get("view_shapes", {}).items()},
        stats_file=data.get("stats_file"),
    )


def manifest_from_episodes(
    root: str | Path,
    episodes: list[Episode],
    routes: dict[str, str] | None = None,
    view_shapes: dict[str, tuple[int, int, int]] | None = None,
) -> DatasetManifest:
    if not episodes:
        raise EmptySet("cannot build a manifest from zero episodes")
    horizons = {ep.horizon for ep in episodes}
    if len(horizons) > 1:
        raise ValueError(f"episodes disagree on horizon: {sorted(horizons)}")
    entries = [
        ManifestEntry(
            episode_id=ep.episode_id,
            path=f"episodes/{ep.episode_id}",
            embodiment=ep.embodiment,
            n_chunks=len(ep.chunks),
        )
        for ep in episodes
    ]
    return DatasetManifest(
        root=Path(root),
        horizon=horizons.pop(),
        episodes=entries,
        routes=routes or dict(DEFAULT_ROUTES),
        view_shapes=view_shapes or {},
    )


# ---------------------------------------------------------------------------
# robot teleoperation log import


def import_robot_log(path: str | Path, horizon: int) -> Episode:
    """Import a teleoperation log (JSON Lines) into an Episode.

    Header: {"fps", "episode_id", "task_text",
             "views": {"top": {"width", "height", "dir"},
                       "wrist": {"width", "height", "dir"}}}
    Frames: {"t", "pos": [3], "quat": [4, wxyz], "gripper",
             "frames": {"top": relpath, "wrist": relpath}}

    Robot data must carry both camera views; a missing view (in the header
    or any frame record) is a ParseError, and a frame whose PNG resolution
    differs from the header declaration is a ViewMismatch.
    """
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError(f"{path}: empty robot log")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise ParseError(f"bad header record: {e}", 1) from e
    views = header.get("views")
    if not isinstance(views, dict) or set(views) != {"top", "wrist"}:
        raise ParseError("robot log header must declare exactly the views 'top' and 'wrist'", 1)
    episode_id = header.get("episode_id")
    task_text = header.get("task_text", "")
    if not isinstance(episode_id, str) or not episode_id:
        raise ParseError("header must carry a non-empty 'episode_id'", 1)

    declared = {
        name: (int(v["height"]), int(v["width"]), 3) for name, v in views.items()
    }
    poses: list[EndEffectorPose] = []
    frame_files: dict[str, list[Path]] = {"top": [], "wrist": []}
    last_t = None
    for i, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ParseError(f"bad frame record: {e}", i) from e
        try:
            t = float(rec["t"])
            pos = np.asarray(rec["pos"], dtype=np.float64).reshape(3)
            quat = np.asarray(rec["quat"], dtype=np.float64).reshape(4)
            grip = float(rec["gripper"])
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"bad frame fields: {e}", i) from e
        if last_t is not None and t <= last_t:
            raise ParseError(f"timestamp {t} does not increase past {last_t}", i)
        last_t = t
        norm = float(np.linalg.norm(quat))
        if abs(norm - 1.0) > 1e-6:
            raise ParseError(f"quaternion norm {norm} deviates from 1 beyond 1e-6", i)
        if not (0.0 <= grip <= 1.0):
            raise ParseError(f"gripper {grip} outside [0, 1]", i)
        refs = rec.get("frames")
        if not isinstance(refs, dict) or set(refs) != {"top", "wrist"}:
            raise ParseError("robot frames must reference both 'top' and 'wrist' images", i)
        for name in ("top", "wrist"):
            frame_files[name].append(path.parent / refs[name])
        poses.append(
            EndEffectorPose(
                position=pos,
                orientation=geometry.quat_canonical(quat / norm),
                gripper=grip,
                timestamp=t,
            )
        )
    if not poses:
        raise ParseError(f"{path}: robot log has no frame records")

    streams: dict[str, list[np.ndarray] | ZeroPadded] = {}
    for name, files in frame_files.items():
        frames = []
        for f in files:
            if not f.exists():
                raise ParseError(f"{path}: missing image file {f}")
            img = load_image(f)
            if img.shape != declared[name]:
                raise ViewMismatch(
                    f"{f}: resolution {img.shape} differs from declared {declared[name]}"
                )
            frames.append(img)
        streams[name] = frames

    traj = StateTrajectory(poses=poses, embodiment=Embodiment.ROBOT, frame=Frame.ROBOT_BASE)
    return Episode.from_trajectory(episode_id, task_text, traj, horizon, streams)


# ---------------------------------------------------------------------------
# whole-dataset validation


def validate_dataset(root: str | Path) -> list[str]:
    """Re-check every on-disk invariant; returns findings (empty = clean)."""
    root = Path(root)
    findings: list[str] = []
    try:
        manifest = read_manifest(root, check_paths=False)
    except (ParseError, VersionMismatch) as e:
        return [str(e)]
    seen = set()
    for entry in manifest.episodes:
        if entry.episode_id in seen:
            findings.append(f"manifest: duplicate episode id '{entry.episode_id}'")
        seen.add(entry.episode_id)
        ep_dir = root / entry.path
        if not (ep_dir / "meta.json").exists():
            findings.append(f"manifest: episode '{entry.episode_id}' missing at {entry.path}")
            continue
        try:
            ep = read_episode(ep_dir)
        except (ParseError, VersionMismatch, ChecksumMismatch, ViewMismatch) as e:
            findings.append(f"{entry.episode_id}: {e}")
            continue
        if ep.embodiment is not entry.embodiment:
            findings.append(
                f"{entry.episode_id}: embodiment {ep.embodiment.value} != manifest "
                f"{entry.embodiment.value}"
            )
        if ep.horizon != manifest.horizon:
            findings.append(
                f"{entry.episode_id}: horizon {ep.horizon} != manifest {manifest.horizon}"
            )
        if len(ep.chunks) != entry.n_chunks:
            findings.append(
                f"{entry.episode_id}: {len(ep.chunks)} chunks != manifest {entry.n_chunks}"
            )
        if ep.embodiment.value not in manifest.routes:
            findings.append(
                f"{entry.episode_id}: no action-head route for embodiment "
                f"{ep.embodiment.value}"
            )
        for name, stream in ep.camera_streams.items():
            if isinstance(stream, ZeroPadded):
                want = manifest.view_shapes.get(name)
                if want is not None and tuple(stream.shape) != tuple(want):
                    findings.append(
                        f"{entry.episode_id}: zero-padded view '{name}' shape "
                        f"{stream.shape} != manifest {want}"
                    )
        findings.extend(ep.validate())
    if manifest.stats_file:
        stats_path = root / manifest.stats_file
        if stats_path.exists():
            try:
                load_stats(stats_path)
            except (VersionMismatch, KeyError, ValueError) as e:
                findings.append(f"stats: {e}")
    return findings
