"""Episode and manifest loading.

Format version 1. An episode directory holds meta.json plus little-endian
float32 payloads (timestamps.f32, states.f32, actions.f32) and per-view PNG
frame directories; views absent from an embodiment are declared zero-padded
with an explicit shape and materialize as all-zero tensors. Every payload
file's SHA-256 is recorded in meta.json and verified here.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ChecksumError, FormatError, MissingEpisodeError, VersionError

SUPPORTED_VERSION = 1
STATE_DIM = 8


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _read_f32(path: Path, shape, want_hash: str) -> np.ndarray:
    data = path.read_bytes()
    if _sha256(data) != want_hash:
        raise ChecksumError(f"{path}: bytes do not match the recorded hash")
    expect = int(np.prod(shape)) * 4
    if len(data) != expect:
        raise ChecksumError(f"{path}: {len(data)} bytes, expected {expect}")
    return np.frombuffer(data, dtype="<f4").reshape(shape).copy()


@dataclass
class ViewSpec:
    zero_padded: bool
    shape: tuple[int, int, int]
    frame_files: list[str]


@dataclass
class LoadedEpisode:
    episode_id: str
    embodiment: str
    task_text: str
    horizon: int
    timestamps: np.ndarray  # (N,) float32
    states: np.ndarray  # (N, 8) float32
    actions: np.ndarray  # (M, h, 8) float32
    views: dict[str, ViewSpec]
    path: Path

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_chunks(self) -> int:
        return len(self.actions)

    def frame(self, view: str, t: int) -> np.ndarray:
        """Frame t of a view; zero-padded views give all-zero tensors."""
        spec = self.views[view]
        if spec.zero_padded:
            return np.zeros(spec.shape, dtype=np.uint8)
        with Image.open(self.path / spec.frame_files[t]) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)

    def view_array(self, view: str) -> np.ndarray:
        """(N, H, W, 3) stack of a whole view."""
        spec = self.views[view]
        if spec.zero_padded:
            return np.zeros((self.n_states, *spec.shape), dtype=np.uint8)
        return np.stack([self.frame(view, t) for t in range(self.n_states)])


def load_episode(path: str | Path, verify_frames: bool = True) -> LoadedEpisode:
    """Load one episode directory, verifying version and payload hashes."""
    path = Path(path)
    meta_file = path / "meta.json"
    if not meta_file.exists():
        raise MissingEpisodeError(f"{path}: no meta.json")
    try:
        meta = json.loads(meta_file.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise FormatError(f"{meta_file}: {e}") from e
    version = meta.get("format_version")
    if version != SUPPORTED_VERSION:
        raise VersionError(
            f"{path}: format version {version}, reader supports {SUPPORTED_VERSION}"
        )
    try:
        hashes = meta["hashes"]
        shapes = meta["shapes"]
        timestamps = _read_f32(
            path / "timestamps.f32", shapes["timestamps.f32"], hashes["timestamps.f32"]
        )
        states = _read_f32(path / "states.f32", shapes["states.f32"], hashes["states.f32"])
        actions = _read_f32(path / "actions.f32", shapes["actions.f32"], hashes["actions.f32"])
        views = {}
        for name, view in meta["views"].items():
            if view["zero_padded"]:
                views[name] = ViewSpec(True, tuple(view["shape"]), [])
                continue
            files = list(view["frames"])
            if verify_frames:
                for rel in files:
                    blob = (path / rel).read_bytes()
                    if _sha256(blob) != hashes[rel]:
                        raise ChecksumError(f"{path / rel}: frame hash mismatch")
            views[name] = ViewSpec(False, tuple(view["shape"]), files)
        return LoadedEpisode(
            episode_id=meta["episode_id"],
            embodiment=meta["embodiment"],
            task_text=meta["task_text"],
            horizon=int(meta["horizon"]),
            timestamps=timestamps,
            states=states,
            actions=actions,
            views=views,
            path=path,
        )
    except KeyError as e:
        raise FormatError(f"{path}: meta.json missing field {e}") from e


@dataclass
class Manifest:
    root: Path
    horizon: int
    routes: dict[str, str]
    episodes: dict[str, str]  # episode_id -> relative path
    embodiments: dict[str, str]  # episode_id -> embodiment
    stats_file: str | None


def load_manifest(root: str | Path) -> Manifest:
    root = Path(root)
    path = root / "manifest.json"
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise FormatError(f"{root}: no manifest.json")
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: {e}") from e
    if data.get("format_version") != SUPPORTED_VERSION:
        raise VersionError(
            f"{path}: format version {data.get('format_version')}, reader "
            f"supports {SUPPORTED_VERSION}"
        )
    return Manifest(
        root=root,
        horizon=int(data["horizon"]),
        routes=dict(data["routes"]),
        episodes={e["episode_id"]: e["path"] for e in data["episodes"]},
        embodiments={e["episode_id"]: e["embodiment"] for e in data["episodes"]},
        stats_file=data.get("stats_file"),
    )
