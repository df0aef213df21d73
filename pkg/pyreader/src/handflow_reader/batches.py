"""Replay materialized batch schedules.

A schedule (JSON Lines) starts with a header record (plan, per-source
counts, routes, stats reference, batch count) followed by one record per
batch: {"batch": k, "samples": [[episode_id, t, embodiment, route], ...]}.
The reader replays batches exactly in file order and never re-samples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .episodes import LoadedEpisode, load_episode, load_manifest
from .errors import FormatError, MissingEpisodeError, VersionError

SUPPORTED_VERSION = 1


@dataclass(frozen=True)
class SampleRef:
    episode_id: str
    t: int
    embodiment: str
    route: str


@dataclass
class Schedule:
    header: dict
    batches: list[list[SampleRef]]

    @property
    def batch_size(self) -> int:
        return int(self.header["plan"]["batch_size"])


def load_schedule(path: str | Path) -> Schedule:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise FormatError(f"{path}: empty schedule file")
    header = json.loads(lines[0])
    if header.get("format_version") != SUPPORTED_VERSION:
        raise VersionError(
            f"{path}: schedule format {header.get('format_version')}, reader "
            f"supports {SUPPORTED_VERSION}"
        )
    batches = []
    for raw in lines[1:]:
        if not raw.strip():
            continue
        rec = json.loads(raw)
        if rec.get("batch") != len(batches):
            raise FormatError(f"{path}: batch {rec.get('batch')} out of order")
        batches.append(
            [SampleRef(r[0], int(r[1]), r[2], r[3]) for r in rec["samples"]]
        )
    declared = header.get("n_batches")
    if declared is not None and declared != len(batches):
        raise FormatError(f"{path}: header declares {declared} batches, file has {len(batches)}")
    return Schedule(header=header, batches=batches)


@dataclass
class LoadedBatch:
    """One training batch in array form.

    states: (B, 8); actions: (B, h, 8); images: view name -> (B, H, W, 3)
    uint8 with all-zero tensors for padded views; routes and embodiments
    are per-sample."""

    batch_index: int
    states: np.ndarray
    actions: np.ndarray
    images: dict[str, np.ndarray]
    routes: list[str]
    embodiments: list[str]
    refs: list[SampleRef]


class _EpisodeCache:
    def __init__(self, root: Path):
        self.root = root
        self.manifest = load_manifest(root)
        self._cache: dict[str, LoadedEpisode] = {}

    def get(self, episode_id: str) -> LoadedEpisode:
        if episode_id not in self._cache:
            rel = self.manifest.episodes.get(episode_id)
            if rel is None:
                raise MissingEpisodeError(
                    f"schedule references episode '{episode_id}' which is not in the manifest"
                )
            ep_dir = self.root / rel
            if not (ep_dir / "meta.json").exists():
                raise MissingEpisodeError(
                    f"episode '{episode_id}' missing on disk at {ep_dir}"
                )
            self._cache[episode_id] = load_episode(ep_dir)
        return self._cache[episode_id]


def iterate_batches(
    schedule_path: str | Path,
    dataset_root: str | Path,
    load_images: bool = True,
) -> Iterator[LoadedBatch]:
    """Yield the schedule's batches in exact file order."""
    schedule = load_schedule(schedule_path)
    cache = _EpisodeCache(Path(dataset_root))
    for k, refs in enumerate(schedule.batches):
        states = []
        actions = []
        images: dict[str, list[np.ndarray]] = {}
        for ref in refs:
            ep = cache.get(ref.episode_id)
            if not (0 <= ref.t < ep.n_chunks):
                raise FormatError(
                    f"batch {k}: sample t={ref.t} outside episode "
                    f"'{ref.episode_id}' ({ep.n_chunks} chunks)"
                )
            states.append(ep.states[ref.t])
            actions.append(ep.actions[ref.t])
            if load_images:
                for view in ep.views:
                    images.setdefault(view, []).append(ep.frame(view, ref.t))
        yield LoadedBatch(
            batch_index=k,
            states=np.stack(states),
            actions=np.stack(actions),
            images={v: np.stack(frames) for v, frames in images.items()},
            routes=[r.route for r in refs],
            embodiments=[r.embodiment for r in refs],
            refs=refs,
        )
