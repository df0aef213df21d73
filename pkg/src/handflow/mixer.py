"""Deterministic balanced batch composition across human and robot data.

Every batch carries exactly floor(rho * B) human samples and B - floor(rho
* B) robot samples, shuffled within the batch, so both sources appear in
every minibatch as a hard guarantee. The scarce robot source draws with
replacement; the abundant human source cycles seeded per-epoch
permutations. Batch k is a pure function of (plan, index, k), which makes
schedules replayable and safely parallelizable.

Training manifest (JSON Lines): a header record carrying the plan, counts,
routes and stats reference, then one record per batch:
  {"batch": k, "samples": [[episode_id, t, embodiment, route], ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import FORMAT_VERSION, DatasetManifest
from .errors import EmptyEmbodiment, ParseError, VersionMismatch
from .retarget import Embodiment
from .seeding import derive_seed


@dataclass(frozen=True)
class SamplePointer:
    episode_id: str
    t: int
    embodiment: Embodiment
    route: str

    def to_record(self) -> list:
        return [self.episode_id, self.t, self.embodiment.value, self.route]

    @staticmethod
    def from_record(rec: list) -> "SamplePointer":
        return SamplePointer(
            episode_id=rec[0], t=int(rec[1]), embodiment=Embodiment(rec[2]), route=rec[3]
        )


@dataclass(frozen=True)
class MixPlan:
    batch_size: int
    human_fraction: float
    seed: int = 0
    epoch_length: int = 0  # informational; 0 = undeclared
    human_with_replacement: bool = False
    robot_with_replacement: bool = True

    def __post_init__(self):
        if self.batch_size < 2:
            raise ValueError("batch size must be at least 2 (one sample per source)")
        if not (0.0 < self.human_fraction < 1.0):
            raise ValueError("human_fraction must lie strictly inside (0, 1)")
        if self.human_per_batch < 1 or self.robot_per_batch < 1:
            raise ValueError(
                f"plan (B={self.batch_size}, rho={self.human_fraction}) leaves a "
                f"source without samples in the batch"
            )

    @property
    def human_per_batch(self) -> int:
        return int(np.floor(self.human_fraction * self.batch_size))

    @property
    def robot_per_batch(self) -> int:
        return self.batch_size - self.human_per_batch


def default_human_fraction(n_human: int, n_robot: int) -> float:
    """Proportional share of human samples, capped into [0.5, 0.9] so the
    scarce robot source keeps at least a 10% presence."""
    total = n_human + n_robot
    if total == 0:
        raise EmptyEmbodiment("no samples at all")
    return float(np.clip(n_human / total, 0.5, 0.9))


@dataclass
class SampleIndex:
    """All chunk positions per embodiment, in manifest order."""

    by_embodiment: dict[Embodiment, list[SamplePointer]]

    def count(self, embodiment: Embodiment) -> int:
        return len(self.by_embodiment.get(embodiment, []))

    @property
    def counts(self) -> dict[str, int]:
        return {e.value: len(v) for e, v in self.by_embodiment.items()}


def build_index(manifest: DatasetManifest) -> SampleIndex:
    """Enumerate every (episode, t) chunk position per embodiment.

    Raises EmptyEmbodiment when either source has zero samples; a valid
    mix plan always needs both.
    """
    by: dict[Embodiment, list[SamplePointer]] = {e: [] for e in Embodiment}
    for entry in manifest.episodes:
        route = manifest.routes.get(entry.embodiment.value, entry.embodiment.value)
        for t in range(entry.n_chunks):
            by[entry.embodiment].append(
                SamplePointer(
                    episode_id=entry.episode_id,
                    t=t,
                    embodiment=entry.embodiment,
                    route=route,
                )
            )
    for emb in (Embodiment.HUMAN_HAND, Embodiment.ROBOT):
        if not by[emb]:
            raise EmptyEmbodiment(
                f"embodiment '{emb.value}' has zero chunk samples; balanced "
                f"mixing needs both sources"
            )
    return SampleIndex(by_embodiment=by)


def _stream_positions(plan: MixPlan, source: str, n_source: int, start: int, count: int,
                      with_replacement: bool) -> list[int]:
    """Positions start..start+count-1 of the per-source sample stream.

    Without replacement the stream is a concatenation of per-epoch
    permutations (epoch e seeded from (seed, source, e)); with replacement
    each batch draws independently from its own derived generator.
    """
    if with_replacement:
        rng = np.random.default_rng(derive_seed(plan.seed, source, "draw", start))
        return list(rng.integers(0, n_source, size=count))
    out = []
    pos = start
    while count > 0:
        epoch, offset = divmod(pos, n_source)
        perm = np.random.default_rng(
            derive_seed(plan.seed, source, "epoch", epoch)
        ).permutation(n_source)
        take = min(count, n_source - offset)
        out.extend(int(v) for v in perm[offset : offset + take])
        pos += take
        count -= take
    return out


def next_batch(plan: MixPlan, index: SampleIndex, batch_counter: int) -> list[SamplePointer]:
    """Batch number batch_counter of the schedule, deterministically.

    Exactly plan.human_per_batch human and plan.robot_per_batch robot
    pointers, shuffled within the batch.
    """
    humans = index.by_embodiment[Embodiment.HUMAN_HAND]
    robots = index.by_embodiment[Embodiment.ROBOT]
    if not humans or not robots:
        raise EmptyEmbodiment("both embodiments must be indexed")
    nh, nr = plan.human_per_batch, plan.robot_per_batch
    h_pos = _stream_positions(
        plan, "human", len(humans), batch_counter * nh, nh, plan.human_with_replacement
    )
    r_pos = _stream_positions(
        plan, "robot", len(robots), batch_counter * nr, nr, plan.robot_with_replacement
    )
    batch = [humans[i] for i in h_pos] + [robots[i] for i in r_pos]
    order = np.random.default_rng(
        derive_seed(plan.seed, "shuffle", batch_counter)
    ).permutation(len(batch))
    return [batch[i] for i in order]


def emit_training_manifest(
    plan: MixPlan,
    index: SampleIndex,
    n_batches: int,
    path: str | Path,
    routes: dict[str, str] | None = None,
    stats_file: str | None = "stats.json",
) -> Path:
    """Materialize the full batch schedule for an external training stack."""
    path = Path(path)
    header = {
        "format_version": FORMAT_VERSION,
        "plan": {
            "batch_size": plan.batch_size,
            "human_fraction": plan.human_fraction,
            "seed": plan.seed,
            "epoch_length": plan.epoch_length,
            "human_with_replacement": plan.human_with_replacement,
            "robot_with_replacement": plan.robot_with_replacement,
        },
        "counts": index.counts,
        "routes": routes or {},
        "stats_file": stats_file,
        "n_batches": n_batches,
    }
    lines = [json.dumps(header, sort_keys=True)]
    for k in range(n_batches):
        batch = next_batch(plan, index, k)
        lines.append(
            json.dumps({"batch": k, "samples": [p.to_record() for p in batch]})
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_training_manifest(path: str | Path) -> tuple[dict, list[list[SamplePointer]]]:
    """Parse a schedule file back into its header and batches."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError(f"{path}: empty schedule")
    header = json.loads(lines[0])
    if header.get("format_version") != FORMAT_VERSION:
        raise VersionMismatch(
            f"{path}: schedule format {header.get('format_version')}, reader "
            f"supports {FORMAT_VERSION}"
        )
    batches = []
    for i, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        rec = json.loads(raw)
        if rec.get("batch") != len(batches):
            raise ParseError(f"batch records out of order at record {rec.get('batch')}", i)
        batches.append([SamplePointer.from_record(r) for r in rec["samples"]])
    if len(batches) != header.get("n_batches"):
        raise ParseError(f"{path}: schedule declares {header.get('n_batches')} batches, has {len(batches)}")
    return header, batches
