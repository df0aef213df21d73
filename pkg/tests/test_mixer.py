import pytest

from conftest import random_episode
from handflow.dataset import manifest_from_episodes, write_episode, write_manifest
from handflow.errors import EmptyEmbodiment
from handflow.mixer import (
    MixPlan,
    SampleIndex,
    build_index,
    default_human_fraction,
    emit_training_manifest,
    next_batch,
    read_training_manifest,
)
from handflow.retarget import Embodiment


def manifest_with(rng, tmp_path, human_chunks=(10, 10), robot_chunks=(5,), horizon=4):
    eps = []
    for i, n in enumerate(human_chunks):
        eps.append(
            random_episode(rng, f"h{i}", n_states=n + horizon, horizon=horizon)
        )
    for i, n in enumerate(robot_chunks):
        eps.append(
            random_episode(
                rng, f"r{i}", n_states=n + horizon, horizon=horizon, embodiment=Embodiment.ROBOT
            )
        )
    for ep in eps:
        write_episode(ep, tmp_path)
    manifest = manifest_from_episodes(tmp_path, eps)
    write_manifest(manifest, tmp_path)
    return manifest


class TestBuildIndex:
    def test_counts(self, rng, tmp_path):
        manifest = manifest_with(rng, tmp_path, human_chunks=(10, 10), robot_chunks=(5,))
        index = build_index(manifest)
        assert index.counts == {"human_hand": 20, "robot": 5}

    def test_pointers_valid(self, rng, tmp_path):
        manifest = manifest_with(rng, tmp_path)
        index = build_index(manifest)
        for emb, pointers in index.by_embodiment.items():
            for p in pointers:
                entry = next(e for e in manifest.episodes if e.episode_id == p.episode_id)
                assert 0 <= p.t < entry.n_chunks
                assert p.embodiment is emb

    def test_human_only_rejected(self, rng, tmp_path):
        eps = [random_episode(rng, "h0"), random_episode(rng, "h1")]
        for ep in eps:
            write_episode(ep, tmp_path)
        manifest = manifest_from_episodes(tmp_path, eps)
        with pytest.raises(EmptyEmbodiment):
            build_index(manifest)

    def test_routes_attached(self, rng, tmp_path):
        manifest = manifest_with(rng, tmp_path)
        index = build_index(manifest)
        for p in index.by_embodiment[Embodiment.HUMAN_HAND]:
            assert p.route == manifest.routes["human_hand"]
        for p in index.by_embodiment[Embodiment.ROBOT]:
            assert p.route == manifest.routes["robot"]


class TestMixPlan:
    def test_split_counts(self):
        assert MixPlan(batch_size=32, human_fraction=0.5).human_per_batch == 16
        plan = MixPlan(batch_size=10, human_fraction=0.9)
        assert plan.human_per_batch == 9
        assert plan.robot_per_batch == 1

    def test_degenerate_plans_rejected(self):
        with pytest.raises(ValueError):
            MixPlan(batch_size=4, human_fraction=0.1)  # floor(0.4) = 0 humans
        # fraction outside (0, 1) is always rejected
        with pytest.raises(ValueError):
            MixPlan(batch_size=8, human_fraction=1.0)
        with pytest.raises(ValueError):
            MixPlan(batch_size=8, human_fraction=0.0)
        # boundary-legal plan: both sources keep at least one slot
        plan = MixPlan(batch_size=2, human_fraction=0.999)
        assert plan.human_per_batch == 1
        assert plan.robot_per_batch == 1

    def test_default_fraction_capped(self):
        assert default_human_fraction(1000, 10) == 0.9
        assert default_human_fraction(10, 1000) == 0.5
        assert default_human_fraction(60, 40) == pytest.approx(0.6)


class TestNextBatch:
    def test_exact_split_every_batch(self, rng, tmp_path):
        manifest = manifest_with(rng, tmp_path)
        index = build_index(manifest)
        plan = MixPlan(batch_size=8, human_fraction=0.75, seed=11)
        for k in range(200):
            batch = next_batch(plan, index, k)
            assert len(batch) == 8
            n_h = sum(1 for p in batch if p.embodiment is Embodiment.HUMAN_HAND)
            assert n_h == 6
            assert sum(1 for p in batch if p.embodiment is Embodiment.ROBOT) == 2

    def test_deterministic(self, rng, tmp_path):
        manifest = manifest_with(rng, tmp_path)
        index = build_index(manifest)
        plan = MixPlan(batch_size=8, human_fraction=0.5, seed=3)
        a = [next_batch(plan, index, k) for k in range(50)]
        b = [next_batch(plan, index, k) for k in range(50)]
        assert a == b

    def test_seed_changes_schedule(self, rng, tmp_path):
        manifest = manifest_with(rng, tmp_path)
        index = build_index(manifest)
        a = [next_batch(MixPlan(8, 0.5, seed=1), index, k) for k in range(10)]
        b = [next_batch(MixPlan(8, 0.5, seed=2), index, k) for k in range(10)]
        assert a != b

    def test_human_epoch_without_replacement(self, rng, tmp_path):
        # across one full human epoch every human sample appears exactly once
        manifest = manifest_with(rng, tmp_path, human_chunks=(12, 12), robot_chunks=(4,))
        index = build_index(manifest)
        plan = MixPlan(batch_size=8, human_fraction=0.75, seed=5)  # 6 humans/batch
        seen = []
        for k in range(4):  # 24 human draws = one epoch
            for p in next_batch(plan, index, k):
                if p.embodiment is Embodiment.HUMAN_HAND:
                    seen.append((p.episode_id, p.t))
        assert len(seen) == 24
        assert len(set(seen)) == 24

    def test_route_names_correct(self, rng, tmp_path):
        manifest = manifest_with(rng, tmp_path)
        index = build_index(manifest)
        plan = MixPlan(batch_size=6, human_fraction=0.5, seed=9)
        for k in range(40):
            for p in next_batch(plan, index, k):
                want = manifest.routes[p.embodiment.value]
                assert p.route == want


class TestScheduleFile:
    def test_empty_schedule_valid(self, rng, tmp_path):
        manifest = manifest_with(rng, tmp_path)
        index = build_index(manifest)
        plan = MixPlan(batch_size=8, human_fraction=0.5, seed=1)
        out = emit_training_manifest(plan, index, 0, tmp_path / "schedule.jsonl")
        header, batches = read_training_manifest(out)
        assert batches == []
        assert header["counts"] == {"human_hand": 20, "robot": 5}

    def test_replay_reproduces_file(self, rng, tmp_path):
        manifest = manifest_with(rng, tmp_path)
        index = build_index(manifest)
        plan = MixPlan(batch_size=8, human_fraction=0.75, seed=21)
        out = emit_training_manifest(
            plan, index, 64, tmp_path / "schedule.jsonl", routes=manifest.routes
        )
        _, batches = read_training_manifest(out)
        for k, batch in enumerate(batches):
            assert batch == next_batch(plan, index, k)

    def test_frequencies_match_fraction(self, rng, tmp_path):
        manifest = manifest_with(rng, tmp_path)
        index = build_index(manifest)
        plan = MixPlan(batch_size=16, human_fraction=0.75, seed=2)
        n_h = 0
        total = 0
        for k in range(2000):
            for p in next_batch(plan, index, k):
                n_h += p.embodiment is Embodiment.HUMAN_HAND
                total += 1
        assert abs(n_h / total - 0.75) < 1e-3

    def test_emitted_file_deterministic(self, rng, tmp_path):
        manifest = manifest_with(rng, tmp_path)
        index = build_index(manifest)
        plan = MixPlan(batch_size=8, human_fraction=0.5, seed=7)
        a = emit_training_manifest(plan, index, 32, tmp_path / "a.jsonl")
        b = emit_training_manifest(plan, index, 32, tmp_path / "b.jsonl")
        assert a.read_bytes() == b.read_bytes()
