import json

import numpy as np
import pytest

from handflow.errors import EmptyTrack, NonMonotonicTime, ParseError
from handflow.geometry import RigidTransform
from handflow.hand import (
    Handedness,
    HandFrame,
    HandTrack,
    Keypoint,
    parse_hand_track,
    reject_flicker,
    resample_track,
    write_hand_track,
)
from handflow.synthetic import hand_template, posed_hand_frame


def frame_record(t, kp, hand="R", conf=0.9, verts=None):
    rec = {"t": t, "hand": hand, "conf": conf, "kp": [float(v) for v in np.reshape(kp, -1)]}
    if verts is not None:
        rec["verts"] = [float(v) for v in np.reshape(verts, -1)]
    return json.dumps(rec)


def write_track_file(path, records, fps=30.0, camera_id="top"):
    lines = [json.dumps({"fps": fps, "camera_id": camera_id})] + records
    path.write_text("\n".join(lines) + "\n")
    return path


def template_track(n, fps=30.0, step=None):
    frames = []
    for i in range(n):
        offset = np.zeros(3) if step is None else np.asarray(step) * i
        frames.append(
            posed_hand_frame(i / fps, RigidTransform(np.eye(3), offset + [0, 0, 0.4]))
        )
    return HandTrack(frames=frames, source_fps=fps, camera_id="top")


class TestKeypointConvention:
    def test_bijection_onto_0_20(self):
        assert sorted(int(k) for k in Keypoint) == list(range(21))

    def test_named_anchor_joints(self):
        assert Keypoint.THUMB_IP == 3
        assert Keypoint.INDEX_MCP == 5
        assert Keypoint.INDEX_TIP == 8


class TestParse:
    def test_well_formed(self, tmp_path):
        kp = hand_template()
        p = write_track_file(
            tmp_path / "a.jsonl",
            [frame_record(i * 0.1, kp) for i in range(3)],
        )
        track = parse_hand_track(p)
        assert len(track) == 3
        assert track.source_fps == 30.0
        assert track.camera_id == "top"
        np.testing.assert_array_equal(track.frames[0].keypoints, kp)

    def test_wrong_keypoint_count_names_line(self, tmp_path):
        kp = hand_template()
        bad = json.dumps({"t": 0.1, "hand": "R", "conf": 0.9, "kp": [0.0] * 60})
        p = write_track_file(tmp_path / "a.jsonl", [frame_record(0.0, kp), bad])
        with pytest.raises(ParseError) as e:
            parse_hand_track(p)
        assert "line 3" in str(e.value)

    def test_non_monotonic_time(self, tmp_path):
        kp = hand_template()
        p = write_track_file(
            tmp_path / "a.jsonl",
            [frame_record(t, kp) for t in (0.0, 0.1, 0.1)],
        )
        with pytest.raises(NonMonotonicTime):
            parse_hand_track(p)

    def test_empty_track(self, tmp_path):
        p = write_track_file(tmp_path / "a.jsonl", [])
        with pytest.raises(EmptyTrack):
            parse_hand_track(p)

    def test_bad_metadata(self, tmp_path):
        p = tmp_path / "a.jsonl"
        p.write_text('{"camera_id": "top"}\n')
        with pytest.raises(ParseError) as e:
            parse_hand_track(p)
        assert e.value.line == 1

    def test_confidence_out_of_range(self, tmp_path):
        kp = hand_template()
        p = write_track_file(tmp_path / "a.jsonl", [frame_record(0.0, kp, conf=1.5)])
        with pytest.raises(ParseError):
            parse_hand_track(p)

    def test_left_hand_mirrored(self, tmp_path):
        kp = hand_template()
        p = write_track_file(tmp_path / "a.jsonl", [frame_record(0.0, kp, hand="L")])
        track = parse_hand_track(p)
        assert track.frames[0].handedness is Handedness.RIGHT
        assert track.source_handedness is Handedness.LEFT
        np.testing.assert_array_equal(track.frames[0].keypoints[:, 0], -kp[:, 0])
        np.testing.assert_array_equal(track.frames[0].keypoints[:, 1:], kp[:, 1:])

    def test_mixed_handedness_rejected(self, tmp_path):
        kp = hand_template()
        p = write_track_file(
            tmp_path / "a.jsonl",
            [frame_record(0.0, kp, hand="R"), frame_record(0.1, kp, hand="L")],
        )
        with pytest.raises(ParseError):
            parse_hand_track(p)


class TestRoundTrip:
    @pytest.mark.parametrize("hand", ["R", "L"])
    def test_parse_write_byte_exact(self, tmp_path, hand):
        rng = np.random.default_rng(42)
        records = []
        for i in range(4):
            kp = rng.uniform(-0.2, 0.2, size=(21, 3))
            verts = rng.uniform(-0.2, 0.2, size=(778, 3)) if i % 2 else None
            records.append(frame_record(0.1 * i + 0.003, kp, hand=hand, conf=0.5 + 0.1 * i, verts=verts))
        src = write_track_file(tmp_path / "src.jsonl", records, fps=29.97, camera_id="cam0")
        track = parse_hand_track(src)
        out = tmp_path / "out.jsonl"
        write_hand_track(track, out)
        assert out.read_bytes() == src.read_bytes()


class TestFlicker:
    def test_teleported_frame_removed(self):
        track = template_track(11)
        frames = list(track.frames)
        bad = frames[5]
        moved = HandFrame(
            timestamp=bad.timestamp,
            keypoints=bad.keypoints + np.array([0.5, 0.0, 0.0]),
            confidence=bad.confidence,
            handedness=bad.handedness,
        )
        frames[5] = moved
        track = HandTrack(frames=frames, source_fps=30.0, camera_id="top")
        cleaned, report = reject_flicker(track, jump_threshold=0.1, window=5)
        assert report.removed_indices == [5]
        assert len(cleaned) == 10

    def test_smooth_motion_untouched(self):
        track = template_track(30, step=(0.01, 0.0, 0.0))
        cleaned, report = reject_flicker(track, jump_threshold=0.1, window=5)
        assert report.n_removed == 0
        assert len(cleaned) == 30

    def test_injected_outliers_all_caught(self):
        # Generator knows the ground-truth outlier set: 5% of frames get a
        # wrist jump of >= 3x threshold.
        rng = np.random.default_rng(77)
        n = 400
        threshold = 0.05
        track = template_track(n, step=(0.002, 0.001, 0.0))
        frames = list(track.frames)
        outliers = sorted(rng.choice(np.arange(2, n - 2), size=n // 20, replace=False))
        # keep injected outliers isolated so the window median stays sane
        outliers = [i for k, i in enumerate(outliers) if k == 0 or i - outliers[k - 1] > 2]
        for i in outliers:
            f = frames[i]
            direction = rng.normal(size=3)
            direction /= np.linalg.norm(direction)
            frames[i] = HandFrame(
                timestamp=f.timestamp,
                keypoints=f.keypoints + direction * 3.5 * threshold,
                confidence=f.confidence,
                handedness=f.handedness,
            )
        track = HandTrack(frames=frames, source_fps=30.0, camera_id="top")
        cleaned, report = reject_flicker(track, jump_threshold=threshold, window=5)
        removed = set(report.removed_indices)
        assert set(outliers) <= removed
        false_positives = removed - set(outliers)
        assert len(false_positives) <= 0.01 * n

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        track = template_track(60, step=(0.003, 0.0, 0.001))
        frames = list(track.frames)
        for i in (10, 25, 40):
            f = frames[i]
            frames[i] = HandFrame(
                timestamp=f.timestamp,
                keypoints=f.keypoints + rng.normal(size=3) * 0.3,
                confidence=f.confidence,
                handedness=f.handedness,
            )
        track = HandTrack(frames=frames, source_fps=30.0, camera_id="top")
        once, _ = reject_flicker(track, jump_threshold=0.05, window=5)
        twice, rep2 = reject_flicker(once, jump_threshold=0.05, window=5)
        assert rep2.n_removed == 0
        assert [f.timestamp for f in twice.frames] == [f.timestamp for f in once.frames]

    def test_all_removed_raises(self):
        # Two wildly alternating frames: every frame is far from its median.
        a = posed_hand_frame(0.0, RigidTransform(np.eye(3), np.array([0.0, 0, 0.4])))
        b = posed_hand_frame(0.1, RigidTransform(np.eye(3), np.array([5.0, 0, 0.4])))
        c = posed_hand_frame(0.2, RigidTransform(np.eye(3), np.array([0.0, 0, 0.4])))
        track = HandTrack(frames=[a, b, c], source_fps=10.0, camera_id="top")
        with pytest.raises(EmptyTrack):
            reject_flicker(track, jump_threshold=0.01, window=3)


class TestResample:
    def test_two_frame_linearity(self):
        kp0 = hand_template()
        kp1 = kp0 + np.array([1.0, 0.0, 0.0])
        track = HandTrack(
            frames=[
                HandFrame(0.0, kp0, 1.0, Handedness.RIGHT),
                HandFrame(1.0, kp1, 1.0, Handedness.RIGHT),
            ],
            source_fps=1.0,
            camera_id="top",
        )
        out = resample_track(track, 4.0)
        assert len(out) == 5
        xs = np.array([f.keypoints[0, 0] for f in out.frames]) - kp0[0, 0]
        np.testing.assert_allclose(xs, [0, 0.25, 0.5, 0.75, 1.0], atol=1e-12)

    def test_identity_at_original_fps(self):
        track = template_track(20, step=(0.01, 0.002, 0.0))
        out = resample_track(track, 30.0)
        assert len(out) == 20
        for a, b in zip(track.frames, out.frames):
            assert abs(a.timestamp - b.timestamp) < 1e-12
            assert np.max(np.abs(a.keypoints - b.keypoints)) < 1e-12

    def test_downsample_matches_analytic_interpolant(self):
        # Closed-form oracle: the linear interpolant of a sampled sinusoid.
        fps_in, fps_out = 30.0, 10.0
        t_src = np.arange(61) / fps_in
        amp = 0.05
        frames = []
        for t in t_src:
            offset = np.array([amp * np.sin(2 * np.pi * 1.3 * t), 0.0, 0.4])
            frames.append(posed_hand_frame(float(t), RigidTransform(np.eye(3), offset)))
        track = HandTrack(frames=frames, source_fps=fps_in, camera_id="top")
        out = resample_track(track, fps_out)
        assert len(out) == int(np.floor((t_src[-1] - t_src[0]) * fps_out)) + 1
        wrist_x_src = np.array([f.keypoints[0, 0] for f in frames])
        for f in out.frames:
            expect = np.interp(f.timestamp, t_src, wrist_x_src)
            assert abs(f.keypoints[0, 0] - expect) < 1e-12

    def test_uniform_spacing(self):
        track = template_track(50, step=(0.001, 0, 0))
        out = resample_track(track, 12.5)
        ts = out.timestamps()
        assert np.max(np.abs(np.diff(ts) - 1 / 12.5)) < 1e-9

    def test_too_short(self):
        track = template_track(1)
        with pytest.raises(EmptyTrack):
            resample_track(track, 10.0)
