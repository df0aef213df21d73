import json

import numpy as np
import pytest

from handflow import geometry
from handflow.dataset import Episode, ZeroPadded, make_chunks_from_states
from handflow.images import save_image
from handflow.retarget import Embodiment


def random_state_array(rng, n):
    """(n, 8) float32 state block with unit quaternions and clipped gripper."""
    pos = rng.uniform(-0.3, 0.3, size=(n, 3))
    quat = rng.normal(size=(n, 4))
    quat /= np.linalg.norm(quat, axis=1, keepdims=True)
    quat = np.array([geometry.quat_canonical(q) for q in quat])
    grip = rng.uniform(0.0, 1.0, size=(n, 1))
    return np.hstack([pos, quat, grip]).astype(np.float32)


def random_episode(
    rng,
    episode_id,
    n_states=12,
    horizon=4,
    embodiment=Embodiment.HUMAN_HAND,
    image_shape=(8, 6, 3),
    with_images=None,
):
    """Synthetic episode; human data gets a zero-padded wrist view."""
    if with_images is None:
        with_images = embodiment is Embodiment.ROBOT
    states = random_state_array(rng, n_states)
    timestamps = (np.arange(n_states, dtype=np.float64) / 15.0).astype(np.float32)
    streams = {}
    if with_images:
        streams["top"] = [
            rng.integers(0, 256, size=image_shape, dtype=np.uint8) for _ in range(n_states)
        ]
    else:
        streams["top"] = ZeroPadded(shape=image_shape)
    if embodiment is Embodiment.ROBOT:
        streams["wrist"] = [
            rng.integers(0, 256, size=image_shape, dtype=np.uint8) for _ in range(n_states)
        ]
    else:
        streams["wrist"] = ZeroPadded(shape=image_shape)
    return Episode(
        episode_id=episode_id,
        embodiment=embodiment,
        task_text=f"task for {episode_id}",
        horizon=horizon,
        timestamps=timestamps,
        states=states,
        chunks=make_chunks_from_states(states, horizon),
        camera_streams=streams,
    )


def write_robot_log(rng, directory, episode_id="robot0", n=6, size=(8, 6)):
    """Robot teleop log fixture: JSONL plus PNG frames for both views."""
    h, w = size
    directory.mkdir(parents=True, exist_ok=True)
    states = random_state_array(rng, n).astype(np.float64)
    header = {
        "fps": 15.0,
        "episode_id": episode_id,
        "task_text": "pick the duck",
        "views": {
            "top": {"width": w, "height": h, "dir": "top"},
            "wrist": {"width": w, "height": h, "dir": "wrist"},
        },
    }
    lines = [json.dumps(header)]
    for i in range(n):
        for view in ("top", "wrist"):
            img = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
            save_image(img, directory / view / f"{i:06d}.png")
        lines.append(
            json.dumps(
                {
                    "t": i / 15.0,
                    "pos": [float(v) for v in states[i, :3]],
                    "quat": [float(v) for v in states[i, 3:7]],
                    "gripper": float(states[i, 7]),
                    "frames": {
                        "top": f"top/{i:06d}.png",
                        "wrist": f"wrist/{i:06d}.png",
                    },
                }
            )
        )
    log = directory / "log.jsonl"
    log.write_text("\n".join(lines) + "\n")
    return log


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
