"""Pipeline command line: retarget, augment, mix, validate, inspect, demo.

Exit codes: 0 ok, 2 config error, 3 input data error, 4 validation failure.

Everything with more than a few options lives in a JSON config file
(--config); flags override the file. All randomness derives from one global
seed so identical (config, inputs, seed) produce byte-identical output
trees.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import augment as augment_mod
from . import dataset as dataset_mod
from . import kinematics, mixer, plots, retarget
from .calibration import load_calibration, load_intrinsics
from .errors import (
    ChecksumMismatch,
    ConfigError,
    DegenerateCalibration,
    EmptyEmbodiment,
    EmptyTrack,
    InvalidMatrix,
    NonMonotonicTime,
    ParseError,
    PipelineError,
    TooManyGaps,
    VersionMismatch,
    ViewMismatch,
)
from .hand import parse_hand_track, reject_flicker, resample_track
from .images import load_image, save_image
from .rasterize import load_topology
from .seeding import derive_seed, rng_for

log = logging.getLogger("handflow")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_VALIDATION = 4

AUG_SUFFIXES = tuple(f".aug-{m.value}.png" for m in augment_mod.AugmentMode)


@dataclass
class TrackInput:
    track: str
    episode_id: str | None = None
    task_text: str = ""
    frames_dir: str | None = None


@dataclass
class RetargetOptions:
    gripper_percentiles: tuple[float, float] = (5.0, 95.0)
    fallback_d_min: float = 0.02
    fallback_d_max: float = 0.10
    flicker_threshold: float = 0.05
    flicker_window: int = 5
    resample_fps: float | None = None
    max_gap: int = 5
    min_valid_fraction: float = 0.8
    position_smoothing: int = 1
    orientation_smoothing: int = 1


@dataclass
class IkConfig:
    damping: float = 0.03
    max_iters: int = 1000
    pos_tol: float = 1e-4
    rot_tol: float = 1e-3
    reachable_floor: float = 0.9
    drop_unreachable: bool = False

    def options(self) -> kinematics.IkOptions:
        return kinematics.IkOptions(
            damping=self.damping,
            max_iters=self.max_iters,
            pos_tol=self.pos_tol,
            rot_tol=self.rot_tol,
        )


@dataclass
class AugmentOptions:
    mode: str = "full"
    per: str = "frame"
    hue_range: tuple[float, float] = augment_mod.HUE_BOUNDS
    sat_range: tuple[float, float] = augment_mod.SAT_BOUNDS
    val_range: tuple[float, float] = augment_mod.VAL_BOUNDS

    def config(self, color_seed: int) -> augment_mod.AugmentConfig:
        return augment_mod.AugmentConfig(
            mode=augment_mod.AugmentMode(self.mode),
            color_seed=color_seed,
            hue_range=tuple(self.hue_range),
            sat_range=tuple(self.sat_range),
            val_range=tuple(self.val_range),
            per=augment_mod.ColorDraw(self.per),
        )


@dataclass
class MixOptions:
    batch_size: int = 32
    human_fraction: float | None = None  # None = proportional-capped default
    n_batches: int = 100


@dataclass
class PipelineConfig:
    inputs: list[TrackInput] = field(default_factory=list)
    robot_logs: list[str] = field(default_factory=list)
    calibration: str | None = None
    intrinsics: str | None = None
    topology: str | None = None
    chain: str | None = None  # None = packaged default chain
    output_root: str = "dataset"
    chunk_horizon: int = 16
    view_shapes: dict[str, tuple[int, int, int]] = field(
        default_factory=lambda: {"top": (480, 640, 3), "wrist": (480, 640, 3)}
    )
    retarget: RetargetOptions = field(default_factory=RetargetOptions)
    ik: IkConfig = field(default_factory=IkConfig)
    augment: AugmentOptions = field(default_factory=AugmentOptions)
    mix: MixOptions = field(default_factory=MixOptions)
    seed: int = 0
    jobs: int = 1
    log_level: str = "info"

    @staticmethod
    def from_file(path: str | Path) -> "PipelineConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: {e}")
        try:
            cfg = PipelineConfig(
                inputs=[TrackInput(**i) for i in data.get("inputs", [])],
                robot_logs=list(data.get("robot_logs", [])),
                calibration=data.get("calibration"),
                intrinsics=data.get("intrinsics"),
                topology=data.get("topology"),
                chain=data.get("chain"),
                output_root=data.get("output_root", "dataset"),
                chunk_horizon=int(data.get("chunk_horizon", 16)),
                view_shapes={
                    k: tuple(v) for k, v in data.get(
                        "view_shapes", {"top": (480, 640, 3), "wrist": (480, 640, 3)}
                    ).items()
                },
                retarget=RetargetOptions(**_tupled(data.get("retarget", {}), ())),
                ik=IkConfig(**data.get("ik", {})),
                augment=AugmentOptions(
                    **_tupled(data.get("augment", {}), ("hue_range", "sat_range", "val_range"))
                ),
                mix=MixOptions(**data.get("mix", {})),
                seed=int(data.get("seed", 0)),
                jobs=int(data.get("jobs", 1)),
                log_level=data.get("log_level", "info"),
            )
        except TypeError as e:
            raise ConfigError(f"{path}: unknown or malformed config field: {e}")
        cfg._base_dir = path.parent
        return cfg

    def to_json(self) -> dict:
        out = dataclasses.asdict(self)
        out.pop("_base_dir", None)
        out["retarget"]["gripper_percentiles"] = list(self.retarget.gripper_percentiles)
        for key in ("hue_range", "sat_range", "val_range"):
            out["augment"][key] = list(out["augment"][key])
        out["view_shapes"] = {k: list(v) for k, v in self.view_shapes.items()}
        return out

    _base_dir: Path = field(default_factory=Path, repr=False, compare=False)

    def resolve(self, p: str | None) -> Path | None:
        if p is None:
            return None
        q = Path(p)
        return q if q.is_absolute() else self._base_dir / q

    def validate_paths(self, need_calibration: bool = True) -> None:
        """Check every referenced input path before any processing starts."""
        missing = []
        if need_calibration:
            if self.calibration is None:
                raise ConfigError("config is missing the 'calibration' file path")
            if not self.resolve(self.calibration).exists():
                missing.append(self.calibration)
        for name in ("intrinsics", "topology", "chain"):
            p = getattr(self, name)
            if p is not None and not self.resolve(p).exists():
                missing.append(p)
        for inp in self.inputs:
            if not self.resolve(inp.track).exists():
                missing.append(inp.track)
            if inp.frames_dir is not None and not self.resolve(inp.frames_dir).is_dir():
                missing.append(inp.frames_dir)
        for rl in self.robot_logs:
            if not self.resolve(rl).exists():
                missing.append(rl)
        if missing:
            raise ConfigError(f"missing input paths: {', '.join(missing)}")


def _tupled(d: dict, tuple_keys: tuple[str, ...]) -> dict:
    out = dict(d)
    for k in out:
        if k in tuple_keys or k == "gripper_percentiles":
            out[k] = tuple(out[k])
    return out


def _load_chain(cfg: PipelineConfig) -> kinematics.KinematicChain:
    if cfg.chain is None:
        return kinematics.load_default_chain()
    return kinematics.load_chain(cfg.resolve(cfg.chain))


def _frames_from_dir(directory: Path) -> list[Path]:
    return sorted(
        p for p in directory.glob("*.png") if not p.name.endswith(AUG_SUFFIXES)
    )


# ---------------------------------------------------------------------------
# retarget


def _episode_id_for(inp: TrackInput) -> str:
    return inp.episode_id or Path(inp.track).stem


def _retarget_one(cfg: PipelineConfig, inp: TrackInput, dry_run: bool) -> dict:
    """Process one hand track into an episode directory; returns report row."""
    opts = cfg.retarget
    cal_file = load_calibration(cfg.resolve(cfg.calibration))
    track = parse_hand_track(cfg.resolve(inp.track))
    if track.camera_id != cal_file.camera_id:
        raise ParseError(
            f"{inp.track}: track camera '{track.camera_id}' does not match "
            f"calibration camera '{cal_file.camera_id}'"
        )
    n_in = len(track)
    orig_ts = track.timestamps()  # frame files correspond to these records
    track, flicker = reject_flicker(track, opts.flicker_threshold, opts.flicker_window)
    if opts.resample_fps:
        track = resample_track(track, opts.resample_fps)
    try:
        cal = retarget.calibrate_gripper(track, *opts.gripper_percentiles)
        cal_source = "percentile"
    except DegenerateCalibration:
        cal = retarget.GripperCalibration(opts.fallback_d_min, opts.fallback_d_max)
        cal_source = "fallback"
    traj = retarget.retarget_track(
        track,
        cal,
        cal_file.T_cam_to_base,
        max_gap=opts.max_gap,
        min_valid_fraction=opts.min_valid_fraction,
    )
    if opts.position_smoothing > 1 or opts.orientation_smoothing > 1:
        traj = retarget.smooth_trajectory(
            traj, opts.position_smoothing, opts.orientation_smoothing
        )

    chain = _load_chain(cfg)
    report = kinematics.validate_trajectory(chain, traj, cfg.ik.options())
    if cfg.ik.drop_unreachable and report.reachable_fraction < 1.0:
        kept = [p for p, r in zip(traj.poses, report.results) if r.converged]
        traj = retarget.StateTrajectory(
            poses=kept, embodiment=traj.embodiment, frame=traj.frame
        )

    episode_id = _episode_id_for(inp)
    streams: dict = {}
    if inp.frames_dir is not None:
        files = _frames_from_dir(cfg.resolve(inp.frames_dir))
        if len(files) != len(orig_ts):
            raise ParseError(
                f"{inp.frames_dir}: {len(files)} frames for {len(orig_ts)} track records"
            )
        # pick each pose's frame by nearest original-record timestamp, so
        # flicker removal and resampling keep states and images aligned
        chosen = [files[int(np.argmin(np.abs(orig_ts - p.timestamp)))] for p in traj.poses]
        streams["top"] = [load_image(f) for f in chosen]
    else:
        streams["top"] = dataset_mod.ZeroPadded(shape=tuple(cfg.view_shapes["top"]))
    streams["wrist"] = dataset_mod.ZeroPadded(shape=tuple(cfg.view_shapes["wrist"]))

    ep = dataset_mod.Episode.from_trajectory(
        episode_id, inp.task_text, traj, cfg.chunk_horizon, streams
    )
    if not dry_run:
        dataset_mod.write_episode(ep, cfg.resolve(cfg.output_root))
    return {
        "episode_id": episode_id,
        "embodiment": ep.embodiment.value,
        "frames_in": n_in,
        "flicker_removed": flicker.n_removed,
        "poses": len(traj),
        "chunks": len(ep.chunks),
        "gripper_d_min": cal.d_min,
        "gripper_d_max": cal.d_max,
        "gripper_calibration": cal_source,
        "reachable_fraction": report.reachable_fraction,
        "max_joint_jump": report.max_joint_jump,
        "written": not dry_run,
    }


def cmd_retarget(cfg: PipelineConfig, dry_run: bool = False) -> int:
    cfg.validate_paths()
    if not cfg.inputs and not cfg.robot_logs:
        raise ConfigError("no inputs: config needs 'inputs' and/or 'robot_logs'")
    rows = []
    if cfg.jobs > 1 and len(cfg.inputs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [pool.submit(_retarget_one, cfg, inp, dry_run) for inp in cfg.inputs]
            rows.extend(f.result() for f in futures)
    else:
        rows.extend(_retarget_one(cfg, inp, dry_run) for inp in cfg.inputs)

    for rl in cfg.robot_logs:
        ep = dataset_mod.import_robot_log(cfg.resolve(rl), cfg.chunk_horizon)
        if not dry_run:
            dataset_mod.write_episode(ep, cfg.resolve(cfg.output_root))
        rows.append(
            {
                "episode_id": ep.episode_id,
                "embodiment": ep.embodiment.value,
                "poses": ep.n_states,
                "chunks": len(ep.chunks),
                "written": not dry_run,
            }
        )

    if not dry_run:
        root = cfg.resolve(cfg.output_root)
        all_eps = [
            dataset_mod.read_episode(root / "episodes" / row["episode_id"], load_frames=False)
            for row in rows
        ]
        manifest = dataset_mod.manifest_from_episodes(
            root, all_eps, view_shapes=cfg.view_shapes
        )
        dataset_mod.write_manifest(manifest, root)

    report = {"episodes": rows, "output_root": str(cfg.output_root), "dry_run": dry_run}
    print(json.dumps(report, indent=2, sort_keys=True))
    floors = [
        row["reachable_fraction"]
        for row in rows
        if "reachable_fraction" in row and not np.isnan(row["reachable_fraction"])
    ]
    if any(f < cfg.ik.reachable_floor for f in floors):
        log.error(
            "reachable fraction below floor %.2f on at least one episode",
            cfg.ik.reachable_floor,
        )
        return EXIT_VALIDATION
    return EXIT_OK


# ---------------------------------------------------------------------------
# augment


def cmd_augment(cfg: PipelineConfig, dry_run: bool = False) -> int:
    cfg.validate_paths(need_calibration=False)
    if cfg.intrinsics is None:
        raise ConfigError("augment needs the 'intrinsics' file")
    mode = augment_mod.AugmentMode(cfg.augment.mode)
    cam = load_intrinsics(cfg.resolve(cfg.intrinsics))
    topo = None
    if mode is not augment_mod.AugmentMode.NONE:
        if cfg.topology is None:
            raise ConfigError("augment modes full/partial need the 'topology' file")
        topo = load_topology(cfg.resolve(cfg.topology))

    rows = []
    for inp in cfg.inputs:
        if inp.frames_dir is None:
            continue
        track = parse_hand_track(cfg.resolve(inp.track))
        files = _frames_from_dir(cfg.resolve(inp.frames_dir))
        if len(files) != len(track):
            raise ParseError(
                f"{inp.frames_dir}: {len(files)} frames for {len(track)} track records"
            )
        frames = [load_image(f) for f in files]
        episode_id = _episode_id_for(inp)
        aug_cfg = cfg.augment.config(color_seed=derive_seed(cfg.seed, "augment", episode_id))
        out_frames, stats = augment_mod.augment_episode(
            frames, track.frames, cam, topo, aug_cfg
        )
        if not dry_run:
            for f, img in zip(files, out_frames):
                save_image(img, f.with_name(f.stem + f".aug-{mode.value}.png"))
        rows.append(
            {
                "episode_id": episode_id,
                "mode": mode.value,
                "frames": len(frames),
                "augmented": stats.n_augmented,
                "skipped": stats.n_skipped,
                "covered_pixels": [s.covered_pixels for s in stats.frames],
            }
        )
    print(json.dumps({"augment": rows, "dry_run": dry_run}, indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# mix


def cmd_mix(cfg: PipelineConfig, dry_run: bool = False) -> int:
    root = cfg.resolve(cfg.output_root)
    manifest = dataset_mod.read_manifest(root)
    index = mixer.build_index(manifest)
    episodes = [
        dataset_mod.read_episode(root / e.path, load_frames=False)
        for e in manifest.episodes
    ]
    stats = dataset_mod.compute_stats(episodes)
    rho = cfg.mix.human_fraction
    if rho is None:
        rho = mixer.default_human_fraction(
            index.count(retarget.Embodiment.HUMAN_HAND),
            index.count(retarget.Embodiment.ROBOT),
        )
    plan = mixer.MixPlan(
        batch_size=cfg.mix.batch_size,
        human_fraction=rho,
        seed=derive_seed(cfg.seed, "mix"),
        epoch_length=cfg.mix.n_batches,
    )
    if not dry_run:
        dataset_mod.save_stats(stats, root / "stats.json")
        mixer.emit_training_manifest(
            plan,
            index,
            cfg.mix.n_batches,
            root / "schedule.jsonl",
            routes=manifest.routes,
            stats_file="stats.json",
        )
    print(
        json.dumps(
            {
                "counts": index.counts,
                "human_fraction": rho,
                "batch_size": plan.batch_size,
                "human_per_batch": plan.human_per_batch,
                "robot_per_batch": plan.robot_per_batch,
                "n_batches": cfg.mix.n_batches,
                "dry_run": dry_run,
            },
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate / inspect


def cmd_validate(root: Path) -> int:
    findings = dataset_mod.validate_dataset(root)
    print(json.dumps({"findings": findings, "clean": not findings}, indent=2, sort_keys=True))
    return EXIT_OK if not findings else EXIT_VALIDATION


def cmd_inspect(episode_dir: Path, out_dir: Path | None, dump_json: Path | None) -> int:
    ep = dataset_mod.read_episode(episode_dir)
    out_dir = out_dir or episode_dir / "inspect"
    out_dir.mkdir(parents=True, exist_ok=True)
    t = ep.timestamps.astype(np.float64)
    states = ep.states.astype(np.float64)
    plots.line_plot_svg(
        t,
        {"gripper": states[:, 7]},
        out_dir / "gripper.svg",
        title=f"{ep.episode_id}: gripper state",
        y_label="open fraction",
    )
    plots.line_plot_svg(
        t,
        {"x": states[:, 0], "y": states[:, 1], "z": states[:, 2]},
        out_dir / "position.svg",
        title=f"{ep.episode_id}: end-effector position",
        y_label="meters",
    )
    plots.line_plot_svg(
        t,
        {k: states[:, 3 + i] for i, k in enumerate("wxyz")},
        out_dir / "orientation.svg",
        title=f"{ep.episode_id}: orientation quaternion",
    )
    top = ep.camera_streams.get("top")
    if isinstance(top, dataset_mod.ZeroPadded) or not top:
        shape = top.shape if isinstance(top, dataset_mod.ZeroPadded) else (240, 320, 3)
        canvas = np.full(shape, 64, dtype=np.uint8)
    else:
        canvas = top[len(top) // 2]
    plots.trajectory_preview_png(canvas, states[:, :3], out_dir / "trajectory.png")

    if dump_json is not None:
        dump = {
            "episode_id": ep.episode_id,
            "embodiment": ep.embodiment.value,
            "task_text": ep.task_text,
            "horizon": ep.horizon,
            "timestamps": [float(v) for v in ep.timestamps],
            "states": [[float(v) for v in row] for row in ep.states],
            "actions": [
                [[float(v) for v in row] for row in chunk.actions] for chunk in ep.chunks
            ],
            "views": {
                name: (
                    {"zero_padded": True, "shape": list(stream.shape)}
                    if isinstance(stream, dataset_mod.ZeroPadded)
                    else {"zero_padded": False, "n_frames": len(stream),
                          "shape": list(stream[0].shape) if stream else None}
                )
                for name, stream in ep.camera_streams.items()
            },
        }
        dump_json.parent.mkdir(parents=True, exist_ok=True)
        dump_json.write_text(json.dumps(dump) + "\n", encoding="utf-8")
    print(
        json.dumps(
            {"episode_id": ep.episode_id, "states": ep.n_states, "chunks": len(ep.chunks),
             "artifacts": sorted(p.name for p in out_dir.iterdir())},
            indent=2,
            sort_keys=True,
        )
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# demo bundle


def cmd_demo(out_dir: Path, n_human: int, n_robot: int, seed: int, with_mesh: bool) -> int:
    from . import synthetic
    from .calibration import CameraModel, HandEyeCalibration, save_calibration, save_intrinsics
    from .geometry import quat_from_matrix
    from .hand import write_hand_track
    from .rasterize import save_topology

    out_dir.mkdir(parents=True, exist_ok=True)
    chain = kinematics.load_default_chain()
    T = synthetic.demo_hand_eye()
    save_calibration(
        HandEyeCalibration(T_cam_to_base=T, camera_id="top"), out_dir / "calibration.json"
    )
    cam = CameraModel(fx=60.0, fy=60.0, cx=32.0, cy=24.0, width=64, height=48)
    save_intrinsics(cam, out_dir / "intrinsics.json")
    save_topology(synthetic.demo_topology(), out_dir / "topology.json")

    inputs = []
    for i in range(n_human):
        rng = rng_for(seed, "demo-track", i)
        n_frames = int(rng.integers(45, 70))
        track, _ = synthetic.grasp_track(
            chain,
            T,
            n_frames=n_frames,
            fps=15.0,
            d_max=float(rng.uniform(0.08, 0.1)),
            d_min=float(rng.uniform(0.015, 0.025)),
            with_vertices=with_mesh,
        )
        track_path = out_dir / "tracks" / f"human_{i:03d}.jsonl"
        track_path.parent.mkdir(parents=True, exist_ok=True)
        write_hand_track(track, track_path)
        entry = {
            "track": str(track_path.relative_to(out_dir)),
            "episode_id": f"human_{i:03d}",
            "task_text": "pick up the duck and place it in the bowl",
        }
        if with_mesh:
            frames_dir = out_dir / "frames" / f"human_{i:03d}"
            bg_rng = rng_for(seed, "demo-bg", i)
            base = bg_rng.integers(40, 200, size=3)
            for k in range(n_frames):
                img = np.zeros((cam.height, cam.width, 3), dtype=np.uint8)
                ramp = np.linspace(0.6, 1.0, cam.width)[None, :, None]
                img[:] = np.clip(base[None, None, :] * ramp, 0, 255).astype(np.uint8)
                save_image(img, frames_dir / f"{k:06d}.png")
            entry["frames_dir"] = str(frames_dir.relative_to(out_dir))
        inputs.append(entry)

    robot_logs = []
    for i in range(n_robot):
        rng = rng_for(seed, "demo-robot", i)
        n_frames = int(rng.integers(30, 45))
        qs = synthetic.smooth_joint_path(chain, n_frames, amplitude=0.2)
        log_dir = out_dir / "robot_logs" / f"robot_{i:03d}"
        log_dir.mkdir(parents=True, exist_ok=True)
        header = {
            "fps": 15.0,
            "episode_id": f"robot_{i:03d}",
            "task_text": "pick up the duck and place it in the bowl",
            "views": {
                "top": {"width": cam.width, "height": cam.height, "dir": "top"},
                "wrist": {"width": cam.width, "height": cam.height, "dir": "wrist"},
            },
        }
        lines = [json.dumps(header)]
        grip = np.linspace(1.0, 0.0, n_frames)
        for k in range(n_frames):
            ee = kinematics.forward_kinematics(chain, qs[k])
            q = quat_from_matrix(ee.rotation)
            for view in ("top", "wrist"):
                img_rng = rng_for(seed, "demo-robot-img", i, view, k)
                img = img_rng.integers(0, 256, size=(cam.height, cam.width, 3), dtype=np.uint8)
                save_image(img, log_dir / view / f"{k:06d}.png")
            lines.append(
                json.dumps(
                    {
                        "t": k / 15.0,
                        "pos": [float(v) for v in ee.translation],
                        "quat": [float(v) for v in q],
                        "gripper": float(grip[k]),
                        "frames": {
                            "top": f"top/{k:06d}.png",
                            "wrist": f"wrist/{k:06d}.png",
                        },
                    }
                )
            )
        (log_dir / "log.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
        robot_logs.append(str((log_dir / "log.jsonl").relative_to(out_dir)))

    shape = [cam.height, cam.width, 3]
    config = {
        "inputs": inputs,
        "robot_logs": robot_logs,
        "calibration": "calibration.json",
        "intrinsics": "intrinsics.json",
        "topology": "topology.json",
        "chain": None,
        "output_root": "dataset",
        "chunk_horizon": 8,
        "view_shapes": {"top": shape, "wrist": shape},
        "retarget": {"flicker_threshold": 0.05, "flicker_window": 5},
        "ik": {"reachable_floor": 0.95},
        "mix": {"batch_size": 16, "n_batches": 50},
        "seed": seed,
    }
    (out_dir / "config.json").write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    print(json.dumps({"demo_root": str(out_dir), "human_tracks": n_human, "robot_logs": n_robot}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="handflow",
        description="Convert hand demonstrations into robot-ready training datasets.",
    )
    parser.add_argument("--log-level", default=None, help="debug/info/warning/error")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_cmd(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="pipeline config JSON")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--jobs", type=int, default=None, help="parallel workers")
        p.add_argument("--dry-run", action="store_true", help="validate fully, write nothing")
        return p

    add_config_cmd("retarget", "hand tracks + robot logs -> episode dataset")
    add_config_cmd("augment", "render randomized hand colors over episode frames")
    add_config_cmd("mix", "build normalization stats and a balanced batch schedule")

    v = sub.add_parser("validate", help="re-check every dataset invariant")
    v.add_argument("root", help="dataset root directory")

    i = sub.add_parser("inspect", help="emit plots and previews for one episode")
    i.add_argument("episode", help="episode directory")
    i.add_argument("--out", default=None, help="artifact output directory")
    i.add_argument("--dump-json", default=None, help="write all numeric content as JSON")

    d = sub.add_parser("demo", help="generate a synthetic demo bundle")
    d.add_argument("out", help="bundle output directory")
    d.add_argument("--human-tracks", type=int, default=3)
    d.add_argument("--robot-logs", type=int, default=2)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--with-mesh", action="store_true", help="attach demo mesh + frame images")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, (args.log_level or "info").upper(), logging.INFO),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        if args.command in ("retarget", "augment", "mix"):
            cfg = PipelineConfig.from_file(args.config)
            if args.seed is not None:
                cfg.seed = args.seed
            if args.jobs is not None:
                cfg.jobs = args.jobs
            if args.log_level:
                cfg.log_level = args.log_level
            handler = {"retarget": cmd_retarget, "augment": cmd_augment, "mix": cmd_mix}[
                args.command
            ]
            return handler(cfg, dry_run=args.dry_run)
        if args.command == "validate":
            return cmd_validate(Path(args.root))
        if args.command == "inspect":
            return cmd_inspect(
                Path(args.episode),
                Path(args.out) if args.out else None,
                Path(args.dump_json) if args.dump_json else None,
            )
        if args.command == "demo":
            return cmd_demo(
                Path(args.out),
                n_human=args.human_tracks,
                n_robot=args.robot_logs,
                seed=args.seed,
                with_mesh=args.with_mesh,
            )
        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as e:
        log.error("config error: %s", e)
        return EXIT_CONFIG
    except (ParseError, EmptyTrack, NonMonotonicTime, TooManyGaps, InvalidMatrix,
            DegenerateCalibration, EmptyEmbodiment, ViewMismatch) as e:
        log.error("input error: %s", e)
        return EXIT_INPUT
    except (VersionMismatch, ChecksumMismatch) as e:
        log.error("validation error: %s", e)
        return EXIT_VALIDATION
    except PipelineError as e:
        log.error("%s", e)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
