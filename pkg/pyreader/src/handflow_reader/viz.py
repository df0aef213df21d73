"""Inspection helpers: trace plots and frame grids via matplotlib."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .episodes import LoadedEpisode


def plot_gripper_trace(ep: LoadedEpisode, out: str | Path | None = None):
    fig, ax = plt.subplots(figsize=(7, 3))
    ax.plot(ep.timestamps, ep.states[:, 7], lw=1.5)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("gripper (0 closed, 1 open)")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(f"{ep.episode_id}: gripper")
    fig.tight_layout()
    if out is not None:
        fig.savefig(out, dpi=100)
        plt.close(fig)
    return fig


def plot_pose_trace(ep: LoadedEpisode, out: str | Path | None = None):
    fig, axes = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    for i, name in enumerate("xyz"):
        axes[0].plot(ep.timestamps, ep.states[:, i], lw=1.2, label=name)
    axes[0].set_ylabel("position [m]")
    axes[0].legend(loc="upper right", fontsize=8)
    for i, name in enumerate("wxyz"):
        axes[1].plot(ep.timestamps, ep.states[:, 3 + i], lw=1.2, label=name)
    axes[1].set_ylabel("quaternion")
    axes[1].set_xlabel("time [s]")
    axes[1].legend(loc="upper right", fontsize=8)
    fig.suptitle(f"{ep.episode_id}: end-effector pose")
    fig.tight_layout()
    if out is not None:
        fig.savefig(out, dpi=100)
        plt.close(fig)
    return fig


def show_frames(
    ep: LoadedEpisode,
    view: str = "top",
    indices: list[int] | None = None,
    out: str | Path | None = None,
):
    """Grid of frames from one view (zero-padded views show as black)."""
    if indices is None:
        n = ep.n_states
        indices = sorted({0, n // 4, n // 2, (3 * n) // 4, n - 1})
    frames = [ep.frame(view, t) for t in indices]
    fig, axes = plt.subplots(1, len(frames), figsize=(2.2 * len(frames), 2.6))
    if len(frames) == 1:
        axes = [axes]
    for ax, t, frame in zip(axes, indices, frames):
        ax.imshow(frame)
        ax.set_title(f"t={ep.timestamps[t]:.2f}s", fontsize=8)
        ax.axis("off")
    fig.suptitle(f"{ep.episode_id}: view '{view}'")
    fig.tight_layout()
    if out is not None:
        fig.savefig(out, dpi=100)
        plt.close(fig)
    return fig
