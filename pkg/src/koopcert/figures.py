"""Static result figures rendered to files next to the delimited outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .predict import PredictedTrajectory
from .spectral import SpectrumReport

__all__ = ["plot_spectrum", "plot_trajectories"]


def plot_spectrum(report: SpectrumReport, path) -> None:
    """Eigenvalues on the complex plane against the unit circle."""
    fig, ax = plt.subplots(figsize=(5, 5))
    phi = np.linspace(0, 2 * np.pi, 400)
    ax.plot(np.cos(phi), np.sin(phi), "k--", lw=0.8, label="unit circle")
    eig = report.eigenvalues
    ax.scatter(eig.real, eig.imag, s=24, facecolors="none", edgecolors="tab:blue",
               label="eigenvalues")
    lim = max(1.1, 1.05 * report.spectral_radius)
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    ax.set_aspect("equal")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(f"spectral radius = {report.spectral_radius:.4f}")
    ax.legend(loc="upper right", fontsize=8)
    ax.grid(alpha=0.3)
    fig.savefig(Path(path), bbox_inches="tight")
    plt.close(fig)


def plot_trajectories(trajectories: list[PredictedTrajectory], path) -> None:
    """Predicted vs reference trajectories in the state plane (2D systems)
    or per-coordinate over steps otherwise."""
    if not trajectories:
        return
    dim = trajectories[0].states.shape[1]
    fig, ax = plt.subplots(figsize=(6, 5))
    if dim == 2:
        for i, traj in enumerate(trajectories):
            label_p = "predicted" if i == 0 else None
            label_r = "reference" if i == 0 else None
            ax.plot(traj.states[:, 0], traj.states[:, 1], "-", color="tab:blue",
                    lw=1.0, alpha=0.8, label=label_p)
            if traj.reference is not None:
                ax.plot(traj.reference[:, 0], traj.reference[:, 1], "--",
                        color="tab:red", lw=1.0, alpha=0.8, label=label_r)
            ax.plot(traj.states[0, 0], traj.states[0, 1], "ko", ms=3)
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
    else:
        for traj in trajectories:
            t = np.arange(len(traj.states))
            for j in range(dim):
                ax.plot(t, traj.states[:, j], "-", color="tab:blue", lw=1.0, alpha=0.7)
                if traj.reference is not None:
                    ax.plot(t, traj.reference[:, j], "--", color="tab:red",
                            lw=1.0, alpha=0.7)
        ax.set_xlabel("step")
        ax.set_ylabel("state")
    ax.set_title("trajectory prediction")
    ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    fig.savefig(Path(path), bbox_inches="tight")
    plt.close(fig)
