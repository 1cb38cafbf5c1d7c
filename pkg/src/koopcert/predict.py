"""State prediction from a fitted model.

One step maps x through the fitted operator's action on its kernel section:
x_next = Y^T theta k(x) with k(x)_j = kappa(x_j, x). Multi-step prediction
either re-embeds the predicted state each step (default, what trajectory
plots show) or recurses purely in section-coefficient space.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .edmd import EdmdModel, koopman_matrix

__all__ = [
    "StarvationWarning",
    "PredictedTrajectory",
    "kernel_section",
    "predict_one_step",
    "predict_trajectory",
]


class StarvationWarning(UserWarning):
    """Every kernel section vanished at the query point (compact support)."""


def kernel_section(model: EdmdModel, x) -> np.ndarray:
    """Vector k(x) with entries kappa(x_j, x) over the training inputs."""
    x = np.asarray(x, dtype=float)
    return model.kernel.pairwise(model.dataset.x, x[None, :])[:, 0]


def predict_one_step(model: EdmdModel, x) -> np.ndarray:
    """Predicted next state Y^T theta k(x).

    Outside the union of kernel supports all sections vanish; the honest image
    of the learned operator there is the zero state, flagged with a warning.
    """
    k = kernel_section(model, x)
    if not np.any(k):
        warnings.warn(
            "all kernel sections vanish at the query point; returning zero state",
            StarvationWarning,
            stacklevel=2,
        )
    return model.dataset.y.T @ (model.theta @ k)


@dataclass
class PredictedTrajectory:
    """Iterated predictions x_0 .. x_T, optionally scored against a reference."""

    states: np.ndarray
    recursion: str
    aborted: bool = False
    errors: np.ndarray | None = None
    reference: np.ndarray | None = field(default=None, repr=False)

    @property
    def steps(self) -> int:
        return len(self.states) - 1

    def save_csv(self, path) -> None:
        d = self.states.shape[1]
        cols = ["t"] + [f"x{i}" for i in range(d)]
        if self.reference is not None:
            cols += [f"ref{i}" for i in range(d)] + ["error"]
        lines = [",".join(cols)]
        for t, s in enumerate(self.states):
            row = [str(t)] + [f"{v:.17g}" for v in s]
            if self.reference is not None:
                row += [f"{v:.17g}" for v in self.reference[t]]
                row.append(f"{self.errors[t]:.17g}")
            lines.append(",".join(row))
        Path(path).write_text("\n".join(lines) + "\n")


def predict_trajectory(
    model: EdmdModel,
    x0,
    steps: int,
    recursion: str = "state",
    reference: np.ndarray | None = None,
) -> PredictedTrajectory:
    """Iterate the one-step predictor for ``steps`` steps from x0.

    recursion="state" re-embeds the predicted state through the kernel each
    step; recursion="coefficient" propagates the section coefficients with the
    operator matrix and only reads states out. A non-finite intermediate state
    aborts with the partial trajectory.
    """
    if steps < 1:
        raise ValueError("need at least one prediction step")
    if recursion not in ("state", "coefficient"):
        raise ValueError(f"unknown recursion mode: {recursion!r}")
    x0 = np.asarray(x0, dtype=float)
    states = [x0]
    aborted = False

    # overflow to inf is caught by the finiteness check, not warned about
    with np.errstate(over="ignore", invalid="ignore"):
        if recursion == "state":
            x = x0
            for _ in range(steps):
                x = predict_one_step(model, x)
                if not np.all(np.isfinite(x)):
                    aborted = True
                    break
                states.append(x)
        else:
            y = model.dataset.y
            k_op = koopman_matrix(model)
            coeffs = model.theta @ kernel_section(model, x0)
            for t in range(steps):
                if t > 0:
                    coeffs = k_op @ coeffs
                x = y.T @ coeffs
                if not np.all(np.isfinite(x)):
                    aborted = True
                    break
                states.append(x)

    states = np.array(states)
    errors = None
    if reference is not None:
        reference = np.asarray(reference, dtype=float)[: len(states)]
        errors = np.linalg.norm(states - reference, axis=1)
    return PredictedTrajectory(
        states=states,
        recursion=recursion,
        aborted=aborted,
        errors=errors,
        reference=reference,
    )
