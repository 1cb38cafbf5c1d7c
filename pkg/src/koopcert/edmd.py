"""Closed-form kernel EDMD with rank truncation and ridge regularization.

The regression matches pushed-forward kernel sections on the snapshot pairs:

    min over rank-r coefficient matrices
        (1/n) tr((Theta G_X - I)^T G_Y (Theta G_X - I)) + beta tr(Theta G_X Theta^T G_Y)

whose unconstrained stationary point is Theta = (G_X + n beta I)^{-1}. The rank
constraint is imposed by projecting onto the leading-r eigenspace of G_X
(kernel PCA), giving Theta_hat = V_r V_r^T (G_X + n beta I)^{-1}, computed here
through the shared eigenbasis as V_r diag(1/(w_j + n beta)) V_r^T.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .dynamics import SnapshotDataset
from .kernels import Kernel, gram, kernel_from_dict

__all__ = ["SolverError", "EdmdModel", "default_beta", "fit", "objective", "koopman_matrix"]

# Relative tie tolerance at the rank cutoff: a tied block is included in full,
# since projecting onto part of a tied eigenspace is basis-dependent.
TIE_RTOL = 1e-9


class SolverError(RuntimeError):
    """The normal equations cannot be solved as posed."""


@dataclass
class EdmdModel:
    """Fitted coefficient matrix with its kernel, data and hyperparameters.

    ``rank`` is the requested rank; ``effective_rank`` may exceed it when the
    eigenvalue at the cutoff is tied. ``theta`` satisfies
    theta @ (G_X + n beta I) = P_r with P_r the leading-rank projector.
    """

    dataset: SnapshotDataset
    kernel: Kernel
    beta: float
    rank: int
    effective_rank: int
    theta: np.ndarray
    gram_x: np.ndarray
    gram_xy: np.ndarray  # gram_xy[j, a] = kappa(x_j, y_a)
    _gram_y: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.dataset)

    @property
    def gram_y(self) -> np.ndarray:
        if self._gram_y is None:
            self._gram_y = gram(self.kernel, self.dataset.y).entries
        return self._gram_y

    def save(self, directory) -> None:
        """Persist as a directory: coefficients and points as CSV, params as JSON."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        _write_matrix(directory / "theta.csv", self.theta)
        self.dataset.save(directory / "snapshots.csv")
        params = {
            "kernel": self.kernel.to_dict(),
            "beta": self.beta,
            "rank": self.rank,
            "effective_rank": self.effective_rank,
            "n": self.n,
        }
        (directory / "model.json").write_text(
            json.dumps(params, indent=2, sort_keys=True) + "\n"
        )

    @classmethod
    def load(cls, directory) -> "EdmdModel":
        directory = Path(directory)
        params = json.loads((directory / "model.json").read_text())
        dataset = SnapshotDataset.load(directory / "snapshots.csv")
        kernel = kernel_from_dict(params["kernel"])
        theta = np.loadtxt(directory / "theta.csv", delimiter=",", ndmin=2)
        gram_x = gram(kernel, dataset.x).entries
        gram_xy = gram(kernel, dataset.x, dataset.y).entries
        return cls(
            dataset=dataset,
            kernel=kernel,
            beta=float(params["beta"]),
            rank=int(params["rank"]),
            effective_rank=int(params["effective_rank"]),
            theta=theta,
            gram_x=gram_x,
            gram_xy=gram_xy,
        )


def _write_matrix(path: Path, m: np.ndarray) -> None:
    lines = [",".join(f"{v:.17g}" for v in row) for row in np.atleast_2d(m)]
    path.write_text("\n".join(lines) + "\n")


def default_beta(gram_x: np.ndarray) -> float:
    """Scale-aware ridge default: 1e-8 * tr(G_X) / n."""
    n = gram_x.shape[0]
    return 1e-8 * float(np.trace(gram_x)) / n


def fit(
    dataset: SnapshotDataset,
    kernel: Kernel,
    beta: float | None = None,
    rank: int | None = None,
) -> EdmdModel:
    """Solve the rank-constrained ridge regression in closed form.

    ``beta=None`` applies the scale-aware default; ``rank=None`` means full
    rank n. Requires beta > 0 whenever G_X is singular.
    """
    n = len(dataset)
    gram_x = gram(kernel, dataset.x).entries
    gram_xy = gram(kernel, dataset.x, dataset.y).entries
    if beta is None:
        beta = default_beta(gram_x)
    if beta < 0:
        raise ValueError("ridge parameter must be nonnegative")
    rank = n if rank is None else int(rank)
    if not 1 <= rank <= n:
        raise ValueError(f"rank must be in [1, {n}], got {rank}")

    w, v = scipy.linalg.eigh(gram_x)
    w = np.clip(w[::-1], 0.0, None)  # descending, round-off negatives clamped
    v = v[:, ::-1]
    if beta == 0.0 and w[-1] <= n * np.finfo(float).eps * w[0]:
        raise SolverError("G_X is singular; a positive ridge parameter is required")

    r_eff = rank
    tie = TIE_RTOL * w[0]
    while r_eff < n and w[r_eff] >= w[rank - 1] - tie:
        r_eff += 1

    v_r = v[:, :r_eff]
    theta = (v_r / (w[:r_eff] + n * beta)) @ v_r.T
    return EdmdModel(
        dataset=dataset,
        kernel=kernel,
        beta=float(beta),
        rank=rank,
        effective_rank=r_eff,
        theta=theta,
        gram_x=gram_x,
        gram_xy=gram_xy,
    )


def objective(model: EdmdModel, theta: np.ndarray) -> float:
    """Regression objective at an arbitrary coefficient matrix.

    Gram-coordinate expansion of the mean squared section mismatch plus the
    ridge on the squared Hilbert-Schmidt norm.
    """
    n = model.n
    gx, gy = model.gram_x, model.gram_y
    resid = theta @ gx - np.eye(n)
    fit_term = float(np.trace(resid.T @ gy @ resid)) / n
    reg_term = model.beta * float(np.trace(theta @ gx @ theta.T @ gy))
    return fit_term + reg_term


def koopman_matrix(model: EdmdModel) -> np.ndarray:
    """Matrix of the fitted operator on the span of the y kernel sections.

    K = theta @ G_XY maps section coefficients forward; its nonzero
    eigenvalues are exactly the nonzero spectrum of the finite-rank operator.
    """
    return model.theta @ model.gram_xy
