"""Kernel evaluation and Gram matrix assembly.

Three kernel variants are supported: the linear kernel x.y, a compactly
supported Wendland radial kernel rho(|x - y|/scale), and products of kernels.
The product of the linear and a Wendland kernel is the working kernel of this
package: the linear factor pins every function in the induced space to zero at
the origin (the equilibrium), while the radial factor carries the smoothness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .wendland import PiecewisePoly1D, wendland_profile

__all__ = [
    "Kernel",
    "LinearKernel",
    "WendlandKernel",
    "ProductKernel",
    "GramMatrix",
    "gram",
    "kernel_from_dict",
]

# Gram entries with magnitude below this are stored as exact zeros; compact
# support makes such entries genuinely sparse rather than noise.
SPARSITY_EPS = 1e-15


class Kernel:
    """Base class: symmetric positive semidefinite bivariate functions."""

    def __call__(self, x, y) -> float:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise ValueError(f"point shapes differ: {x.shape} vs {y.shape}")
        return float(self.pairwise(x[None, :], y[None, :])[0, 0])

    def pairwise(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Matrix of kernel values for all (row, col) point combinations."""
        raise NotImplementedError

    def diag(self, points: np.ndarray) -> np.ndarray:
        """Vector of kappa(p, p) over a point set."""
        return np.array([self(p, p) for p in np.atleast_2d(points)])

    def diag_sup(self, box: np.ndarray) -> float | None:
        """Analytic sup of kappa(x, x) over an axis-aligned box, if known."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class LinearKernel(Kernel):
    """kappa(x, y) = x.y; its space is the span of linear functionals."""

    def pairwise(self, rows, cols):
        return rows @ cols.T

    def diag(self, points):
        return np.sum(np.atleast_2d(points) ** 2, axis=1)

    def diag_sup(self, box):
        # |x|^2 over a box is maximized componentwise at the larger-magnitude end
        return float(np.sum(np.max(np.asarray(box, dtype=float) ** 2, axis=1)))

    def to_dict(self):
        return {"kind": "linear"}


@dataclass(frozen=True)
class WendlandKernel(Kernel):
    """kappa(x, y) = rho(|x - y| / scale) with the (dim, smoothness) profile.

    Compactly supported: zero whenever |x - y| > scale. The diagonal is the
    constant rho(0) for every x, which is what makes a radial kernel blind to
    any distinguished point of the dynamics.
    """

    dim: int
    smoothness: int = 1
    scale: float = 1.0
    profile: PiecewisePoly1D = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("support scale must be positive")
        object.__setattr__(
            self, "profile", wendland_profile(self.dim, self.smoothness)
        )

    def pairwise(self, rows, cols):
        r = cdist(rows, cols) / self.scale
        return self.profile(r)

    def diag(self, points):
        return np.full(len(np.atleast_2d(points)), self.profile(0.0))

    def diag_sup(self, box):
        return self.profile(0.0)

    def to_dict(self):
        return {
            "kind": "wendland",
            "dim": self.dim,
            "smoothness": self.smoothness,
            "scale": self.scale,
        }


@dataclass(frozen=True)
class ProductKernel(Kernel):
    """Pointwise product of factor kernels (PSD by the Schur product theorem)."""

    factors: tuple[Kernel, ...]

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("product kernel needs at least one factor")
        for f in self.factors:
            if isinstance(f, ProductKernel) and any(
                isinstance(g, ProductKernel) for g in f.factors
            ):
                raise ValueError("product kernels may nest at most two levels")

    def pairwise(self, rows, cols):
        out = self.factors[0].pairwise(rows, cols)
        for f in self.factors[1:]:
            out = out * f.pairwise(rows, cols)
        return out

    def diag(self, points):
        out = self.factors[0].diag(points)
        for f in self.factors[1:]:
            out = out * f.diag(points)
        return out

    def diag_sup(self, box):
        # Each factor diagonal is either constant (radial) or |x|^2 (linear),
        # all maximized at the same largest-norm corner of the box.
        sups = [f.diag_sup(box) for f in self.factors]
        if any(s is None for s in sups):
            return None
        return float(np.prod(sups))

    def to_dict(self):
        return {"kind": "product", "factors": [f.to_dict() for f in self.factors]}


def kernel_from_dict(spec: dict) -> Kernel:
    kind = spec.get("kind")
    if kind == "linear":
        return LinearKernel()
    if kind == "wendland":
        return WendlandKernel(
            dim=int(spec["dim"]),
            smoothness=int(spec.get("smoothness", 1)),
            scale=float(spec.get("scale", 1.0)),
        )
    if kind == "product":
        return ProductKernel(tuple(kernel_from_dict(f) for f in spec["factors"]))
    raise ValueError(f"unknown kernel kind: {kind!r}")


@dataclass(frozen=True)
class GramMatrix:
    """Kernel evaluations entries[i, j] = kappa(row_points[i], col_points[j])."""

    entries: np.ndarray
    row_points: np.ndarray
    col_points: np.ndarray
    symmetric: bool = False


def gram(kernel: Kernel, rows, cols=None) -> GramMatrix:
    """Assemble the (cross-)Gram matrix of a point set pair.

    With ``cols=None`` the self-Gram is built and flagged symmetric. Entries
    with magnitude below SPARSITY_EPS are stored as exact zeros.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    symmetric = cols is None
    cols = rows if symmetric else np.atleast_2d(np.asarray(cols, dtype=float))
    if rows.size == 0 or cols.size == 0:
        raise ValueError("gram matrix needs at least one point on each side")
    if rows.shape[1] != cols.shape[1]:
        raise ValueError(
            f"point dimensions differ: {rows.shape[1]} vs {cols.shape[1]}"
        )
    entries = kernel.pairwise(rows, cols)
    if symmetric:
        entries = 0.5 * (entries + entries.T)
    entries[np.abs(entries) < SPARSITY_EPS] = 0.0
    return GramMatrix(entries, rows, cols, symmetric=symmetric)
