"""Benchmark dynamical systems and snapshot-pair generation.

Continuous-time systems are discretized by the fixed sampling interval dt:
the discrete map under study is the time-dt flow. Snapshot pairs are taken as
consecutive samples along seeded, uniformly initialized trajectories.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "BlowupError",
    "System",
    "VanDerPol",
    "LinearFlowSystem",
    "LinearMapSystem",
    "system_from_dict",
    "rk4_step",
    "flow",
    "generate_snapshots",
    "SnapshotDataset",
]

MAX_SUBSTEP = 1e-3  # time units per RK4 substep inside flow()


class BlowupError(RuntimeError):
    """A trajectory left the configured safety box or became non-finite."""


class System:
    dim: int
    continuous: bool

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class VanDerPol(System):
    """Van der Pol oscillator: x1' = x2, x2' = mu*(1 - x1^2)*x2 - x1.

    For mu < 0 the origin is asymptotically stable (an unstable limit cycle
    bounds its basin); for mu > 0 the origin is unstable and orbits approach
    a stable limit cycle.
    """

    mu: float
    dim: int = field(default=2, init=False)
    continuous: bool = field(default=True, init=False)

    def vector_field(self, states: np.ndarray) -> np.ndarray:
        x1, x2 = states[..., 0], states[..., 1]
        return np.stack([x2, self.mu * (1.0 - x1**2) * x2 - x1], axis=-1)

    def to_dict(self):
        return {"kind": "vanderpol", "mu": self.mu}


@dataclass(frozen=True)
class LinearFlowSystem(System):
    """Continuous-time linear system x' = M x."""

    matrix: np.ndarray
    continuous: bool = field(default=True, init=False)

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if m.shape[0] != m.shape[1]:
            raise ValueError("system matrix must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def vector_field(self, states: np.ndarray) -> np.ndarray:
        return states @ self.matrix.T

    def to_dict(self):
        return {"kind": "linear_flow", "matrix": self.matrix.tolist()}


@dataclass(frozen=True)
class LinearMapSystem(System):
    """Discrete-time linear map x -> F x; F must be nonsingular."""

    matrix: np.ndarray
    continuous: bool = field(default=False, init=False)

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        if m.shape[0] != m.shape[1]:
            raise ValueError("system matrix must be square")
        sign, _ = np.linalg.slogdet(m)
        if sign == 0:
            raise ValueError("linear map must be nonsingular")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply_map(self, states: np.ndarray) -> np.ndarray:
        return states @ self.matrix.T

    def to_dict(self):
        return {"kind": "linear_map", "matrix": self.matrix.tolist()}


def system_from_dict(spec: dict) -> System:
    kind = spec.get("kind")
    if kind == "vanderpol":
        return VanDerPol(mu=float(spec["mu"]))
    if kind == "linear_flow":
        return LinearFlowSystem(np.asarray(spec["matrix"], dtype=float))
    if kind == "linear_map":
        return LinearMapSystem(np.asarray(spec["matrix"], dtype=float))
    raise ValueError(f"unknown system kind: {kind!r}")


def rk4_step(system: System, x: np.ndarray, h: float) -> np.ndarray:
    """One classical 4th-order Runge-Kutta step of a continuous-time system.

    Works on a single state or a batch of states (leading axes preserved).
    """
    if not system.continuous:
        raise ValueError("rk4_step requires a continuous-time system")
    if h <= 0:
        raise ValueError("step size must be positive")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise BlowupError("non-finite state")
    f = system.vector_field
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise BlowupError("non-finite state")
    return out


def flow(system: System, x, dt: float, safety_bound: float | None = None):
    """Time-dt flow of the system; the discrete map applies its matrix once.

    Continuous systems are integrated with fixed RK4 substeps of at most
    MAX_SUBSTEP time units. If ``safety_bound`` is given, a BlowupError is
    raised as soon as any state coordinate exceeds it in magnitude.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(system, LinearMapSystem) or not system.continuous:
        out = system.apply_map(x)
    else:
        if dt <= 0:
            raise ValueError("dt must be positive for continuous systems")
        n_sub = max(1, math.ceil(dt / MAX_SUBSTEP - 1e-12))
        h = dt / n_sub
        out = x
        for _ in range(n_sub):
            out = rk4_step(system, out, h)
            if safety_bound is not None and np.any(np.abs(out) > safety_bound):
                raise BlowupError("trajectory escaped the safety box")
    if safety_bound is not None and np.any(np.abs(out) > safety_bound):
        raise BlowupError("trajectory escaped the safety box")
    if not np.all(np.isfinite(out)):
        raise BlowupError("non-finite state")
    return out


@dataclass
class SnapshotDataset:
    """Snapshot pairs (x_i, y_i) with y_i the image of x_i under the time-dt map.

    ``meta`` records the generating system, the initial-state sampling box, the
    domain bounds actually covered by the x samples, the seed, and abort
    counts. x rows always lie inside ``meta['domain']``; y rows of the final
    pair of each trajectory may exit (counted in ``meta['n_y_outside_domain']``).
    """

    x: np.ndarray
    y: np.ndarray
    dt: float
    meta: dict

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    @property
    def domain(self) -> np.ndarray:
        return np.asarray(self.meta["domain"], dtype=float)

    def save(self, csv_path) -> None:
        csv_path = Path(csv_path)
        d = self.dim
        header = ",".join([f"x{i}" for i in range(d)] + [f"y{i}" for i in range(d)])
        lines = [header]
        for xi, yi in zip(self.x, self.y):
            lines.append(",".join(f"{v:.17g}" for v in (*xi, *yi)))
        csv_path.write_text("\n".join(lines) + "\n")
        sidecar = csv_path.with_suffix(csv_path.suffix + ".meta.json")
        sidecar.write_text(json.dumps(self.meta, indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, csv_path) -> "SnapshotDataset":
        csv_path = Path(csv_path)
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
        meta = json.loads(
            csv_path.with_suffix(csv_path.suffix + ".meta.json").read_text()
        )
        d = data.shape[1] // 2
        return cls(x=data[:, :d], y=data[:, d:], dt=float(meta["dt"]), meta=meta)


def _spot_check(system, x, y, dt, n=10, seed=0, tol=1e-9):
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(x), size=min(n, len(x)), replace=False)
    for i in idx:
        err = np.max(np.abs(flow(system, x[i], dt) - y[i]))
        if err > tol:
            raise AssertionError(f"pair {i} violates y = flow(x, dt): err={err:.3e}")


def generate_snapshots(
    system: System,
    domain,
    n_traj: int,
    dt: float,
    duration: float,
    seed: int,
) -> SnapshotDataset:
    """Sample trajectories and emit consecutive-sample snapshot pairs.

    Initial states are drawn uniformly from the axis-aligned ``domain`` box
    (one seeded stream). Each trajectory is integrated for ``duration`` and
    contributes the pairs (x_t, x_{t+dt}); a trajectory that escapes the
    safety box (10x the domain diameter) is truncated at the escape and
    counted in ``meta['n_aborted']``.
    """
    box = np.asarray(domain, dtype=float)
    if box.shape != (system.dim, 2):
        raise ValueError(f"domain box must have shape ({system.dim}, 2)")
    if n_traj < 1:
        raise ValueError("need at least one trajectory")
    if duration < dt - 1e-12:
        raise ValueError("duration must be at least one sampling interval")
    n_steps = int(math.floor(duration / dt + 1e-9))
    diameter = float(np.linalg.norm(box[:, 1] - box[:, 0]))
    center_mag = float(np.max(np.abs(box)))
    safety_bound = center_mag + 10.0 * diameter

    rng = np.random.default_rng(seed)
    states = rng.uniform(box[:, 0], box[:, 1], size=(n_traj, system.dim))
    init_states = states.copy()

    # Batched integration with per-trajectory escape masking.
    samples = np.empty((n_steps + 1, n_traj, system.dim))
    samples[0] = states
    alive = np.ones(n_traj, dtype=bool)
    for t in range(n_steps):
        nxt = np.full_like(states, np.nan)
        if np.any(alive):
            try:
                nxt[alive] = flow(system, states[alive], dt, safety_bound)
            except BlowupError:
                # Retry trajectory-by-trajectory to isolate the escapees.
                for j in np.flatnonzero(alive):
                    try:
                        nxt[j] = flow(system, states[j], dt, safety_bound)
                    except BlowupError:
                        nxt[j] = np.nan
        escaped = alive & (
            ~np.all(np.isfinite(nxt), axis=1)
            | np.any(np.abs(np.nan_to_num(nxt)) > safety_bound, axis=1)
        )
        alive &= ~escaped
        nxt[~alive] = np.nan
        samples[t + 1] = nxt
        states = np.nan_to_num(nxt)

    xs, ys = [], []
    for j in range(n_traj):
        traj = samples[:, j, :]
        valid = np.all(np.isfinite(traj), axis=1)
        last = int(np.argmin(valid)) if not valid.all() else n_steps + 1
        if last >= 2:
            xs.append(traj[: last - 1])
            ys.append(traj[1:last])
    if not xs:
        raise BlowupError("every trajectory escaped the safety box")
    x = np.concatenate(xs)
    y = np.concatenate(ys)

    # Domain covered by the data: x samples plus the sampling box itself.
    lo = np.minimum(box[:, 0], x.min(axis=0))
    hi = np.maximum(box[:, 1], x.max(axis=0))
    data_domain = np.stack([lo, hi], axis=1)
    outside = np.any((y < lo) | (y > hi), axis=1)

    meta = {
        "system": system.to_dict(),
        "dt": dt,
        "duration": duration,
        "seed": int(seed),
        "n_traj": int(n_traj),
        "init_box": box.tolist(),
        "domain": data_domain.tolist(),
        "n_pairs": int(len(x)),
        "n_aborted": int(n_traj - int(alive.sum())),
        "n_y_outside_domain": int(outside.sum()),
        "init_mean": init_states.mean(axis=0).tolist(),
    }
    dataset = SnapshotDataset(x=x, y=y, dt=dt, meta=meta)
    _spot_check(system, x, y, dt)
    return dataset
