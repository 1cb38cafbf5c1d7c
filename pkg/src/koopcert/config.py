"""Experiment configuration: schema, validation, and the built-in presets.

Configs live in a single YAML file so that every knob of a run is on disk.
Validation errors carry the dotted path of the offending key.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .dynamics import System, system_from_dict
from .kernels import Kernel, kernel_from_dict

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "preset_config", "PRESETS"]


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending key path."""


@dataclass
class ExperimentConfig:
    system: System
    domain: np.ndarray  # (d, 2) initial-state sampling box
    n_traj: int
    dt: float
    duration: float
    seed: int
    kernel_spec: dict  # kernel description; built per run via build_kernel()
    beta: float | None  # None -> scale-aware default
    rank: int
    eps: float = 0.0
    norm_a_bound: float = 0.0
    delta: float = 0.05
    predict_steps: int = 25
    n_holdout: int = 20
    recursion: str = "state"
    output: str | None = None
    preset: str | None = None
    raw: dict = field(default_factory=dict, repr=False)

    def build_kernel(self, default_scale: float | None = None) -> Kernel:
        """Build the kernel; unset Wendland scales fall back to default_scale
        (by convention the diameter of the domain the data covers)."""

        def resolve(spec: dict) -> dict:
            if spec["kind"] == "wendland" and spec.get("scale") is None:
                if default_scale is None:
                    raise ConfigError(
                        "kernel.scale: unset and no domain diameter available"
                    )
                return {**spec, "scale": float(default_scale)}
            if spec["kind"] == "product":
                return {**spec, "factors": [resolve(f) for f in spec["factors"]]}
            return spec

        return kernel_from_dict(resolve(self.kernel_spec))

    def with_seed(self, seed: int) -> "ExperimentConfig":
        cfg = load_config_dict({**self.raw, "sampling": {**self.raw["sampling"], "seed": int(seed)}})
        cfg.preset = self.preset
        return cfg


def _require(cfg: dict, key: str, types, path: str, default=None, required=True):
    if key not in cfg:
        if required:
            raise ConfigError(f"{path}{key}: missing required key")
        return default
    value = cfg[key]
    if types is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, types) or isinstance(value, bool) and types is not bool:
        tname = types.__name__ if isinstance(types, type) else "/".join(t.__name__ for t in types)
        raise ConfigError(f"{path}{key}: expected {tname}, got {type(value).__name__}")
    return value


def _positive(value, path):
    if value <= 0:
        raise ConfigError(f"{path}: must be positive, got {value}")
    return value


def _validate_kernel_spec(spec: dict, dim: int, path: str, depth: int = 0) -> dict:
    if not isinstance(spec, dict):
        raise ConfigError(f"{path}: expected mapping")
    kind = _require(spec, "kind", str, path + ".")
    if kind == "linear":
        return {"kind": "linear"}
    if kind == "wendland":
        k = _require(spec, "smoothness", int, path + ".", default=1, required=False)
        if k < 0:
            raise ConfigError(f"{path}.smoothness: must be >= 0, got {k}")
        scale = _require(spec, "scale", float, path + ".", default=None, required=False)
        if scale is not None:
            _positive(scale, f"{path}.scale")
        return {"kind": "wendland", "dim": dim, "smoothness": k, "scale": scale}
    if kind == "product":
        if depth >= 1:
            raise ConfigError(f"{path}: product kernels may nest at most two levels")
        factors = _require(spec, "factors", list, path + ".")
        if not factors:
            raise ConfigError(f"{path}.factors: must not be empty")
        return {
            "kind": "product",
            "factors": [
                _validate_kernel_spec(f, dim, f"{path}.factors[{i}]", depth + 1)
                for i, f in enumerate(factors)
            ],
        }
    raise ConfigError(f"{path}.kind: unknown kernel kind {kind!r}")


def load_config_dict(cfg: dict) -> ExperimentConfig:
    """Validate a raw config mapping into an ExperimentConfig."""
    if not isinstance(cfg, dict):
        raise ConfigError("config root: expected mapping")

    sys_cfg = _require(cfg, "system", dict, "")
    kind = _require(sys_cfg, "kind", str, "system.")
    try:
        if kind == "vanderpol":
            system = system_from_dict(
                {"kind": kind, "mu": _require(sys_cfg, "mu", float, "system.")}
            )
        elif kind in ("linear_map", "linear_flow"):
            matrix = _require(sys_cfg, "matrix", list, "system.")
            system = system_from_dict({"kind": kind, "matrix": matrix})
        else:
            raise ConfigError(f"system.kind: unknown system kind {kind!r}")
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"system: {exc}") from exc

    domain = _require(cfg, "domain", list, "")
    box = np.asarray(domain, dtype=float)
    if box.shape != (system.dim, 2):
        raise ConfigError(
            f"domain: expected {system.dim} [lo, hi] pairs, got shape {box.shape}"
        )
    if np.any(box[:, 0] >= box[:, 1]):
        raise ConfigError("domain: every [lo, hi] pair needs lo < hi")

    samp = _require(cfg, "sampling", dict, "")
    n_traj = _positive(_require(samp, "n_traj", int, "sampling."), "sampling.n_traj")
    dt = _positive(_require(samp, "dt", float, "sampling."), "sampling.dt")
    duration = _positive(
        _require(samp, "duration", float, "sampling."), "sampling.duration"
    )
    if duration < dt - 1e-12:
        raise ConfigError("sampling.duration: must be at least one sampling interval")
    seed = _require(samp, "seed", int, "sampling.", default=0, required=False)

    kernel_spec = _validate_kernel_spec(
        _require(cfg, "kernel", dict, ""), system.dim, "kernel"
    )

    edmd_cfg = _require(cfg, "edmd", dict, "", default={}, required=False)
    beta = _require(edmd_cfg, "beta", float, "edmd.", default=None, required=False)
    if beta is not None and beta < 0:
        raise ConfigError(f"edmd.beta: must be nonnegative, got {beta}")
    n_pairs = n_traj * int(np.floor(duration / dt + 1e-9))
    rank = _require(edmd_cfg, "rank", int, "edmd.", default=n_pairs, required=False)
    if not 1 <= rank <= n_pairs:
        raise ConfigError(f"edmd.rank: must be in [1, {n_pairs}], got {rank}")

    cert = _require(cfg, "certificate", dict, "", default={}, required=False)
    eps = _require(cert, "eps", float, "certificate.", default=0.0, required=False)
    norm_a = _require(cert, "norm_a_bound", float, "certificate.", default=0.0, required=False)
    delta = _require(cert, "delta", float, "certificate.", default=0.05, required=False)
    if eps < 0 or norm_a < 0:
        raise ConfigError("certificate: eps and norm_a_bound must be nonnegative")
    if not 0 < delta < 1:
        raise ConfigError(f"certificate.delta: must be in (0, 1), got {delta}")

    pred = _require(cfg, "prediction", dict, "", default={}, required=False)
    steps = _require(pred, "steps", int, "prediction.", default=25, required=False)
    n_holdout = _require(pred, "n_holdout", int, "prediction.", default=20, required=False)
    recursion = _require(pred, "recursion", str, "prediction.", default="state", required=False)
    if recursion not in ("state", "coefficient"):
        raise ConfigError(
            f"prediction.recursion: expected 'state' or 'coefficient', got {recursion!r}"
        )
    _positive(steps, "prediction.steps")
    if n_holdout < 0:
        raise ConfigError("prediction.n_holdout: must be nonnegative")

    output = _require(cfg, "output", str, "", default=None, required=False)

    return ExperimentConfig(
        system=system,
        domain=box,
        n_traj=n_traj,
        dt=dt,
        duration=duration,
        seed=seed,
        kernel_spec=kernel_spec,
        beta=beta,
        rank=rank,
        eps=eps,
        norm_a_bound=norm_a,
        delta=delta,
        predict_steps=steps,
        n_holdout=n_holdout,
        recursion=recursion,
        output=output,
        raw=cfg,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        cfg = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    config = load_config_dict(cfg)
    return config


def _product_spec(smoothness: int, scale: float) -> dict:
    return {
        "kind": "product",
        "factors": [
            {"kind": "linear"},
            {"kind": "wendland", "smoothness": smoothness, "scale": scale},
        ],
    }


# Reproduction presets. Scales were tuned once against the behavioral targets
# and are pinned here so a preset run is fully specified by its seed.
PRESETS: dict[str, dict] = {
    # mu = -1: origin asymptotically stable; spectrum inside the unit circle.
    "vdp-stable": {
        "system": {"kind": "vanderpol", "mu": -1.0},
        "domain": [[-1.0, 1.0], [-1.0, 1.0]],
        "sampling": {"n_traj": 40, "dt": 0.2, "duration": 5.0, "seed": 7},
        "kernel": _product_spec(1, 3.0),
        "edmd": {"rank": 25},
        "certificate": {"eps": 0.0, "norm_a_bound": 0.0, "delta": 0.05},
        "prediction": {"steps": 25, "n_holdout": 20},
    },
    # mu = +1 with initial states close to the origin: spectrum escapes the disk.
    "vdp-unstable-local": {
        "system": {"kind": "vanderpol", "mu": 1.0},
        "domain": [[-0.3, 0.3], [-0.3, 0.3]],
        "sampling": {"n_traj": 40, "dt": 0.2, "duration": 5.0, "seed": 7},
        "kernel": _product_spec(1, 7.0),
        "edmd": {"rank": 25},
        "certificate": {"eps": 0.0, "norm_a_bound": 0.0, "delta": 0.05},
        "prediction": {"steps": 25, "n_holdout": 20},
    },
    # mu = +1 sampled across the limit cycle: spectrum hugs the circle from
    # inside; inconclusive for the equilibrium, reflecting the attractor.
    "vdp-unstable-large": {
        "system": {"kind": "vanderpol", "mu": 1.0},
        "domain": [[-2.5, 2.5], [-2.5, 2.5]],
        "sampling": {"n_traj": 40, "dt": 0.2, "duration": 5.0, "seed": 7},
        "kernel": _product_spec(1, 7.1),
        "edmd": {"rank": 25},
        "certificate": {"eps": 0.0, "norm_a_bound": 0.0, "delta": 0.05},
        "prediction": {"steps": 25, "n_holdout": 20},
    },
    # Control run with the radial kernel alone: a radial kernel cannot see the
    # equilibrium, so its spectrum carries no stability guarantee
    # (demonstration only; no assertions attach to this preset).
    "vdp-wendland-only": {
        "system": {"kind": "vanderpol", "mu": -1.0},
        "domain": [[-1.0, 1.0], [-1.0, 1.0]],
        "sampling": {"n_traj": 40, "dt": 0.2, "duration": 5.0, "seed": 7},
        "kernel": {"kind": "wendland", "smoothness": 1, "scale": 3.0},
        "edmd": {"rank": 25},
        "certificate": {"eps": 0.0, "norm_a_bound": 0.0, "delta": 0.05},
        "prediction": {"steps": 25, "n_holdout": 20},
    },
    # Known linear system: learned spectrum must match the eigenvalue
    # product semigroup of F = diag(0.5, 0.8).
    "linear-oracle": {
        "system": {"kind": "linear_map", "matrix": [[0.5, 0.0], [0.0, 0.8]]},
        "domain": [[-1.0, 1.0], [-1.0, 1.0]],
        "sampling": {"n_traj": 500, "dt": 1.0, "duration": 1.0, "seed": 7},
        "kernel": _product_spec(2, 8.0),
        "edmd": {"beta": 1e-8, "rank": 30},
        "certificate": {"eps": 0.0, "norm_a_bound": 0.0, "delta": 0.05},
        "prediction": {"steps": 5, "n_holdout": 20},
    },
}


def preset_config(name: str, seed: int | None = None) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        )
    raw = yaml.safe_load(yaml.safe_dump(PRESETS[name]))  # deep copy
    if seed is not None:
        raw["sampling"]["seed"] = int(seed)
    config = load_config_dict(raw)
    config.preset = name
    return config
