import numpy as np
import pytest

from koopcert.config import preset_config
from koopcert.edmd import fit
from koopcert.kernels import LinearKernel, ProductKernel, WendlandKernel


@pytest.fixture(scope="session")
def linear_oracle_model():
    """The known-linear-system fit shared by spectrum oracle tests:
    F = diag(0.5, 0.8), 500 uniform samples on [-1, 1]^2, rank 30, beta 1e-8."""
    from koopcert.dynamics import SnapshotDataset

    f = np.diag([0.5, 0.8])
    rng = np.random.default_rng(7)
    x = rng.uniform(-1, 1, size=(500, 2))
    ds = SnapshotDataset(
        x=x, y=x @ f.T, dt=1.0,
        meta={"domain": [[-1.0, 1.0], [-1.0, 1.0]], "dt": 1.0},
    )
    kern = ProductKernel(
        (LinearKernel(), WendlandKernel(dim=2, smoothness=2, scale=8.0))
    )
    return fit(ds, kern, beta=1e-8, rank=30)


@pytest.fixture(scope="session")
def vdp_stable_run(tmp_path_factory):
    """One full vdp-stable pipeline run shared across test modules."""
    from koopcert.pipeline import run_pipeline

    out = tmp_path_factory.mktemp("vdp-stable")
    return run_pipeline(preset_config("vdp-stable"), out)
