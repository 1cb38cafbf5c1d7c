import json

import numpy as np
import pytest
import scipy.integrate
import scipy.linalg

from koopcert.dynamics import (
    BlowupError,
    LinearFlowSystem,
    LinearMapSystem,
    SnapshotDataset,
    VanDerPol,
    flow,
    generate_snapshots,
    rk4_step,
    system_from_dict,
)


def test_rk4_zero_field_is_identity():
    sys_ = LinearFlowSystem(np.zeros((2, 2)))
    x = np.array([0.3, -1.2])
    np.testing.assert_array_equal(rk4_step(sys_, x, 0.1), x)


def test_harmonic_oscillator_period():
    # mu = 0 reduces to x1' = x2, x2' = -x1: circular orbit of period 2*pi
    sys_ = VanDerPol(0.0)
    x = flow(sys_, np.array([1.0, 0.0]), 2 * np.pi)
    np.testing.assert_allclose(x, [1.0, 0.0], atol=1e-6)


def test_linear_flow_matches_matrix_exponential():
    m = np.array([[-1.0, 0.0], [0.0, -2.0]])
    sys_ = LinearFlowSystem(m)
    x0 = np.array([1.0, 1.0])
    t = 0.7
    np.testing.assert_allclose(
        flow(sys_, x0, t), scipy.linalg.expm(m * t) @ x0, atol=1e-8
    )


def test_linear_map_applies_matrix_once():
    sys_ = LinearMapSystem(np.diag([0.5, 0.8]))
    np.testing.assert_array_equal(
        flow(sys_, np.array([1.0, 1.0]), 0.123), [0.5, 0.8]
    )


def test_vdp_stable_contracts_to_origin():
    sys_ = VanDerPol(-1.0)
    x = np.array([0.1, 0.1])
    for _ in range(100):
        x = flow(sys_, x, 0.2)
    assert np.linalg.norm(x) < 1e-3


def test_rk4_order_of_convergence():
    # halving h cuts the single-step error by about 2^5 against solve_ivp
    sys_ = VanDerPol(1.0)
    x0 = np.array([1.3, -0.4])

    def reference(h):
        sol = scipy.integrate.solve_ivp(
            lambda t, y: sys_.vector_field(y), (0, h), x0,
            rtol=1e-12, atol=1e-14, dense_output=True,
        )
        return sol.y[:, -1]

    h = 0.2
    err_h = np.linalg.norm(rk4_step(sys_, x0, h) - reference(h))
    err_h2 = np.linalg.norm(rk4_step(sys_, x0, h / 2) - reference(h / 2))
    ratio = err_h / err_h2
    assert 24 <= ratio <= 40


def test_rk4_rejects_bad_input():
    sys_ = VanDerPol(1.0)
    with pytest.raises(BlowupError):
        rk4_step(sys_, np.array([np.nan, 0.0]), 0.1)
    with pytest.raises(ValueError):
        rk4_step(sys_, np.array([1.0, 0.0]), -0.1)
    with pytest.raises(ValueError):
        rk4_step(LinearMapSystem(np.eye(2)), np.ones(2), 0.1)


def test_flow_safety_bound_triggers():
    sys_ = LinearFlowSystem(np.array([[3.0]]))
    with pytest.raises(BlowupError):
        flow(sys_, np.array([1.0]), 5.0, safety_bound=10.0)


def test_snapshot_counts_vdp_protocol():
    ds = generate_snapshots(
        VanDerPol(-1.0), [[-1, 1], [-1, 1]], n_traj=40, dt=0.2, duration=5.0, seed=0
    )
    assert len(ds) == 40 * 25
    assert ds.meta["n_aborted"] == 0


def test_single_pair_dataset():
    ds = generate_snapshots(
        VanDerPol(-1.0), [[-1, 1], [-1, 1]], n_traj=1, dt=0.2, duration=0.2, seed=1
    )
    assert len(ds) == 1


def test_linear_map_pairs_exact():
    f = np.diag([0.5, 0.8])
    ds = generate_snapshots(
        LinearMapSystem(f), [[-1, 1], [-1, 1]], n_traj=30, dt=1.0, duration=3.0, seed=2
    )
    np.testing.assert_array_equal(ds.y, ds.x @ f.T)


def test_determinism_bitwise():
    args = dict(n_traj=10, dt=0.2, duration=1.0, seed=123)
    a = generate_snapshots(VanDerPol(-1.0), [[-1, 1], [-1, 1]], **args)
    b = generate_snapshots(VanDerPol(-1.0), [[-1, 1], [-1, 1]], **args)
    np.testing.assert_array_equal(a.x, b.x)
    np.testing.assert_array_equal(a.y, b.y)


def test_x_samples_inside_recorded_domain():
    ds = generate_snapshots(
        VanDerPol(1.0), [[-0.3, 0.3], [-0.3, 0.3]], n_traj=10, dt=0.2, duration=5.0,
        seed=4,
    )
    lo, hi = ds.domain[:, 0], ds.domain[:, 1]
    assert np.all(ds.x >= lo) and np.all(ds.x <= hi)
    # trajectories spiral out to the limit cycle, so the covered domain is
    # strictly larger than the sampling box
    assert np.any(hi > 0.3 + 1e-6)


def test_initial_states_uniform_in_box():
    box = np.array([[-1.0, 3.0], [2.0, 4.0]])
    ds = generate_snapshots(
        LinearMapSystem(np.eye(2) * 0.5), box, n_traj=2000, dt=1.0, duration=1.0,
        seed=5,
    )
    mean = np.asarray(ds.meta["init_mean"])
    center = box.mean(axis=1)
    width = box[:, 1] - box[:, 0]
    sigma = width / np.sqrt(12) / np.sqrt(2000)
    assert np.all(np.abs(mean - center) <= 3 * sigma)


def test_blowup_truncates_trajectories():
    sys_ = LinearFlowSystem(np.array([[3.0, 0.0], [0.0, 3.0]]))
    ds = generate_snapshots(
        sys_, [[0.5, 1.0], [0.5, 1.0]], n_traj=5, dt=0.5, duration=10.0, seed=6
    )
    assert ds.meta["n_aborted"] == 5
    assert len(ds) < 5 * 20
    assert np.all(np.isfinite(ds.x)) and np.all(np.isfinite(ds.y))


def test_all_trajectories_escaping_raises():
    sys_ = LinearFlowSystem(np.array([[5.0]]))
    with pytest.raises(BlowupError):
        generate_snapshots(sys_, [[0.9, 1.0]], n_traj=3, dt=1.0, duration=1.0, seed=7)


def test_dataset_csv_round_trip(tmp_path):
    ds = generate_snapshots(
        VanDerPol(-1.0), [[-1, 1], [-1, 1]], n_traj=5, dt=0.2, duration=1.0, seed=8
    )
    path = tmp_path / "ds.csv"
    ds.save(path)
    loaded = SnapshotDataset.load(path)
    np.testing.assert_array_equal(loaded.x, ds.x)
    np.testing.assert_array_equal(loaded.y, ds.y)
    assert loaded.meta == json.loads(json.dumps(ds.meta))
    assert loaded.dt == ds.dt


def test_system_dict_round_trip():
    for sys_ in (
        VanDerPol(-1.0),
        LinearMapSystem(np.diag([0.5, 0.8])),
        LinearFlowSystem(np.array([[0.0, 1.0], [-1.0, 0.0]])),
    ):
        again = system_from_dict(sys_.to_dict())
        assert type(again) is type(sys_)
        assert again.to_dict() == sys_.to_dict()


def test_singular_linear_map_rejected():
    with pytest.raises(ValueError):
        LinearMapSystem(np.array([[1.0, 0.0], [0.0, 0.0]]))
