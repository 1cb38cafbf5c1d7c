"""Acceptance suite: one test per release criterion, at stated tolerances.

Each test prints a single `[criterion NN] PASS/FAIL` line (visible with -s,
and in the failure report otherwise) and then asserts.
"""

import time

import numpy as np
import scipy.linalg

import koopcert as kc
from koopcert.config import preset_config
from koopcert.spectral import Verdict

from oracles import profile_quadrature
from test_edmd import make_dataset, product_kernel


def criterion(num, description, ok, detail=""):
    line = f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}: {description}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def preset_radii(name, seeds):
    reports = []
    for seed in seeds:
        cfg = preset_config(name, seed=seed)
        ds = kc.generate_snapshots(
            cfg.system, cfg.domain, n_traj=cfg.n_traj, dt=cfg.dt,
            duration=cfg.duration, seed=cfg.seed,
        )
        diam = float(np.linalg.norm(ds.domain[:, 1] - ds.domain[:, 0]))
        model = kc.fit(ds, cfg.build_kernel(default_scale=diam),
                       beta=cfg.beta, rank=cfg.rank)
        reports.append(kc.spectrum(model))
    return reports


def test_criterion_01_wendland_quadrature_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for d in range(1, 5):
        for k in range(0, 4):
            r = rng.uniform(0.0, 1.0, 100)
            err = np.max(np.abs(kc.wendland_profile(d, k)(r)
                                - profile_quadrature(d, k, r)))
            worst = max(worst, float(err))
    elapsed = time.perf_counter() - t0
    criterion(
        1, "profile matches iterated-integral quadrature to 1e-9 on (d,k) grid",
        worst <= 1e-9 and elapsed < 5.0,
        f"worst err {worst:.2e}, {elapsed:.2f}s",
    )


def test_criterion_02_closed_form_profile_d3_k1():
    grid = np.linspace(0.0, 1.0, 1000)
    got = kc.wendland_profile(3, 1)(grid)
    want = (1 - grid) ** 4 * (4 * grid + 1) / 20
    err = float(np.max(np.abs(got - want)))
    criterion(2, "profile(3,1) equals (1-r)^4(4r+1)/20 on a 1000-point grid",
              err <= 1e-12, f"max err {err:.2e}")


def test_criterion_03_gram_positive_semidefinite():
    rng = np.random.default_rng(33)
    worst = np.inf
    for _ in range(30):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(2, 101))
        pts = rng.uniform(-2, 2, size=(n, d))
        kernels = [
            kc.LinearKernel(),
            kc.WendlandKernel(dim=d, smoothness=int(rng.integers(0, 3)), scale=2.0),
            kc.ProductKernel((kc.LinearKernel(),
                              kc.WendlandKernel(dim=d, smoothness=1, scale=2.0))),
        ]
        for kern in kernels:
            g = kc.gram(kern, pts).entries
            floor = -1e-8 * np.trace(g) / n
            margin = float(scipy.linalg.eigvalsh(g).min() - floor)
            worst = min(worst, margin)
    criterion(3, "self-Gram min eigenvalue >= -1e-8 * trace/n for all variants",
              worst >= 0.0, f"worst margin {worst:.2e}")


def test_criterion_04_edmd_stationarity():
    rng = np.random.default_rng(44)
    worst = 0.0
    for i in range(20):
        n = int(rng.integers(10, 60))
        d = int(rng.integers(1, 4))
        x = rng.uniform(-1, 1, size=(n, d))
        f = np.diag(rng.uniform(0.2, 0.95, d))
        ds = make_dataset(x, x @ f.T)
        beta = float(rng.choice([0.0, 1e-8, 1e-4, 1e-1]))
        if beta == 0.0:
            beta = 1e-8  # keep singular Grams solvable across variants
        r = int(rng.integers(1, n + 1))
        kern = product_kernel(d, smoothness=int(rng.integers(0, 3)), scale=3.0)
        model = kc.fit(ds, kern, beta=beta, rank=r)
        w, v = scipy.linalg.eigh(model.gram_x)
        v_r = v[:, ::-1][:, : model.effective_rank]
        resid = np.linalg.norm(
            v_r @ v_r.T - model.theta @ (model.gram_x + n * beta * np.eye(n)), "fro"
        )
        worst = max(worst, float(resid / n))
    criterion(4, "||P_r - theta (G_X + n beta I)||_F <= 1e-8 n over 20 random fits",
              worst <= 1e-8, f"worst resid/n {worst:.2e}")


def test_criterion_05_linear_spectrum_oracle(linear_oracle_model):
    t0 = time.perf_counter()
    report = kc.spectrum(linear_oracle_model)
    eig = report.eigenvalues
    dists = {t: float(np.min(np.abs(eig - t)))
             for t in (0.5, 0.8, 0.25, 0.40, 0.64)}
    ok = (dists[0.5] < 0.02 and dists[0.8] < 0.02
          and dists[0.25] < 0.05 and dists[0.40] < 0.05 and dists[0.64] < 0.05
          and report.spectral_radius <= 0.85)
    elapsed = time.perf_counter() - t0
    criterion(
        5, "learned spectrum of diag(0.5,0.8) matches the product semigroup",
        ok and elapsed < 30.0,
        "dists " + " ".join(f"{t}:{v:.3f}" for t, v in dists.items())
        + f", radius {report.spectral_radius:.3f}, {elapsed:.1f}s",
    )


def test_criterion_06_vdp_stable_reproduction():
    t0 = time.perf_counter()
    reports = preset_radii("vdp-stable", range(10))
    inside = [r.spectral_radius < 1.0 for r in reports]
    verdicts = [
        kc.certify_stability(r, eps=0.0, norm_a_bound=0.0).verdict
        for r in reports
    ]
    certified = [v is Verdict.CERTIFIED_STABLE for v in verdicts]
    elapsed = time.perf_counter() - t0
    ok = sum(inside) >= 9 and sum(certified) >= 9 and elapsed < 120.0
    criterion(
        6, "vdp-stable: radius < 1 and CertifiedStable at eps=0 for >= 9/10 seeds",
        ok,
        f"{sum(inside)}/10 inside, radii "
        f"[{min(r.spectral_radius for r in reports):.4f}, "
        f"{max(r.spectral_radius for r in reports):.4f}], {elapsed:.0f}s",
    )


def test_criterion_07_vdp_unstable_local_reproduction():
    reports = preset_radii("vdp-unstable-local", range(10))
    outside = [r.spectral_radius > 1.0 for r in reports]
    criterion(
        7, "vdp-unstable-local: radius > 1 for >= 8/10 seeds",
        sum(outside) >= 8,
        f"{sum(outside)}/10 outside, radii "
        f"[{min(r.spectral_radius for r in reports):.4f}, "
        f"{max(r.spectral_radius for r in reports):.4f}]",
    )


def test_criterion_08_vdp_unstable_large_reproduction():
    reports = preset_radii("vdp-unstable-large", range(10))
    hits = [
        0.95 <= r.spectral_radius <= 1.02
        and int(np.sum(np.abs(r.eigenvalues) > 0.9)) >= 3
        for r in reports
    ]
    criterion(
        8, "vdp-unstable-large: radius in [0.95, 1.02] with >= 3 near-circle "
           "eigenvalues for >= 8/10 seeds",
        sum(hits) >= 8,
        f"{sum(hits)}/10, radii "
        f"[{min(r.spectral_radius for r in reports):.4f}, "
        f"{max(r.spectral_radius for r in reports):.4f}]",
    )


def test_criterion_09_prediction_quality(vdp_stable_run):
    terminal = [t.errors[-1] for t in vdp_stable_run.trajectories
                if t.errors is not None]
    med = float(np.median(terminal))
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", kc.StarvationWarning)
        at_origin = kc.predict_one_step(vdp_stable_run.model, np.zeros(2))
    ok = len(terminal) == 20 and med < 0.1 and np.array_equal(at_origin, np.zeros(2))
    criterion(
        9, "vdp-stable: median terminal prediction error < 0.1 and 0 -> 0 exactly",
        ok, f"median {med:.4f} over {len(terminal)} holdouts",
    )


def test_criterion_10_sample_complexity_formula():
    exact = kc.sample_complexity(1.0, 0.1, 0.05)
    clamp = kc.sample_complexity(1.0, 1e9, 0.05)
    homogeneous = all(
        abs(kc.sample_complexity(2 * m, e, d) - 4 * kc.sample_complexity(m, e, d)) <= 4
        for m, e, d in [(1.0, 0.1, 0.05), (0.5, 0.2, 0.1), (2.0, 0.05, 0.01)]
    )
    criterion(
        10, "sample complexity: ceil(800 ln 80) = 3506, clamps to 1, scales as M^2",
        exact == 3506 and clamp == 1 and homogeneous,
        f"got {exact}, clamp {clamp}",
    )


def test_criterion_11_consistency_trend():
    sizes = [500, 1000, 2000, 4000]
    seeds = range(3)
    sys_ = kc.VanDerPol(-1.0)
    box = np.array([[-1.0, 1.0], [-1.0, 1.0]])
    kern = product_kernel(2, smoothness=1, scale=3.0)
    holdout = np.random.default_rng(123).uniform(-1, 1, size=(50, 2))
    truth = np.array([kc.flow(sys_, x, 0.2) for x in holdout])

    medians = []
    for n in sizes:
        errs = []
        for seed in seeds:
            ds = kc.generate_snapshots(
                sys_, box, n_traj=n // 25, dt=0.2, duration=5.0, seed=seed
            )
            model = kc.fit(ds, kern, rank=int(np.ceil(2 * np.sqrt(n))))
            preds = np.array([kc.predict_one_step(model, x) for x in holdout])
            errs.extend(np.linalg.norm(preds - truth, axis=1))
        medians.append(float(np.median(errs)))
    increases = sum(b > a for a, b in zip(medians, medians[1:]))
    criterion(
        11, "median held-out one-step error nonincreasing while n doubles "
            "500 -> 4000 (at most one step up)",
        increases <= 1,
        "medians " + " ".join(f"{m:.2e}" for m in medians),
    )
