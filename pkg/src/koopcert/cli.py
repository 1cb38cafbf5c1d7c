"""Command-line interface.

Subcommands wrap the library stages with file I/O:

    simulate   generate a snapshot dataset from a config
    fit        fit a model on a dataset
    spectrum   eigenvalues of a fitted model (JSON/CSV/SVG)
    certify    evaluate the stability certificate on a spectrum report
    predict    roll out the predictor from an initial state
    run        full pipeline from a config file
    reproduce  full pipeline from a named preset

Exit codes: 0 ok, 2 config error, 3 simulation blow-up, 4 solver failure,
5 certificate inconclusive (only with --strict). KOOPCERT_THREADS caps the
number of linear-algebra worker threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, edmd, spectral
from .config import PRESETS, ConfigError, load_config, preset_config
from .dynamics import BlowupError, SnapshotDataset, generate_snapshots
from .pipeline import StageError, run_pipeline
from .predict import predict_trajectory

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_SOLVER = 4
EXIT_INCONCLUSIVE = 5

_STAGE_EXIT = {"simulate": EXIT_BLOWUP, "fit": EXIT_SOLVER, "spectrum": EXIT_SOLVER}


def _apply_thread_cap() -> None:
    cap = os.environ.get("KOOPCERT_THREADS")
    if not cap:
        return
    try:
        limit = int(cap)
    except ValueError:
        print(f"warning: ignoring non-integer KOOPCERT_THREADS={cap!r}", file=sys.stderr)
        return
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limits=max(1, limit))
    except ImportError:
        print("warning: threadpoolctl not installed; KOOPCERT_THREADS ignored",
              file=sys.stderr)


def _load_config(args):
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    try:
        dataset = generate_snapshots(
            cfg.system, cfg.domain, n_traj=cfg.n_traj, dt=cfg.dt,
            duration=cfg.duration, seed=cfg.seed,
        )
    except BlowupError as exc:
        print(f"[stage:simulate] {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    dataset.save(out)
    print(f"wrote {dataset.meta['n_pairs']} pairs to {out}")
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _load_config(args)
    dataset = SnapshotDataset.load(args.dataset)
    diameter = float(np.linalg.norm(dataset.domain[:, 1] - dataset.domain[:, 0]))
    kernel = cfg.build_kernel(default_scale=diameter)
    try:
        model = edmd.fit(dataset, kernel, beta=cfg.beta, rank=cfg.rank)
    except edmd.SolverError as exc:
        print(f"[stage:fit] {exc}", file=sys.stderr)
        return EXIT_SOLVER
    model.save(args.out)
    print(f"fitted n={model.n} rank={model.effective_rank} beta={model.beta:.3e} "
          f"-> {args.out}")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    model = edmd.EdmdModel.load(args.model)
    try:
        report = spectral.spectrum(model)
    except edmd.SolverError as exc:
        print(f"[stage:spectrum] {exc}", file=sys.stderr)
        return EXIT_SOLVER
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    report.save_json(out)
    report.save_csv(out.with_suffix(".csv"))
    from .figures import plot_spectrum  # matplotlib import deferred to use

    plot_spectrum(report, out.with_suffix(".svg"))
    print(f"spectral radius {report.spectral_radius:.6f} "
          f"({report.effective_rank} nonzero eigenvalues) -> {out}")
    return EXIT_OK


def cmd_certify(args) -> int:
    report = spectral.SpectrumReport.load_json(args.spectrum)
    eps = args.eps
    extras = {}
    if args.heuristic_eps:
        if args.model is None:
            print("certify: --heuristic-eps requires --model", file=sys.stderr)
            return EXIT_CONFIG
        model = edmd.EdmdModel.load(args.model)
        try:
            constants = spectral.bound_constants(
                model.kernel, model.dataset.domain,
                n_mc=args.n_mc, r=model.rank, seed=model.dataset.meta.get("seed", 0),
            )
            eps_mc = spectral.learning_error_eps(constants.M_kappa, model.n, args.delta)
            eps = constants.error_bound(args.norm_a, eps_mc)
        except ValueError as exc:
            print(f"[stage:certify] constants unusable: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        extras = {
            "heuristic": True,
            "note": ("eps estimated from Monte Carlo bound constants; "
                     "this is a plug-in diagnostic, not the certified bound"),
            "constants": constants.to_dict(),
            "eps_sample": eps_mc,
        }
    result = spectral.certify_stability(report, eps=eps, norm_a_bound=args.norm_a,
                                        delta=args.delta)
    payload = {**result.to_dict(), **extras}
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(json.dumps(payload, indent=2, sort_keys=True))
    if args.strict and result.verdict is not spectral.Verdict.CERTIFIED_STABLE:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_predict(args) -> int:
    model = edmd.EdmdModel.load(args.model)
    try:
        x0 = np.array([float(v) for v in args.x0.split(",")])
    except ValueError:
        print(f"predict: cannot parse --x0 {args.x0!r}", file=sys.stderr)
        return EXIT_CONFIG
    traj = predict_trajectory(model, x0, args.steps, recursion=args.recursion)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    traj.save_csv(out)
    tail = traj.states[-1]
    print(f"{traj.steps} steps -> final state [{', '.join(f'{v:.6g}' for v in tail)}]"
          + (" (aborted: non-finite state)" if traj.aborted else ""))
    return EXIT_OK


def _run_and_report(cfg, out_dir, strict: bool) -> int:
    try:
        result = run_pipeline(cfg, out_dir)
    except StageError as exc:
        print(exc, file=sys.stderr)
        return _STAGE_EXIT.get(exc.stage, EXIT_SOLVER)
    cert = result.certificate
    print(f"spectral radius {result.report.spectral_radius:.6f}; "
          f"verdict {cert.verdict.value} (margin {cert.margin:.4f}); "
          f"artifacts in {result.out_dir}")
    if strict and cert.verdict is not spectral.Verdict.CERTIFIED_STABLE:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load_config(args)
    out_dir = args.out or cfg.output
    if out_dir is None:
        print("run: no output directory (--out or config 'output')", file=sys.stderr)
        return EXIT_CONFIG
    return _run_and_report(cfg, out_dir, args.strict)


def cmd_reproduce(args) -> int:
    cfg = preset_config(args.preset, seed=args.seed)
    out_dir = args.out or f"out/{args.preset}"
    return _run_and_report(cfg, out_dir, args.strict)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="koopcert",
        description="Koopman spectra and stability certificates from snapshot data",
    )
    parser.add_argument("--version", action="version", version=f"koopcert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a snapshot dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="dataset CSV path")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a model on a dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--dataset", required=True, help="dataset CSV path")
    p.add_argument("--out", required=True, help="model directory")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("spectrum", help="spectrum of a fitted model")
    p.add_argument("--model", required=True, help="model directory")
    p.add_argument("--out", required=True, help="spectrum JSON path")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("certify", help="stability certificate from a spectrum")
    p.add_argument("--spectrum", required=True, help="spectrum JSON path")
    p.add_argument("--eps", type=float, default=0.0, help="operator error budget")
    p.add_argument("--normA", dest="norm_a", type=float, default=0.0,
                   help="bound on the true operator norm")
    p.add_argument("--delta", type=float, default=0.05, help="failure probability")
    p.add_argument("--heuristic-eps", action="store_true",
                   help="estimate eps from Monte Carlo bound constants (heuristic)")
    p.add_argument("--model", default=None, help="model directory (heuristic mode)")
    p.add_argument("--n-mc", type=int, default=1000)
    p.add_argument("--out", default=None, help="certificate JSON path")
    p.add_argument("--strict", action="store_true",
                   help="exit 5 unless the verdict is CertifiedStable")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("predict", help="roll out the predictor")
    p.add_argument("--model", required=True, help="model directory")
    p.add_argument("--x0", required=True, help="comma-separated initial state")
    p.add_argument("--steps", type=int, default=25)
    p.add_argument("--recursion", choices=("state", "coefficient"), default="state")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("reproduce", help="run a named experiment preset")
    p.add_argument("preset", choices=sorted(PRESETS))
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    _apply_thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
