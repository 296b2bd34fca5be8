"""Command-line interface.

Subcommands: ``analyze``, ``equilibrium``, ``simulate``, ``embed-verify``,
``curve2d``, ``certify-surface``, ``persist``, ``gac``.  All reports are
deterministic JSON (schema 1) on stdout; ``--out DIR`` additionally writes
them to files (plus CSV/SVG where applicable).  Exit codes: 0 pass,
1 assertion failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .dynamics import RateBand, StepSizeUnderflow, integrate
from .embedding import build_embedding, sample_verify_embedding
from .equilibria import NoComplexBalance, SingularSystem, solve_complex_balanced
from .experiments import (
    ExperimentConfig,
    InitialConditions,
    run_global_attractor_experiment,
    run_persistence_experiment,
)
from .jsonio import report_json, trajectory_csv, write_text
from .network import (
    NetworkParseError,
    NotWeaklyReversible,
    deficiency,
    is_reversible,
    is_weakly_reversible,
    linkage_classes,
    parse_network,
    stoichiometric_subspace,
)
from .surfaces import (
    BandsOverlap,
    build_zero_separating_curve_2d,
    curve_to_certificate,
    curve_to_svg,
    verify_zero_separating,
)


def _load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_network(fh.read())


def _emit(args, payload: dict, filename: str) -> str:
    text = report_json(payload)
    sys.stdout.write(text)
    if args.out:
        write_text(os.path.join(args.out, filename), text)
    return text


def _parse_x0(raw: str | None, n: int) -> np.ndarray:
    if raw is None:
        return np.ones(n)
    try:
        vals = [float(v) for v in raw.split(",")]
    except ValueError as exc:
        raise UsageError(f"--x0 must be comma-separated floats: {exc}")
    if len(vals) != n:
        raise UsageError(f"--x0 needs {n} components, got {len(vals)}")
    if any(v <= 0.0 for v in vals):
        raise UsageError("--x0 components must be positive")
    return np.array(vals)


class UsageError(Exception):
    pass


# -- subcommands ----------------------------------------------------------


def cmd_analyze(args) -> int:
    net = _load(args.network)
    _, s = stoichiometric_subspace(net)
    payload = {
        "weakly_reversible": is_weakly_reversible(net),
        "reversible": is_reversible(net),
        "linkage_classes": linkage_classes(net),
        "deficiency": deficiency(net),
        "s": s,
    }
    _emit(args, payload, "analyze.json")
    return 0


def cmd_equilibrium(args) -> int:
    net = _load(args.network)
    report = solve_complex_balanced(net, tol=args.tol)
    _emit(args, report.to_json_dict(), "equilibrium.json")
    return 0 if report.found else 1


def cmd_simulate(args) -> int:
    net = _load(args.network)
    x0 = _parse_x0(args.x0, net.n)
    traj = integrate(net, None, x0, args.horizon)
    if args.format == "json":
        payload = {
            "horizon": args.horizon,
            "times": [float(t) for t in traj.times],
            "states": [[float(v) for v in row] for row in traj.states],
        }
        _emit(args, payload, "trajectory.json")
    else:
        text = trajectory_csv(traj.times, traj.states)
        sys.stdout.write(text)
        if args.out:
            write_text(os.path.join(args.out, "trajectory.csv"), text)
    return 0


def cmd_embed_verify(args) -> int:
    net = _load(args.network)
    band = RateBand(args.epsilon)
    cert = build_embedding(net, band)
    report = sample_verify_embedding(cert, net, band, args.trials,
                                     seed=args.seed, tol=args.tol)
    payload = {"embedding": cert.to_json_dict(),
               "sampling": report.to_json_dict()}
    _emit(args, payload, "embed_verify.json")
    return 0 if report.all_passed else 1


def _curve_for(net, epsilon: float):
    if net.n != 2:
        raise UsageError("curve construction needs exactly 2 species")
    band = RateBand(epsilon)
    cert = build_embedding(net, band)
    curve = build_zero_separating_curve_2d(cert.arrangement, cert.delta0)
    return cert, curve


def cmd_curve2d(args) -> int:
    net = _load(args.network)
    cert, curve = _curve_for(net, args.epsilon)
    payload = {"epsilon": args.epsilon, "delta0": cert.delta0,
               "curve": curve.to_json_dict()}
    _emit(args, payload, "curve2d.json")
    if args.out:
        write_text(os.path.join(args.out, "curve2d.svg"),
                   curve_to_svg(curve, cert.arrangement))
    return 0


def cmd_certify_surface(args) -> int:
    net = _load(args.network)
    cert, curve = _curve_for(net, args.epsilon)
    sampled = curve_to_certificate(curve, samples_per_segment=args.samples)
    outcome = verify_zero_separating(sampled, cert.arrangement, cert.delta0,
                                     tol=args.tol)
    payload = {"epsilon": args.epsilon, "delta0": cert.delta0,
               "samples": len(sampled.samples),
               "verification": outcome.to_json_dict()}
    _emit(args, payload, "certify_surface.json")
    return 0 if outcome.passed else 1


def _experiment_config(args) -> ExperimentConfig:
    return ExperimentConfig(
        network_path=args.network,
        epsilon=args.epsilon,
        horizon=args.horizon,
        initial=InitialConditions.sampled(args.trials, seed=args.seed),
        tol=args.tol,
    )


def _records_csv(report) -> str:
    lines = ["index,final_distance,max_lyapunov_increase,persistence_min,"
             "converged,persistent,lyapunov_monotone,error"]
    for i, r in enumerate(report.records):
        lines.append(",".join([
            str(i),
            "" if r.final_distance is None else f"{r.final_distance:.17g}",
            "" if r.max_lyapunov_increase is None
            else f"{r.max_lyapunov_increase:.17g}",
            "" if r.persistence_min is None else f"{r.persistence_min:.17g}",
            "" if r.converged is None else str(int(r.converged)),
            "" if r.persistent is None else str(int(r.persistent)),
            "" if r.lyapunov_monotone is None
            else str(int(r.lyapunov_monotone)),
            r.error or "",
        ]))
    return "\n".join(lines) + "\n"


def _run_experiment(args, runner, name: str) -> int:
    cfg = _experiment_config(args)
    report = runner(cfg)
    _emit(args, report.to_json_dict(), f"{name}.json")
    if args.format == "csv" and args.out:
        write_text(os.path.join(args.out, f"{name}.csv"),
                   _records_csv(report))
    return 0 if report.passed else 1


def cmd_persist(args) -> int:
    return _run_experiment(args, run_persistence_experiment, "persistence")


def cmd_gac(args) -> int:
    return _run_experiment(args, run_global_attractor_experiment,
                           "global_attractor")


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toric-gac",
        description="Reaction-network analysis, vertex-balanced equilibria, "
                    "toric inclusion certificates, and separating curves.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, epsilon=False, horizon=False, trials=None, seed=False,
               tol=None, samples=False):
        p.add_argument("network", help="network file (.crn)")
        if epsilon:
            p.add_argument("--epsilon", type=float, default=0.5,
                           help="rate band parameter in (0, 1]")
        if horizon:
            p.add_argument("--horizon", type=float, default=50.0)
        if trials is not None:
            p.add_argument("--trials", type=int, default=trials)
        if seed:
            p.add_argument("--seed", type=int, default=0)
        if tol is not None:
            p.add_argument("--tol", type=float, default=tol)
        if samples:
            p.add_argument("--samples", type=int, default=10,
                           help="verification samples per segment")
        p.add_argument("--out", help="directory for report files")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("analyze", help="structural report")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("equilibrium", help="vertex-balanced equilibrium")
    common(p, tol=1e-10)
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("simulate", help="integrate mass-action dynamics")
    common(p, horizon=True)
    p.add_argument("--x0", help="comma-separated initial state")
    p.set_defaults(func=cmd_simulate, format="csv")

    p = sub.add_parser("embed-verify",
                       help="sampled inclusion-cone membership")
    common(p, epsilon=True, trials=1000, seed=True, tol=1e-9)
    p.set_defaults(func=cmd_embed_verify)

    p = sub.add_parser("curve2d", help="build a zero-separating curve")
    common(p, epsilon=True)
    p.set_defaults(func=cmd_curve2d)

    p = sub.add_parser("certify-surface",
                       help="verify the curve certificate")
    common(p, epsilon=True, tol=1e-9, samples=True)
    p.set_defaults(func=cmd_certify_surface)

    p = sub.add_parser("persist", help="persistence experiment")
    common(p, epsilon=True, horizon=True, trials=10, seed=True, tol=1e-6)
    p.set_defaults(func=cmd_persist)

    p = sub.add_parser("gac", help="global-attractor experiment")
    common(p, epsilon=True, horizon=True, trials=10, seed=True, tol=1e-6)
    p.set_defaults(func=cmd_gac)

    return parser


def cli_dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (OSError, NetworkParseError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (NotWeaklyReversible, NoComplexBalance, SingularSystem,
            BandsOverlap, StepSizeUnderflow) as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch())
