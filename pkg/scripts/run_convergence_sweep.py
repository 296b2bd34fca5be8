"""Sweep the bundled network corpus: solve for a balanced state, run the
persistence and global-attractor drivers on every solvable network, and
print one summary row each.

Usage:
    python scripts/run_convergence_sweep.py [--out DIR] [--horizon H]
                                            [--trials N] [--seed S]
"""

import argparse
import os
from dataclasses import dataclass

from toric_gac.corpus import EMBEDDING_CORPUS, load
from toric_gac.equilibria import solve_complex_balanced
from toric_gac.experiments import (
    ExperimentConfig,
    InitialConditions,
    run_global_attractor_experiment,
    run_persistence_experiment,
)


@dataclass(frozen=True)
class SweepConfig:
    horizon: float = 50.0
    trials: int = 20
    seed: int = 21
    box: tuple[float, float] = (0.1, 10.0)
    tol: float = 1e-6
    out_dir: str | None = None


def sweep(cfg: SweepConfig) -> int:
    print(f"{'network':24s} {'n':>2s} {'m':>2s} {'balanced':>8s} "
          f"{'persist':>8s} {'min/birch':>9s} {'converge':>8s} {'worst':>9s}")
    failures = 0
    for name in EMBEDDING_CORPUS:
        net = load(name)
        eq = solve_complex_balanced(net)
        if not eq.found:
            print(f"{name:24s} {net.n:2d} {net.m:2d} {'no':>8s}")
            continue
        out = None
        if cfg.out_dir is not None:
            out = os.path.join(cfg.out_dir, name)
        base = ExperimentConfig(
            horizon=cfg.horizon, tol=cfg.tol,
            initial=InitialConditions.sampled(cfg.trials, cfg.box, cfg.seed),
            out_dir=out)
        pers = run_persistence_experiment(base, net)
        gac = run_global_attractor_experiment(base, net)
        ratio = min(r.persistence_min / min(r.birch) for r in pers.records)
        worst = max(r.final_distance for r in gac.records)
        print(f"{name:24s} {net.n:2d} {net.m:2d} {'yes':>8s} "
              f"{'PASS' if pers.passed else 'FAIL':>8s} {ratio:9.3f} "
              f"{'PASS' if gac.passed else 'FAIL':>8s} {worst:9.2e}")
        if not (pers.passed and gac.passed):
            failures += 1
    return failures


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=None, help="directory for JSON reports")
    ap.add_argument("--horizon", type=float, default=50.0)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=21)
    args = ap.parse_args()
    cfg = SweepConfig(horizon=args.horizon, trials=args.trials,
                      seed=args.seed, out_dir=args.out)
    return 1 if sweep(cfg) else 0


if __name__ == "__main__":
    raise SystemExit(main())
