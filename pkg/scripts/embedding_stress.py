"""Stress the inclusion certificates: for every corpus network and a grid
of band parameters, run large randomized verification batches and report
per-pair pass rates and timing. Any failure dumps its replayable witness.

Usage:
    python scripts/embedding_stress.py [--trials N] [--epsilons LIST]
                                       [--seed S] [--out FILE]
"""

import argparse
import time
from dataclasses import dataclass

from toric_gac.corpus import EMBEDDING_CORPUS, load
from toric_gac.dynamics import RateBand
from toric_gac.embedding import build_embedding, sample_verify_embedding
from toric_gac.jsonio import write_report


@dataclass(frozen=True)
class StressConfig:
    trials: int = 5000
    epsilons: tuple[float, ...] = (0.9, 0.5, 0.1, 0.02)
    seed: int = 13
    out_path: str | None = None


def stress(cfg: StressConfig) -> int:
    rows = []
    failures = 0
    print(f"{'network':24s} {'eps':>5s} {'delta0':>8s} {'passes':>12s} "
          f"{'sec':>6s}")
    for name in EMBEDDING_CORPUS:
        net = load(name)
        for eps in cfg.epsilons:
            band = RateBand(eps)
            cert = build_embedding(net, band)
            t0 = time.monotonic()
            rep = sample_verify_embedding(cert, net, band, cfg.trials,
                                          seed=cfg.seed)
            dt = time.monotonic() - t0
            print(f"{name:24s} {eps:5.2f} {cert.delta0:8.3f} "
                  f"{rep.passes:6d}/{rep.trials:<5d} {dt:6.2f}")
            rows.append({
                "network": name, "epsilon": eps, "delta0": cert.delta0,
                "passes": rep.passes, "trials": rep.trials,
                "witnesses": [w.to_json_dict() for w in rep.failures[:5]],
            })
            if not rep.all_passed:
                failures += 1
                for w in rep.failures[:2]:
                    print(f"    witness: {w.to_json_dict()}")
    if cfg.out_path is not None:
        write_report(cfg.out_path, {"rows": rows})
        print(f"wrote {cfg.out_path}")
    return failures


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=5000)
    ap.add_argument("--epsilons", default="0.9,0.5,0.1,0.02")
    ap.add_argument("--seed", type=int, default=13)
    ap.add_argument("--out", default=None, help="JSON summary path")
    args = ap.parse_args()
    cfg = StressConfig(
        trials=args.trials,
        epsilons=tuple(float(e) for e in args.epsilons.split(",")),
        seed=args.seed, out_path=args.out)
    return 1 if stress(cfg) else 0


if __name__ == "__main__":
    raise SystemExit(main())
