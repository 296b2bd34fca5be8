"""Build, verify, and render the zero-separating curve of every 2-species
corpus network across a grid of rate-band parameters. Writes one SVG per
(network, epsilon) pair plus a gallery summary, and exercises the
trajectory crossing test on each curve.

Usage:
    python scripts/curve_gallery.py [--out DIR] [--epsilons 0.9,0.5,0.1]
                                    [--schedules N] [--horizon H]
"""

import argparse
import os
from dataclasses import dataclass

from toric_gac.corpus import EMBEDDING_CORPUS, load
from toric_gac.dynamics import IntegratorOptions, RateBand
from toric_gac.embedding import build_embedding
from toric_gac.jsonio import write_report, write_text
from toric_gac.surfaces import (
    build_zero_separating_curve_2d,
    curve_to_certificate,
    curve_to_svg,
    trajectory_crossing_test,
    verify_zero_separating,
)


@dataclass(frozen=True)
class GalleryConfig:
    out_dir: str = "curve_gallery"
    epsilons: tuple[float, ...] = (0.9, 0.5, 0.1)
    schedules: int = 50
    horizon: float = 50.0
    seed: int = 7
    samples_per_segment: int = 10


def build_gallery(cfg: GalleryConfig) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    opts = IntegratorOptions(rtol=1e-6, atol=1e-9)
    rows = []
    failures = 0
    names = [n for n in EMBEDDING_CORPUS if load(n).n == 2]
    print(f"{'network':24s} {'eps':>5s} {'segments':>8s} {'verified':>8s} "
          f"{'min dist':>9s}")
    for name in names:
        net = load(name)
        for eps in cfg.epsilons:
            band = RateBand(eps)
            emb = build_embedding(net, band)
            curve = build_zero_separating_curve_2d(emb.arrangement, emb.delta0)
            cert = curve_to_certificate(curve, cfg.samples_per_segment)
            outcome = verify_zero_separating(cert, emb.arrangement, emb.delta0)
            crossing = trajectory_crossing_test(
                curve, net, band, n_schedules=cfg.schedules,
                horizon=cfg.horizon, seed=cfg.seed, opts=opts)
            ok = outcome.passed and not crossing.crossed
            if not ok:
                failures += 1
            svg_path = os.path.join(cfg.out_dir, f"{name}_eps{eps}.svg")
            write_text(svg_path, curve_to_svg(curve, emb.arrangement))
            rows.append({
                "network": name, "epsilon": eps, "delta0": emb.delta0,
                "segments": len(curve.segments), "verified": outcome.passed,
                "crossed": crossing.crossed,
                "min_signed_distance": crossing.min_signed_distance,
                "svg": os.path.basename(svg_path),
            })
            print(f"{name:24s} {eps:5.2f} {len(curve.segments):8d} "
                  f"{'yes' if outcome.passed else 'NO':>8s} "
                  f"{crossing.min_signed_distance:9.4f}")
    write_report(os.path.join(cfg.out_dir, "gallery.json"), {"rows": rows})
    print(f"wrote {len(rows)} curves to {cfg.out_dir}/")
    return failures


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="curve_gallery")
    ap.add_argument("--epsilons", default="0.9,0.5,0.1")
    ap.add_argument("--schedules", type=int, default=50)
    ap.add_argument("--horizon", type=float, default=50.0)
    args = ap.parse_args()
    cfg = GalleryConfig(
        out_dir=args.out,
        epsilons=tuple(float(e) for e in args.epsilons.split(",")),
        schedules=args.schedules, horizon=args.horizon)
    return 1 if build_gallery(cfg) else 0


if __name__ == "__main__":
    raise SystemExit(main())
