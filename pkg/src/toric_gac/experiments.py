"""Experiment drivers: persistence and global-attractor runs over sets of
initial conditions, with per-trajectory records and aggregate verdicts.

Both drivers share the same measurement core: integrate each initial
condition to the horizon, anchor the Horn-Jackson Lyapunov function at the
class Birch point, and record the final distance, the largest consecutive
Lyapunov increase (signed), and the trailing-window persistence minimum.
Per-trajectory numeric failures are recorded in place (no silent skips);
configuration and network-level failures propagate.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .dynamics import integrate, persistence_metrics
from .equilibria import (
    NoComplexBalance,
    birch_point,
    lyapunov_value,
    solve_complex_balanced,
)
from .jsonio import write_report
from .network import ReactionNetwork, parse_network


@dataclass(frozen=True)
class InitialConditions:
    """Either an explicit list of start points or a seeded uniform sampler
    over a per-species box."""

    points: tuple[tuple[float, ...], ...] | None = None
    box: tuple[float, float] = (0.1, 10.0)
    count: int = 10
    seed: int = 0

    @staticmethod
    def explicit(points) -> "InitialConditions":
        pts = tuple(tuple(float(c) for c in p) for p in points)
        if not pts:
            raise ValueError("at least one initial condition is required")
        return InitialConditions(points=pts)

    @staticmethod
    def sampled(count: int = 10, box: tuple[float, float] = (0.1, 10.0),
                seed: int = 0) -> "InitialConditions":
        if count < 1:
            raise ValueError("count must be >= 1")
        lo, hi = float(box[0]), float(box[1])
        if not (0.0 < lo < hi):
            raise ValueError("box must satisfy 0 < lo < hi")
        return InitialConditions(box=(lo, hi), count=count, seed=seed)

    def materialize(self, n_species: int) -> list[np.ndarray]:
        if self.points is not None:
            pts = [np.asarray(p, dtype=float) for p in self.points]
            for p in pts:
                if p.shape != (n_species,):
                    raise ValueError("initial condition has wrong dimension")
                if np.any(p <= 0.0):
                    raise ValueError("initial conditions must be positive")
            return pts
        rng = np.random.default_rng(self.seed)
        lo, hi = self.box
        return [rng.uniform(lo, hi, size=n_species) for _ in range(self.count)]


@dataclass(frozen=True)
class ExperimentConfig:
    network_path: str | None = None
    epsilon: float = 1.0
    horizon: float = 50.0
    initial: InitialConditions = field(default_factory=InitialConditions)
    tol: float = 1e-6
    lyapunov_slack: float = 1e-9
    persistence_floor: float | None = None  # None: half the Birch minimum
    tail_fraction: float = 0.2
    out_dir: str | None = None

    def __post_init__(self):
        if not self.horizon > 0.0:
            raise ValueError("horizon must be positive")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class TrajectoryRecord:
    initial: tuple[float, ...]
    birch: tuple[float, ...] | None = None
    final: tuple[float, ...] | None = None
    final_distance: float | None = None
    max_lyapunov_increase: float | None = None
    persistence_min: float | None = None
    floor: float | None = None
    converged: bool | None = None
    persistent: bool | None = None
    lyapunov_monotone: bool | None = None
    error: str | None = None

    def to_json_dict(self) -> dict:
        return {
            "initial": list(self.initial),
            "birch": None if self.birch is None else list(self.birch),
            "final": None if self.final is None else list(self.final),
            "final_distance": self.final_distance,
            "max_lyapunov_increase": self.max_lyapunov_increase,
            "persistence_min": self.persistence_min,
            "floor": self.floor,
            "converged": self.converged,
            "persistent": self.persistent,
            "lyapunov_monotone": self.lyapunov_monotone,
            "error": self.error,
        }


@dataclass(frozen=True)
class ConvergenceReport:
    kind: str
    horizon: float
    records: tuple[TrajectoryRecord, ...]
    all_converged: bool
    all_persistent: bool
    lyapunov_monotone: bool
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "horizon": self.horizon,
            "trajectories": [r.to_json_dict() for r in self.records],
            "all_converged": self.all_converged,
            "all_persistent": self.all_persistent,
            "lyapunov_monotone": self.lyapunov_monotone,
            "passed": self.passed,
        }


def load_network(cfg: ExperimentConfig,
                 net: ReactionNetwork | None) -> ReactionNetwork:
    if net is not None:
        return net
    if cfg.network_path is None:
        raise ValueError("config needs a network path or an explicit network")
    with open(cfg.network_path, "r", encoding="utf-8") as fh:
        return parse_network(fh.read())


def _measure(net: ReactionNetwork, ic: np.ndarray,
             cfg: ExperimentConfig) -> TrajectoryRecord:
    try:
        birch = birch_point(net, None, ic)
        traj = integrate(net, None, ic, cfg.horizon)
        values = [lyapunov_value(x, birch) for x in traj.states]
        increases = [b - a for a, b in zip(values, values[1:])]
        max_inc = max(increases) if increases else 0.0
        final = traj.states[-1]
        dist = float(np.max(np.abs(final - birch)))
        pmin = float(np.min(persistence_metrics(traj, cfg.tail_fraction)))
        floor = (cfg.persistence_floor if cfg.persistence_floor is not None
                 else 0.5 * float(np.min(birch)))
        return TrajectoryRecord(
            initial=tuple(float(c) for c in ic),
            birch=tuple(float(c) for c in birch),
            final=tuple(float(c) for c in final),
            final_distance=dist,
            max_lyapunov_increase=float(max_inc),
            persistence_min=pmin,
            floor=floor,
            converged=bool(dist <= cfg.tol),
            persistent=bool(pmin >= floor),
            lyapunov_monotone=bool(max_inc <= cfg.lyapunov_slack),
        )
    except (RuntimeError, np.linalg.LinAlgError) as exc:
        return TrajectoryRecord(
            initial=tuple(float(c) for c in ic),
            error=f"{type(exc).__name__}: {exc}",
        )


def _run(cfg: ExperimentConfig, net: ReactionNetwork | None,
         kind: str) -> ConvergenceReport:
    net = load_network(cfg, net)
    # precondition: the network must admit a vertex-balanced equilibrium
    base = solve_complex_balanced(net)
    if not base.found:
        raise NoComplexBalance(
            "experiment requires a vertex-balance-solvable network")
    records = tuple(_measure(net, ic, cfg)
                    for ic in cfg.initial.materialize(net.n))
    clean = [r for r in records if r.error is None]
    no_errors = len(clean) == len(records)
    all_conv = no_errors and all(r.converged for r in clean)
    all_pers = no_errors and all(r.persistent for r in clean)
    monotone = no_errors and all(r.lyapunov_monotone for r in clean)
    passed = monotone and (all_conv if kind == "global_attractor"
                           else all_pers)
    report = ConvergenceReport(kind, cfg.horizon, records,
                               all_conv, all_pers, monotone, passed)
    if cfg.out_dir:
        write_report(os.path.join(cfg.out_dir, f"{kind}.json"),
                     report.to_json_dict())
    return report


def run_persistence_experiment(cfg: ExperimentConfig,
                               net: ReactionNetwork | None = None
                               ) -> ConvergenceReport:
    """Trailing-window minima of every trajectory must reach the floor
    (default: half the smallest Birch coordinate) and the Lyapunov values
    must be nonincreasing within the configured slack."""
    return _run(cfg, net, "persistence")


def run_global_attractor_experiment(cfg: ExperimentConfig,
                                    net: ReactionNetwork | None = None
                                    ) -> ConvergenceReport:
    """Every trajectory must land within cfg.tol (max-norm) of its class
    Birch point by the horizon with nonincreasing Lyapunov values."""
    return _run(cfg, net, "global_attractor")
