"""Vertex-balanced and detailed-balanced equilibria, tree constants,
Lyapunov evaluation, and Birch points.

A positive state x0 is vertex balanced when at every vertex the incoming
mass-action flows sum to the outgoing ones.  The positive kernel of each
linkage class's flow Laplacian is spanned by the rooted in-tree weights
(matrix-tree theorem); solving y_v . log x0 = log K_v + alpha_class in
least squares and back-substituting decides existence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .dynamics import DimensionMismatch, mass_action_field
from .network import (
    NotWeaklyReversible,
    ReactionNetwork,
    is_reversible,
    is_weakly_reversible,
    linkage_classes,
    stoichiometric_subspace,
)

_ENUMERATION_LIMIT = 8  # per-class vertex count where exhaustion stays cheap


class NotReversible(ValueError):
    pass


class SingularSystem(RuntimeError):
    pass


class NoComplexBalance(RuntimeError):
    pass


class NewtonDivergence(RuntimeError):
    pass


@dataclass(frozen=True)
class TreeConstants:
    """Per-vertex rooted in-tree weights K, grouped by linkage class.

    K[v] = sum over spanning in-trees rooted at v of the product of edge
    rates; positive on every weakly reversible network.
    """

    K: tuple[float, ...]
    classes: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class EquilibriumReport:
    """Outcome of a balance solve: x0 (or None), the per-vertex balance
    residual at x0 with rates normalized to max 1, and how x0 was found."""

    x0: tuple[float, ...] | None
    residual: tuple[float, ...]
    method: str  # "provided" | "tree_solve"

    @property
    def found(self) -> bool:
        return self.x0 is not None

    def to_json_dict(self) -> dict:
        return {
            "x0": None if self.x0 is None else list(self.x0),
            "residual": list(self.residual),
            "method": self.method,
        }


def _rates_array(net: ReactionNetwork, rates) -> np.ndarray:
    if rates is None:
        return np.array([r.rate for r in net.reactions], dtype=float)
    rates = np.asarray(rates, dtype=float)
    if rates.shape != (len(net.reactions),):
        raise DimensionMismatch(
            f"expected {len(net.reactions)} rates, got shape {rates.shape}")
    if np.any(rates <= 0.0):
        raise ValueError("rates must be strictly positive")
    return rates


def vertex_balance_residual(net: ReactionNetwork, rates, x0) -> np.ndarray:
    """Per-vertex inflow minus outflow of mass-action flux at x0."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (net.n,):
        raise DimensionMismatch(f"state has shape {x0.shape}, species {net.n}")
    if np.any(x0 <= 0.0):
        raise ValueError("state must be strictly positive")
    k = _rates_array(net, rates)
    ymat = net.complex_matrix()
    mono = np.array([float(np.prod(x0 ** ymat[i])) for i in range(net.m)])
    out = np.zeros(net.m)
    for r, ke in zip(net.reactions, k):
        flow = ke * mono[r.source]
        out[r.target] += flow
        out[r.source] -= flow
    return out


def is_detailed_balanced(net: ReactionNetwork, rates, x0,
                         tol: float = 1e-9) -> bool:
    """Every forward/backward edge pair carries equal flux at x0.
    Only defined on reversible networks."""
    if not is_reversible(net):
        raise NotReversible("detailed balance requires a reversible network")
    x0 = np.asarray(x0, dtype=float)
    k = _rates_array(net, rates)
    ymat = net.complex_matrix()
    flux = {}
    for r, ke in zip(net.reactions, k):
        flux[(r.source, r.target)] = ke * float(np.prod(x0 ** ymat[r.source]))
    for (u, v), fwd in flux.items():
        back = flux[(v, u)]
        if abs(fwd - back) > tol * max(1.0, abs(fwd), abs(back)):
            return False
    return True


# ---------------------------------------------------------------------------
# tree constants

def _class_edges(net: ReactionNetwork, members: tuple[int, ...], k: np.ndarray):
    mset = set(members)
    return [(r.source, r.target, float(ke))
            for r, ke in zip(net.reactions, k) if r.source in mset]


def _intree_weights_enumerate(members, edges) -> dict[int, float]:
    """Exhaustive in-tree sum: pick one outgoing edge per non-root vertex
    and keep the choices whose parent map reaches the root acyclically."""
    out_edges: dict[int, list[tuple[int, float]]] = {v: [] for v in members}
    for u, v, w in edges:
        out_edges[u].append((v, w))
    K = {}
    for root in members:
        others = [v for v in members if v != root]
        total = 0.0
        for choice in product(*(out_edges[v] for v in others)):
            parent = {v: c[0] for v, c in zip(others, choice)}
            ok = True
            for v in others:
                seen = set()
                cur = v
                while cur != root:
                    if cur in seen:
                        ok = False
                        break
                    seen.add(cur)
                    cur = parent[cur]
                if not ok:
                    break
            if ok:
                w = 1.0
                for _, ew in choice:
                    w *= ew
                total += w
        K[root] = total
    return K


def _intree_weights_determinant(members, edges) -> dict[int, float]:
    """Matrix-tree route: K[v] = det of the out-degree Laplacian with v's
    row and column removed."""
    idx = {v: i for i, v in enumerate(members)}
    c = len(members)
    lap = np.zeros((c, c))
    for u, v, w in edges:
        lap[idx[u], idx[v]] -= w
        lap[idx[u], idx[u]] += w
    K = {}
    for v in members:
        i = idx[v]
        keep = [j for j in range(c) if j != i]
        K[v] = float(np.linalg.det(lap[np.ix_(keep, keep)])) if keep else 1.0
    return K


def _flow_laplacian(members, edges) -> np.ndarray:
    """M with (M c)_v = sum_{u->v} k c_u - c_v sum_{v->u} k; kernel holds
    the balanced monomial vectors."""
    idx = {v: i for i, v in enumerate(members)}
    c = len(members)
    M = np.zeros((c, c))
    for u, v, w in edges:
        M[idx[v], idx[u]] += w
        M[idx[u], idx[u]] -= w
    return M


def tree_constants(net: ReactionNetwork, rates=None) -> TreeConstants:
    """Rooted in-tree weights per vertex.  Exhaustive enumeration for
    classes of at most 8 vertices, determinant minors above."""
    if not is_weakly_reversible(net):
        raise NotWeaklyReversible("tree constants need a weakly reversible network")
    k = _rates_array(net, rates)
    classes = linkage_classes(net)
    K = [0.0] * net.m
    for members in classes:
        edges = _class_edges(net, members, k)
        if len(members) <= _ENUMERATION_LIMIT:
            weights = _intree_weights_enumerate(members, edges)
        else:
            weights = _intree_weights_determinant(members, edges)
        vec = np.array([weights[v] for v in members])
        if not np.all(np.isfinite(vec)) or np.any(vec <= 0.0):
            raise SingularSystem(
                f"tree constants not finite positive in class {members}")
        M = _flow_laplacian(members, edges)
        scale = max(float(np.max(np.abs(M))), 1e-300) * float(np.max(vec))
        resid = float(np.max(np.abs(M @ vec))) / scale
        if not (resid <= 1e-10):
            raise SingularSystem(
                f"tree constants fail the kernel check: residual {resid}")
        for v, w in weights.items():
            K[v] = w
    return TreeConstants(tuple(K), classes)


# ---------------------------------------------------------------------------
# balance solving

def solve_complex_balanced(net: ReactionNetwork, rates=None,
                           tol: float = 1e-10) -> EquilibriumReport:
    """Find x0 > 0 with zero vertex balance if one exists.

    Solves y_v . X = log K_v + alpha_class (minimum-norm least squares in
    X = log x0 and the free per-class offsets), then accepts or rejects by
    the balance residual at exp(X) with rates normalized to max 1.
    """
    if not is_weakly_reversible(net):
        raise NotWeaklyReversible("balance solve needs a weakly reversible network")
    k = _rates_array(net, rates)
    tc = tree_constants(net, k)
    logK = np.log(np.array(tc.K))
    if not np.all(np.isfinite(logK)):
        raise SingularSystem("tree constants overflow or underflow the log scale")
    ymat = net.complex_matrix()
    n_classes = len(tc.classes)
    class_of = {}
    for ci, members in enumerate(tc.classes):
        for v in members:
            class_of[v] = ci
    A = np.zeros((net.m, net.n + n_classes))
    for v in range(net.m):
        A[v, :net.n] = ymat[v]
        A[v, net.n + class_of[v]] = 1.0
    try:
        sol, *_ = np.linalg.lstsq(A, logK, rcond=None)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    X = sol[:net.n]
    if not np.all(np.isfinite(X)):
        raise SingularSystem("log solve produced non-finite state")
    x0 = np.exp(X)
    k_norm = k / float(np.max(k))
    resid = vertex_balance_residual(net, k_norm, x0)
    if float(np.max(np.abs(resid))) <= tol:
        return EquilibriumReport(tuple(x0), tuple(resid), "tree_solve")
    return EquilibriumReport(None, tuple(resid), "tree_solve")


def report_for(net: ReactionNetwork, rates, x0) -> EquilibriumReport:
    """Report for a user-supplied equilibrium candidate."""
    k = _rates_array(net, rates)
    k_norm = k / float(np.max(k))
    resid = vertex_balance_residual(net, k_norm, np.asarray(x0, dtype=float))
    return EquilibriumReport(tuple(float(v) for v in np.asarray(x0, dtype=float)),
                             tuple(resid), "provided")


# ---------------------------------------------------------------------------
# Lyapunov function and Birch points

def lyapunov_value(x, x0) -> float:
    """V(x; x0) = sum_i x_i (ln x_i - ln x0_i - 1) + x0_i; zero exactly at
    x = x0, strictly convex on the open orthant."""
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if x.shape != x0.shape:
        raise DimensionMismatch(f"shapes {x.shape} and {x0.shape} differ")
    if np.any(x <= 0.0) or np.any(x0 <= 0.0):
        raise ValueError("states must be strictly positive")
    return float(np.sum(x * (np.log(x) - np.log(x0) - 1.0) + x0))


def lyapunov_gradient(x, x0) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if x.shape != x0.shape:
        raise DimensionMismatch(f"shapes {x.shape} and {x0.shape} differ")
    return np.log(x) - np.log(x0)


def lyapunov_derivative(net: ReactionNetwork, rates, x, x0) -> float:
    """Directional derivative of V along the mass-action field at x."""
    grad = lyapunov_gradient(x, x0)
    f = mass_action_field(net, rates, np.asarray(x, dtype=float))
    return float(np.dot(grad, f))


def birch_point(net: ReactionNetwork, rates, x_ref,
                tol: float = 1e-10, max_iter: int = 80) -> np.ndarray:
    """Minimizer of V(.; x0) over (x_ref + S0) intersected with the open
    orthant, via damped Newton on the reduced strictly convex problem.

    The returned point is the unique vertex-balanced equilibrium in the
    compatibility class of x_ref.
    """
    report = solve_complex_balanced(net, rates)
    if not report.found:
        raise NoComplexBalance("no vertex-balanced equilibrium exists")
    x0 = np.array(report.x0)
    x_ref = np.asarray(x_ref, dtype=float)
    if x_ref.shape != (net.n,):
        raise DimensionMismatch(f"x_ref has shape {x_ref.shape}, species {net.n}")
    if np.any(x_ref <= 0.0):
        raise ValueError("x_ref must be strictly positive")
    basis, s = stoichiometric_subspace(net)
    if s == 0:
        return x_ref.copy()

    lnx0 = np.log(x0)

    def value(u):
        x = x_ref + basis @ u
        return float(np.sum(x * (np.log(x) - lnx0 - 1.0) + x0))

    u = np.zeros(s)
    x = x_ref.copy()
    for _ in range(max_iter):
        grad = basis.T @ (np.log(x) - lnx0)
        if float(np.linalg.norm(grad)) <= tol:
            return x
        hess = basis.T @ (basis / x[:, None])
        try:
            step = np.linalg.solve(hess, -grad)
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergence(f"singular reduced Hessian: {exc}") from exc
        base = value(u)
        alpha = 1.0
        for _ in range(60):
            cand = u + alpha * step
            xc = x_ref + basis @ cand
            if np.all(xc > 0.0) and value(cand) <= base + 1e-12:
                u, x = cand, xc
                break
            alpha *= 0.5
        else:
            raise NewtonDivergence(
                f"line search stalled; gradient norm {np.linalg.norm(grad)}")
    raise NewtonDivergence(
        f"no convergence in {max_iter} iterations; "
        f"gradient norm {np.linalg.norm(basis.T @ (np.log(x) - lnx0))}")
