"""Monotone fixed-point solvers for the constrained graph and hypergraph equations.

Labeled nodes are hard constraints and never move.  Every sweep updates each
free node to the value that zeroes its own residual with the neighbors held
fixed (for the hypergraph operator: the kernel-weighted average of the
neighbors' local max + min, halved).  Iteration stops when the sup norm of a
sweep's change drops to ``tol``.
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import _sweeps
from .errors import DisconnectedError
from .geometry import LabelSet, PointCloud
from .kernels import Kernel
from .operators import (
    HypergraphStencil,
    WeightedGraph,
    game_operator,
    graph_inf_operator,
    graph_p_operator,
    hyper_operator,
    local_max,
    local_min,
)

SWEEPS = ("jacobi", "gauss_seidel")


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-8
    max_iter: int = 200_000
    sweep: str = "gauss_seidel"
    damping: float = 1.0
    init: object = "label_mean"  # "label_mean" | "zeros" | array of length n

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.sweep not in SWEEPS:
            raise ValueError(f"sweep must be one of {SWEEPS}")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass
class SolveReport:
    iterations: int
    final_update: float
    converged: bool
    wall_seconds: float
    final_residual: float = float("nan")
    scheme: str = ""


def _bfs_connected(ptr: np.ndarray, idx: np.ndarray) -> bool:
    n = ptr.size - 1
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        i = queue.popleft()
        for j in idx[ptr[i]:ptr[i + 1]]:
            if not seen[j]:
                seen[j] = True
                count += 1
                queue.append(j)
    return count == n


def check_connected(st: HypergraphStencil) -> bool:
    """True iff the eps-ball hypergraph has a single component."""
    return _bfs_connected(st.outer_ptr, st.outer_idx)


def graph_connected(g: WeightedGraph) -> bool:
    return _bfs_connected(g.indptr, g.indices)


def _initial(n: int, labels: LabelSet, cfg: SolverConfig) -> np.ndarray:
    if isinstance(cfg.init, str):
        if cfg.init == "label_mean":
            u = np.full(n, float(np.mean(labels.values)))
        elif cfg.init == "zeros":
            u = np.zeros(n)
        else:
            raise ValueError(f"unknown init {cfg.init!r}")
    else:
        u = np.array(cfg.init, dtype=float)
        if u.shape != (n,):
            raise ValueError("initial field has the wrong length")
    u[labels.indices] = labels.values
    return u


def _iterate(sweep, u, cfg: SolverConfig, scheme: str, free: np.ndarray, operator):
    start = time.perf_counter()
    change = np.inf
    it = 0
    while it < cfg.max_iter:
        change = sweep(u)
        it += 1
        if change <= cfg.tol:
            break
    res = operator(u)[free]
    report = SolveReport(
        iterations=it,
        final_update=float(change),
        converged=bool(change <= cfg.tol),
        wall_seconds=time.perf_counter() - start,
        final_residual=float(np.max(np.abs(res))) if res.size else 0.0,
        scheme=scheme,
    )
    return u, report


def solve_hypergraph(st: HypergraphStencil, labels: LabelSet, kernel: Kernel, cloud: PointCloud,
                     cfg: SolverConfig | None = None):
    """Solve the constrained hypergraph p-Laplacian equation; returns ``(u, report)``."""
    cfg = cfg or SolverConfig()
    n = st.n
    labels.validate(n)
    if not check_connected(st):
        raise DisconnectedError("hypergraph not connected")
    w = np.ascontiguousarray(st.weights(kernel, cloud))
    u = _initial(n, labels, cfg)
    free = ~labels.mask(n)
    args = (st.outer_ptr, st.outer_idx, w, st.inner_ptr, st.inner_idx)
    if cfg.sweep == "jacobi":
        def sweep(v):
            return _sweeps.hyper_jacobi(*args, v, free, cfg.damping)
    else:
        hi = np.empty(n)
        lo = np.empty(n)
        _sweeps.local_extrema(st.inner_ptr, st.inner_idx, u, hi, lo)

        def sweep(v):
            return _sweeps.hyper_gauss_seidel(*args, v, free, cfg.damping, hi, lo)

    return _iterate(sweep, u, cfg, "hyper", free, lambda v: hyper_operator(st, v, w))


def hyper_update_map(st: HypergraphStencil, kernel: Kernel, cloud: PointCloud, u, labels: LabelSet) -> np.ndarray:
    """One undamped Jacobi step T(u); labeled entries are reset to their labels."""
    w = st.weights(kernel, cloud)
    u = np.asarray(u, dtype=float)
    s = local_max(st, u) + local_min(st, u)
    acc = np.add.reduceat(w * s[st.outer_idx], st.outer_ptr[:-1])
    mass = np.add.reduceat(w, st.outer_ptr[:-1])
    out = acc / (2 * mass)
    out[labels.indices] = labels.values
    return out


def _solve_graph(g: WeightedGraph, labels: LabelSet, cfg: SolverConfig, scheme: int, p: float,
                 lam: float, name: str, operator):
    n = g.n
    labels.validate(n)
    if g.isolated or not graph_connected(g):
        raise DisconnectedError("graph not connected")
    u = _initial(n, labels, cfg)
    free = ~labels.mask(n)
    gs = cfg.sweep == "gauss_seidel"
    root_tol = cfg.tol / 10

    def sweep(v):
        return _sweeps.graph_sweep(scheme, g.indptr, g.indices, g.weights, v, free,
                                   float(p), float(lam), cfg.damping, root_tol, gs)

    return _iterate(sweep, u, cfg, name, free, operator)


def solve_graph_p(g: WeightedGraph, labels: LabelSet, p: float, cfg: SolverConfig | None = None):
    if p < 2:
        raise ValueError("solve_graph_p needs p >= 2")
    return _solve_graph(g, labels, cfg or SolverConfig(), _sweeps.SCHEME_P, p, 0.0,
                        f"graph{p:g}", lambda v: graph_p_operator(g, v, p))


def solve_graph_inf(g: WeightedGraph, labels: LabelSet, cfg: SolverConfig | None = None):
    return _solve_graph(g, labels, cfg or SolverConfig(), _sweeps.SCHEME_INF, 0.0, 0.0,
                        "graphinf", lambda v: graph_inf_operator(g, v))


def solve_game(g: WeightedGraph, labels: LabelSet, p: float, lam: float = 1.0,
               cfg: SolverConfig | None = None):
    if p < 2:
        raise ValueError("solve_game needs p >= 2")
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return _solve_graph(g, labels, cfg or SolverConfig(), _sweeps.SCHEME_GAME, p, lam,
                        "game", lambda v: game_operator(g, v, p, lam))


def verify_comparison(st: HypergraphStencil, kernel: Kernel, cloud: PointCloud, u, v,
                      labels_u: LabelSet, labels_v: LabelSet, tol: float = 1e-8) -> bool:
    """Check that ordered labels produced ordered solutions (up to ``10 * tol``).

    Returns True when the labels are not ordered, since the implication then
    holds vacuously.
    """
    ou = np.argsort(labels_u.indices)
    ov = np.argsort(labels_v.indices)
    if not np.array_equal(labels_u.indices[ou], labels_v.indices[ov]):
        raise ValueError("label sets must share their node indices")
    if not np.all(labels_u.values[ou] <= labels_v.values[ov]):
        return True
    return bool(np.all(np.asarray(u) <= np.asarray(v) + 10 * tol))
