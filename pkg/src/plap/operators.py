"""Discrete graph and hypergraph p-Laplacians on point clouds.

Neighborhoods are stored in CSR form: ``ptr`` of length ``n + 1`` and a flat
``idx`` array whose slice ``idx[ptr[i]:ptr[i+1]]`` lists the neighbors of node
``i`` in ascending order.  Per-node functions follow the mathematical
definitions directly; the ``*_operator`` functions evaluate the same
quantities for every node at once and are what the solvers use.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateError
from .geometry import NeighborIndex, PointCloud, radius_neighbors_all
from .kernels import Kernel, eta_chi


def _frozen(a, dtype):
    a = np.ascontiguousarray(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    eps: float
    isolated: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "indptr", _frozen(self.indptr, np.int64))
        object.__setattr__(self, "indices", _frozen(self.indices, np.int64))
        object.__setattr__(self, "weights", _frozen(self.weights, float))

    @property
    def n(self) -> int:
        return self.indptr.size - 1

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def edge_weights(self, i: int) -> np.ndarray:
        return self.weights[self.indptr[i]:self.indptr[i + 1]]

    @property
    def degree(self) -> np.ndarray:
        return _segment_sum(self.weights, self.indptr)

    def unit_weights(self) -> "WeightedGraph":
        return WeightedGraph(self.indptr, self.indices, np.ones_like(self.weights), self.eps, self.isolated)

    def rows(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), np.diff(self.indptr))


@dataclass(frozen=True, eq=False)
class HypergraphStencil:
    """Outer (eps) and inner (k * eps) closed-ball neighborhoods, self included."""

    outer_ptr: np.ndarray
    outer_idx: np.ndarray
    inner_ptr: np.ndarray
    inner_idx: np.ndarray
    eps: float
    k: float
    _weights: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for name in ("outer_ptr", "outer_idx", "inner_ptr", "inner_idx"):
            object.__setattr__(self, name, _frozen(getattr(self, name), np.int64))

    @property
    def n(self) -> int:
        return self.outer_ptr.size - 1

    def outer(self, i: int) -> np.ndarray:
        return self.outer_idx[self.outer_ptr[i]:self.outer_ptr[i + 1]]

    def inner(self, i: int) -> np.ndarray:
        return self.inner_idx[self.inner_ptr[i]:self.inner_ptr[i + 1]]

    def weights(self, kernel: Kernel, cloud: PointCloud) -> np.ndarray:
        """Kernel weights aligned with ``outer_idx``; computed once per kernel."""
        hit = self._weights.get(kernel)
        if hit is not None and hit[0] is cloud:
            return hit[1]
        rows = np.repeat(np.arange(self.n), np.diff(self.outer_ptr))
        dist = np.linalg.norm(cloud.points[rows] - cloud.points[self.outer_idx], axis=1)
        w = _frozen(eta_chi(kernel, self.eps, dist, cloud.dim), float)
        self._weights[kernel] = (cloud, w)
        return w


def _segment_sum(values: np.ndarray, ptr: np.ndarray) -> np.ndarray:
    out = np.zeros(ptr.size - 1)
    counts = np.diff(ptr)
    nz = counts > 0
    if values.size:
        sums = np.add.reduceat(values, ptr[:-1][nz])
        out[nz] = sums
    return out


def _segment_reduce(ufunc, values: np.ndarray, ptr: np.ndarray, empty: float) -> np.ndarray:
    out = np.full(ptr.size - 1, empty)
    counts = np.diff(ptr)
    nz = counts > 0
    if values.size:
        out[nz] = ufunc.reduceat(values, ptr[:-1][nz])
    return out


def signed_power(t, p: float):
    """|t|^(p-2) t, continuously extended by 0 at t = 0."""
    t = np.asarray(t, dtype=float)
    return np.sign(t) * np.abs(t) ** (p - 1)


# -- construction ------------------------------------------------------------

def build_graph(cloud: PointCloud, index: NeighborIndex, eps: float, kernel: Kernel) -> WeightedGraph:
    if not eps > 0:
        raise ValueError("eps must be positive")
    ptr, idx = radius_neighbors_all(index, cloud, eps)
    rows = np.repeat(np.arange(cloud.n), np.diff(ptr))
    dist = np.linalg.norm(cloud.points[rows] - cloud.points[idx], axis=1)
    w = eta_chi(kernel, eps, dist, cloud.dim)
    keep = (rows != idx) & (w > 0)
    counts = np.bincount(rows[keep], minlength=cloud.n)
    new_ptr = np.concatenate([[0], np.cumsum(counts)])
    isolated = tuple(int(i) for i in np.nonzero(counts == 0)[0])
    if isolated:
        warnings.warn(f"isolated node(s) in eps-graph: {isolated[:10]}", RuntimeWarning, stacklevel=2)
    return WeightedGraph(new_ptr, idx[keep], w[keep], float(eps), isolated)


def build_stencil(cloud: PointCloud, index: NeighborIndex, eps: float, k: float) -> HypergraphStencil:
    if not eps > 0:
        raise ValueError("eps must be positive")
    if k < 0:
        raise ValueError("k must be nonnegative")
    outer_ptr, outer_idx = radius_neighbors_all(index, cloud, eps)
    if k == 0:
        inner_ptr, inner_idx = np.arange(cloud.n + 1), np.arange(cloud.n)
    else:
        inner_ptr, inner_idx = radius_neighbors_all(index, cloud, k * eps)
    return HypergraphStencil(outer_ptr, outer_idx, inner_ptr, inner_idx, float(eps), float(k))


# -- per-node residuals --------------------------------------------------------

def graph_p_residual(g: WeightedGraph, u, i: int, p: float) -> float:
    u = np.asarray(u, dtype=float)
    diff = u[g.neighbors(i)] - u[i]
    return float(np.sum(g.edge_weights(i) * signed_power(diff, p)))


def graph_inf_residual(g: WeightedGraph, u, i: int) -> float:
    nb = g.neighbors(i)
    if nb.size == 0:
        raise DegenerateError("no neighbors")
    u = np.asarray(u, dtype=float)
    t = g.edge_weights(i) * (u[nb] - u[i])
    return float(t.max() + t.min())


def game_residual(g: WeightedGraph, u, i: int, p: float, lam: float = 1.0) -> float:
    deg = float(np.sum(g.edge_weights(i)))
    if deg <= 0:
        raise DegenerateError("no neighbors")
    return graph_p_residual(g, u, i, 2.0) / deg + lam * (p - 2) * graph_inf_residual(g, u, i)


def hyper_residual(st: HypergraphStencil, u, i: int, kernel: Kernel, cloud: PointCloud) -> float:
    u = np.asarray(u, dtype=float)
    out = st.outer(i)
    w = eta_chi(kernel, st.eps, np.linalg.norm(cloud.points[out] - cloud.points[i], axis=1), cloud.dim)
    total = 0.0
    for wj, j in zip(w, out):
        vals = u[st.inner(j)]
        total += wj * (vals.max() + vals.min() - 2 * u[i])
    return total / (2 * st.n * st.eps ** 2)


# -- whole-field forms -------------------------------------------------------

def local_max(st: HypergraphStencil, u: np.ndarray) -> np.ndarray:
    return np.maximum.reduceat(np.asarray(u, dtype=float)[st.inner_idx], st.inner_ptr[:-1])


def local_min(st: HypergraphStencil, u: np.ndarray) -> np.ndarray:
    return np.minimum.reduceat(np.asarray(u, dtype=float)[st.inner_idx], st.inner_ptr[:-1])


def hyper_operator(st: HypergraphStencil, u, weights: np.ndarray) -> np.ndarray:
    """Hypergraph residual at every node; ``weights`` from :meth:`HypergraphStencil.weights`."""
    u = np.asarray(u, dtype=float)
    s = local_max(st, u) + local_min(st, u)
    acc = np.add.reduceat(weights * s[st.outer_idx], st.outer_ptr[:-1])
    mass = np.add.reduceat(weights, st.outer_ptr[:-1])
    return (acc - 2 * u * mass) / (2 * st.n * st.eps ** 2)


def graph_p_operator(g: WeightedGraph, u, p: float) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    diff = u[g.indices] - u[g.rows()]
    return _segment_sum(g.weights * signed_power(diff, p), g.indptr)


def graph_inf_operator(g: WeightedGraph, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    t = g.weights * (u[g.indices] - u[g.rows()])
    hi = _segment_reduce(np.maximum, t, g.indptr, np.nan)
    lo = _segment_reduce(np.minimum, t, g.indptr, np.nan)
    return hi + lo


def game_operator(g: WeightedGraph, u, p: float, lam: float = 1.0) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        return graph_p_operator(g, u, 2.0) / g.degree + lam * (p - 2) * graph_inf_operator(g, u)


# -- energies ----------------------------------------------------------------

def energy_graph_p(g: WeightedGraph, u, p: float) -> float:
    """Sum over ordered pairs (i, j) with an edge of w_ij |u_i - u_j|^p."""
    u = np.asarray(u, dtype=float)
    return float(np.sum(g.weights * np.abs(u[g.rows()] - u[g.indices]) ** p))


def energy_hyper(st: HypergraphStencil, u, p: float) -> float:
    """Sum over the eps-ball hyperedges of (max - min)^p."""
    u = np.asarray(u, dtype=float)
    vals = u[st.outer_idx]
    spread = np.maximum.reduceat(vals, st.outer_ptr[:-1]) - np.minimum.reduceat(vals, st.outer_ptr[:-1])
    return float(np.sum(spread ** p))
