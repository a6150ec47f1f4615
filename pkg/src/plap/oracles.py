"""Continuum references and diagnostics for the hypergraph scheme.

* :func:`lp_exact` evaluates the weighted, normalized p-Laplacian
  ``sigma1 * (rho * lap(phi) + 2 grad(rho).grad(phi) + (p - 2) rho * Hphi[g, g] / |g|^2)``
  of a smooth test function.
* :func:`consistency_error` compares it with the discrete operator at interior
  nodes of any cloud; :func:`grid_consistency_error` does the same on regular
  2-D grids with an exact disk max/min filter, so very fine grids stay cheap.
* :func:`continuum_1d` is the closed-form 1-D solution of the limit problem
  (Dirichlet data at the labels, zero Neumann flux at the ends).
* :func:`holder_ratio` and :func:`spike_index` quantify regularity and the
  collapse of graph-Laplacian solutions onto a constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .errors import DegenerateError
from .geometry import DensityModel, Domain, LabelSet, PointCloud
from .kernels import Kernel, KernelMoments, k_of_p
from .operators import HypergraphStencil, hyper_operator


@dataclass(frozen=True)
class AnalyticFunction:
    """A smooth test function with exact first and second derivatives.

    ``value`` is vectorized over rows of an ``(m, d)`` array; ``gradient`` and
    ``hessian`` take a single point.
    """

    value: Callable[[np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"

    @classmethod
    def quadratic(cls, A, b, c: float = 0.0, name: str = "quadratic") -> "AnalyticFunction":
        """``c + b.x + x.A.x / 2`` with symmetric ``A``."""
        A = np.asarray(A, dtype=float)
        A = 0.5 * (A + A.T)
        b = np.asarray(b, dtype=float)

        def value(x):
            x = np.atleast_2d(x)
            return c + x @ b + 0.5 * np.einsum("ij,jk,ik->i", x, A, x)

        return cls(value, lambda x: b + A @ np.asarray(x, dtype=float), lambda x: A.copy(), name)

    @classmethod
    def linear(cls, b, c: float = 0.0) -> "AnalyticFunction":
        b = np.asarray(b, dtype=float)
        return cls.quadratic(np.zeros((b.size, b.size)), b, c, name="linear")

    @classmethod
    def family(cls, name: str, d: int) -> "AnalyticFunction":
        """Built-in test functions with nonvanishing gradient near the origin."""
        b = np.zeros(d)
        b[0] = 1.0
        if name == "linear":
            b[1:] = 0.5
            return cls.linear(b)
        if name == "quadratic":
            A = np.eye(d) * 0.5
            A[0, 0] = 0.0
            A[1:, 1:] = np.eye(d - 1)
            if d > 1:
                A[0, 1] = A[1, 0] = 0.25
            return cls.quadratic(A, b, name="quadratic")
        raise ValueError(f"unknown test function {name!r}")


def derivative_mismatch(phi: AnalyticFunction, points, h: float = 1e-5) -> float:
    """Largest relative mismatch between exact and central-difference derivatives."""
    worst = 0.0
    for x in np.atleast_2d(points):
        d = x.size
        g_fd = np.empty(d)
        H_fd = np.empty((d, d))
        for a in range(d):
            e = np.zeros(d)
            e[a] = h
            g_fd[a] = (phi.value(x + e)[0] - phi.value(x - e)[0]) / (2 * h)
            H_fd[a] = (phi.gradient(x + e) - phi.gradient(x - e)) / (2 * h)
        g, H = phi.gradient(x), phi.hessian(x)
        worst = max(worst,
                    np.max(np.abs(g - g_fd)) / max(1.0, np.max(np.abs(g))),
                    np.max(np.abs(H - H_fd)) / max(1.0, np.max(np.abs(H))))
    return float(worst)


def lp_exact(phi: AnalyticFunction, rho: DensityModel, x, p: float, m: KernelMoments) -> float:
    x = np.asarray(x, dtype=float)
    g = phi.gradient(x)
    gn2 = float(g @ g)
    if math.sqrt(gn2) <= 1e-12:
        raise DegenerateError("degenerate gradient at probe point")
    H = phi.hessian(x)
    r = float(rho.rho(x[None, :])[0])
    gr = np.asarray(rho.grad_rho(x[None, :]), dtype=float)[0]
    weighted_lap = r * np.trace(H) + 2 * float(gr @ g)
    weighted_inf = r * float(g @ H @ g) / gn2
    return m.sigma1 * (weighted_lap + (p - 2) * weighted_inf)


def interior_probes(cloud: PointCloud, eps: float, k: float, phi: AnalyticFunction) -> np.ndarray:
    """Nodes farther than (k + 1) eps from the boundary with |grad phi| > 1e-6."""
    far = cloud.domain.distance_to_boundary(cloud.points) > (k + 1) * eps
    grad_ok = np.array([np.linalg.norm(phi.gradient(x)) > 1e-6 for x in cloud.points])
    return np.nonzero(far & grad_ok)[0]


def _check_k(st_k: float, p: float, m: KernelMoments) -> None:
    k = k_of_p(p, m)
    if not math.isclose(k, st_k, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(f"stencil k={st_k} does not match k(p)={k}")


def consistency_error(cloud: PointCloud, st: HypergraphStencil, kernel: Kernel,
                      phi: AnalyticFunction, rho: DensityModel, p: float, m: KernelMoments,
                      probes=None):
    """Max and per-node |discrete - continuum| over interior probe nodes.

    The per-node field is zero away from the probes.
    """
    _check_k(st.k, p, m)
    if probes is None:
        probes = interior_probes(cloud, st.eps, st.k, phi)
    probes = np.asarray(probes, dtype=np.int64)
    if probes.size == 0:
        raise DegenerateError("epsilon too large for domain")
    discrete = hyper_operator(st, phi.value(cloud.points), st.weights(kernel, cloud))
    err = np.zeros(cloud.n)
    for i in probes:
        err[i] = abs(discrete[i] - lp_exact(phi, rho, cloud.points[i], p, m))
    return float(err[probes].max()), err


# -- regular grids -----------------------------------------------------------

@dataclass(frozen=True)
class RegularGrid:
    """Nodes ``origin + h * (i, j)`` for ``0 <= i, j < side`` that lie in ``domain``."""

    domain: Domain
    side: int

    def __post_init__(self):
        if self.domain.dim != 2:
            raise ValueError("regular grids are implemented for d = 2")
        if self.side < 3:
            raise ValueError("grid side must be >= 3")

    @property
    def origin(self) -> float:
        return 0.0 if self.domain.kind == "unit_box" else -1.0

    @property
    def spacing(self) -> float:
        extent = 1.0 if self.domain.kind == "unit_box" else 2.0
        return extent / (self.side - 1)

    def coords(self, i):
        return self.origin + self.spacing * np.asarray(i, dtype=float)

    @cached_property
    def n(self) -> int:
        if self.domain.kind == "unit_box":
            return self.side * self.side
        x = self.coords(np.arange(self.side))
        total = 0
        for xi in x:
            total += int(np.count_nonzero(self.domain.contains(np.column_stack([np.full_like(x, xi), x]))))
        return total

    def points(self) -> np.ndarray:
        x = self.coords(np.arange(self.side))
        X, Y = np.meshgrid(x, x, indexing="ij")
        pts = np.column_stack([X.ravel(), Y.ravel()])
        return pts[self.domain.contains(pts)]

    def nearest(self, target) -> tuple[int, int]:
        t = (np.asarray(target, dtype=float) - self.origin) / self.spacing
        return int(round(t[0])), int(round(t[1]))


def _disk_rows(radius: float, h: float) -> list[tuple[int, int]]:
    """(dy, half_width) chords of the closed lattice disk of the given radius."""
    R = int(math.floor(radius / h))
    rows = []
    for dy in range(-R, R + 1):
        if (dy * h) ** 2 > radius ** 2:
            continue
        w = int(math.floor(math.sqrt(max(radius ** 2 - (dy * h) ** 2, 0.0)) / h)) + 1
        while w >= 0 and (w * h) ** 2 + (dy * h) ** 2 > radius ** 2:
            w -= 1
        rows.append((dy, w))
    return rows


def grid_hyper_residual(grid: RegularGrid, node: tuple[int, int], eps: float, k: float,
                        kernel: Kernel, values: Callable[[np.ndarray], np.ndarray]) -> float:
    """Hypergraph residual at one grid node, computed from local windows only.

    Matches :func:`plap.operators.hyper_operator` on the materialized grid.
    """
    h = grid.spacing
    r_out = int(math.floor(eps / h))
    r_in = int(math.floor(k * eps / h))
    R = r_out + r_in
    a, b = node
    ia = np.arange(a - R, a + R + 1)
    ib = np.arange(b - R, b + R + 1)
    X, Y = np.meshgrid(grid.coords(ia), grid.coords(ib), indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    valid = ((ia[:, None] >= 0) & (ia[:, None] < grid.side) & (ib[None, :] >= 0) & (ib[None, :] < grid.side))
    valid &= grid.domain.contains(pts).reshape(valid.shape)
    phi = np.asarray(values(pts), dtype=float).reshape(valid.shape)
    vmax = np.where(valid, phi, -np.inf)
    vmin = np.where(valid, phi, np.inf)

    # hi/lo are needed on the outer disk only: window rows/cols R - r_out .. R + r_out
    span = 2 * r_out + 1
    lo_idx = R - r_out
    if k == 0:
        hi = vmax[lo_idx:lo_idx + span, lo_idx:lo_idx + span]
        lo = vmin[lo_idx:lo_idx + span, lo_idx:lo_idx + span]
    else:
        hi = np.full((span, span), -np.inf)
        lo = np.full((span, span), np.inf)
        for dy, w in _disk_rows(k * eps, h):
            # chord at column offset dy: node (x, y) sees column y + dy, rows x - w .. x + w
            rows = slice(lo_idx - w, lo_idx + span + w)
            cols = slice(lo_idx + dy, lo_idx + dy + span)
            fmax = maximum_filter1d(vmax[rows, cols], 2 * w + 1, axis=0, mode="constant", cval=-np.inf)
            fmin = minimum_filter1d(vmin[rows, cols], 2 * w + 1, axis=0, mode="constant", cval=np.inf)
            np.maximum(hi, fmax[w:w + span], out=hi)
            np.minimum(lo, fmin[w:w + span], out=lo)

    center = phi[R, R]
    total = 0.0
    for dy, w in _disk_rows(eps, h):
        rows = np.arange(r_out - w, r_out + w + 1)
        col = r_out + dy
        ok = valid[rows + lo_idx, col + lo_idx]
        dist = np.sqrt(((rows - r_out) * h) ** 2 + (dy * h) ** 2)
        wt = kernel(dist[ok] / eps) / eps ** 2
        s = hi[rows[ok], col] + lo[rows[ok], col] - 2 * center
        total += float(np.sum(wt * s))
    return total / (2 * grid.n * eps ** 2)


def grid_consistency_error(grid: RegularGrid, eps: float, kernel: Kernel, phi: AnalyticFunction,
                           p: float, m: KernelMoments, targets) -> tuple[float, list[float]]:
    """Consistency error at the grid nodes nearest to ``targets`` (uniform density)."""
    k = k_of_p(p, m)
    rho = DensityModel.uniform(grid.domain)
    errors = []
    for t in targets:
        node = grid.nearest(t)
        x = grid.coords(node)
        if grid.domain.distance_to_boundary(x[None, :])[0] <= (k + 1) * eps:
            raise DegenerateError("epsilon too large for domain")
        if np.linalg.norm(phi.gradient(x)) <= 1e-6:
            raise DegenerateError("degenerate gradient at probe point")
        discrete = grid_hyper_residual(grid, node, eps, k, kernel, phi.value)
        errors.append(abs(discrete - lp_exact(phi, rho, x, p, m)))
    return max(errors), errors


# -- one-dimensional closed form -------------------------------------------------

def _simpson_weights(m: int) -> np.ndarray:
    w = np.ones(m + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return w / (3 * m)


@dataclass(frozen=True, eq=False)
class ContinuumSolution1D:
    knots: np.ndarray
    values: np.ndarray
    density: DensityModel
    p: float
    grid: int

    def _antiderivative(self, a: float, x: np.ndarray) -> np.ndarray:
        # W(x) = int_a^x rho^(-2/(p-1)), composite Simpson with `grid` panels
        t = np.linspace(0.0, 1.0, self.grid + 1)
        nodes = a + (x[:, None] - a) * t[None, :]
        f = self.density.rho(nodes.reshape(-1, 1)).reshape(nodes.shape) ** (-2.0 / (self.p - 1))
        return (x - a) * (f @ _simpson_weights(self.grid))

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        a, y = self.knots, self.values
        out[x <= a[0]] = y[0]
        out[x >= a[-1]] = y[-1]
        for s in range(a.size - 1):
            sel = (x > a[s]) & (x < a[s + 1])
            if not np.any(sel):
                continue
            total = self._antiderivative(a[s], np.array([a[s + 1]]))[0]
            out[sel] = y[s] + (y[s + 1] - y[s]) * self._antiderivative(a[s], x[sel]) / total
        exact = np.isin(x, a)
        out[exact] = y[np.searchsorted(a, x[exact])]
        return out

    def derivative(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(x)
        a, y = self.knots, self.values
        for s in range(a.size - 1):
            sel = (x > a[s]) & (x < a[s + 1])
            if not np.any(sel):
                continue
            total = self._antiderivative(a[s], np.array([a[s + 1]]))[0]
            weight = self.density.rho(x[sel][:, None]) ** (-2.0 / (self.p - 1))
            out[sel] = (y[s + 1] - y[s]) * weight / total
        return out

    def flux(self, x):
        """rho^2 |u'|^(p-2) u', piecewise constant between labels."""
        du = self.derivative(x)
        r = self.density.rho(np.atleast_1d(np.asarray(x, dtype=float))[:, None])
        return r ** 2 * np.sign(du) * np.abs(du) ** (self.p - 1)


def continuum_1d(positions, values, density: DensityModel, p: float, grid: int = 1000) -> ContinuumSolution1D:
    if not p > 1:
        raise ValueError("p must exceed 1")
    pos = np.asarray(positions, dtype=float).ravel()
    val = np.asarray(values, dtype=float).ravel()
    if pos.size != val.size or pos.size == 0:
        raise ValueError("positions and values must be nonempty and equally long")
    if np.any(pos <= 0) or np.any(pos >= 1):
        raise ValueError("label positions must lie strictly inside (0, 1)")
    order = np.argsort(pos)
    pos, val = pos[order], val[order]
    if np.any(np.diff(pos) == 0):
        raise ValueError("coincident labels")
    grid = int(grid) + int(grid) % 2
    return ContinuumSolution1D(pos, val, density, float(p), grid)


# -- diagnostics -------------------------------------------------------------

def holder_ratio(cloud: PointCloud, u, alpha: float, eps: float,
                 exact_limit: int = 5000, sample_pairs: int = 5000, seed: int = 0) -> float:
    """max_{i != j} |u_i - u_j| / (|x_i - x_j|^alpha + eps^alpha).

    Exact for ``n <= exact_limit``; otherwise the max over a fixed random
    subsample of ``sample_pairs`` pairs.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    u = np.asarray(u, dtype=float)
    x = cloud.points
    n = cloud.n
    floor = eps ** alpha if eps > 0 else 0.0
    best = 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        if n <= exact_limit:
            block = 512
            for s in range(0, n, block):
                xi, ui = x[s:s + block], u[s:s + block]
                dist = np.sqrt(np.sum((xi[:, None, :] - x[None, :, :]) ** 2, axis=-1))
                du = np.abs(ui[:, None] - u[None, :])
                r = du / (dist ** alpha + floor)
                r[du == 0] = 0.0
                best = max(best, float(np.max(r)))
        else:
            rng = np.random.default_rng(seed)
            i = rng.integers(0, n, sample_pairs)
            j = rng.integers(0, n, sample_pairs)
            keep = i != j
            i, j = i[keep], j[keep]
            dist = np.linalg.norm(x[i] - x[j], axis=1)
            du = np.abs(u[i] - u[j])
            r = du / (dist ** alpha + floor)
            r[du == 0] = 0.0
            best = float(np.max(r)) if r.size else 0.0
    return best


def spike_index(u, labels: LabelSet) -> float:
    """Interquartile range of the unlabeled values over the label range."""
    u = np.asarray(u, dtype=float)
    free = np.delete(u, labels.indices)
    if free.size < 4:
        raise ValueError("spike index needs at least 4 unlabeled nodes")
    span = float(labels.values.max() - labels.values.min())
    if span == 0:
        raise ValueError("zero label range")
    q1, q3 = np.percentile(free, [25, 75])
    return float((q3 - q1) / span)
