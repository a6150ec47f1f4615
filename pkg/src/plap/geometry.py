"""Point clouds, closed-ball radius queries and the sample-size schedules.

Node coordinates live in an ``(n, d)`` float array.  Every radius query in the
package uses the closed-ball test ``sqrt(sum((x_i - x_j)**2)) <= r`` through
:func:`within_radius`, so the bucketed index, the bulk query and brute-force
checks agree bit for bit.
"""
from __future__ import annotations

import csv
import itertools
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import DomainError, SamplingError

DOMAIN_KINDS = ("unit_box", "unit_ball")

# points that sit on the boundary up to rounding are still accepted
_BOUNDARY_SLACK = 1e-12


def within_radius(diff: np.ndarray, r: float) -> np.ndarray:
    """Closed-ball membership for an array of coordinate differences."""
    return np.sqrt(np.sum(diff * diff, axis=-1)) <= r


@dataclass(frozen=True)
class Domain:
    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise DomainError(f"unknown domain kind {self.kind!r}")
        if int(self.dim) < 1:
            raise DomainError("domain dimension must be >= 1")

    @property
    def volume(self) -> float:
        if self.kind == "unit_box":
            return 1.0
        return math.pi ** (self.dim / 2) / math.gamma(self.dim / 2 + 1)

    @property
    def diameter(self) -> float:
        return math.sqrt(self.dim) if self.kind == "unit_box" else 2.0

    def contains(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.kind == "unit_box":
            return np.all((points >= -_BOUNDARY_SLACK) & (points <= 1 + _BOUNDARY_SLACK), axis=1)
        return np.sqrt(np.sum(points * points, axis=1)) <= 1 + _BOUNDARY_SLACK

    def distance_to_boundary(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.kind == "unit_box":
            return np.minimum(points.min(axis=1), (1 - points).min(axis=1))
        return 1 - np.sqrt(np.sum(points * points, axis=1))

    def sample_uniform(self, rng: np.random.Generator, m: int) -> np.ndarray:
        if self.kind == "unit_box":
            return rng.random((m, self.dim))
        # direction from a Gaussian, radius from the volume law r^d
        g = rng.standard_normal((m, self.dim))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = rng.random(m) ** (1.0 / self.dim)
        return g * r[:, None]


@dataclass(frozen=True)
class DensityModel:
    """Sampling density with its gradient.

    ``rho`` and ``grad_rho`` are vectorized: they take an ``(m, d)`` array and
    return ``(m,)`` and ``(m, d)`` arrays respectively.
    """

    rho: Callable[[np.ndarray], np.ndarray]
    grad_rho: Callable[[np.ndarray], np.ndarray]
    upper_bound: float
    name: str = "custom"

    @classmethod
    def uniform(cls, domain: Domain) -> "DensityModel":
        c = 1.0 / domain.volume
        return cls(
            rho=lambda x: np.full(np.atleast_2d(x).shape[0], c),
            grad_rho=lambda x: np.zeros_like(np.atleast_2d(x), dtype=float),
            upper_bound=c,
            name="uniform",
        )

    @classmethod
    def ramp(cls, domain: Domain) -> "DensityModel":
        """Density proportional to ``1 + x_0`` on the unit box."""
        if domain.kind != "unit_box":
            raise DomainError("ramp density is only defined on unit_box")
        d = domain.dim

        def grad(x):
            g = np.zeros_like(np.atleast_2d(x), dtype=float)
            g[:, 0] = 1 / 1.5
            return g

        return cls(
            rho=lambda x: (1.0 + np.atleast_2d(x)[:, 0]) / 1.5,
            grad_rho=grad,
            upper_bound=2.0 / 1.5,
            name="ramp",
        )

    @classmethod
    def named(cls, name: str, domain: Domain) -> "DensityModel":
        if name == "uniform":
            return cls.uniform(domain)
        if name == "ramp":
            return cls.ramp(domain)
        raise DomainError(f"unknown density {name!r}")


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    domain: Domain
    seed: int | None = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] != self.domain.dim:
            raise DomainError(f"points must have shape (n, {self.domain.dim})")
        if pts.shape[0] < 2:
            raise DomainError("a point cloud needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise DomainError("point coordinates must be finite")
        if not np.all(self.domain.contains(pts)):
            raise DomainError(f"points outside {self.domain.kind}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def permuted(self, perm: np.ndarray) -> "PointCloud":
        return PointCloud(self.points[perm], self.domain, self.seed)


@dataclass(frozen=True, eq=False)
class LabelSet:
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        val = np.asarray(self.values, dtype=float).ravel()
        if idx.shape != val.shape:
            raise ValueError("label indices and values differ in length")
        if idx.size < 1:
            raise ValueError("at least one label is required")
        if np.unique(idx).size != idx.size:
            raise ValueError("label indices must be distinct")
        if not np.all(np.isfinite(val)):
            raise ValueError("label values must be finite")
        idx.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @property
    def N(self) -> int:
        return self.indices.size

    def validate(self, n: int) -> None:
        if not self.N < n:
            raise ValueError(f"need fewer labels than nodes (N={self.N}, n={n})")
        if self.indices.min() < 0 or self.indices.max() >= n:
            raise ValueError("label index out of range")

    def shifted(self, c: float) -> "LabelSet":
        return LabelSet(self.indices, self.values + c)

    def mask(self, n: int) -> np.ndarray:
        m = np.zeros(n, dtype=bool)
        m[self.indices] = True
        return m


def sample_cloud(n: int, domain: Domain, density: DensityModel, seed: int,
                 warmup: int = 10_000) -> PointCloud:
    """Draw ``n`` i.i.d. points from ``density`` by rejection against the
    uniform proposal on ``domain``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if not math.isfinite(density.upper_bound) or density.upper_bound <= 0:
        raise SamplingError("density upper bound must be finite and positive")
    rng = np.random.default_rng(seed)
    accepted: list[np.ndarray] = []
    count = proposed = 0
    batch = max(64, 2 * n)
    while count < n:
        x = domain.sample_uniform(rng, batch)
        r = np.asarray(density.rho(x), dtype=float)
        if np.any(r > density.upper_bound * (1 + 1e-12)):
            raise SamplingError("density exceeds its declared upper bound")
        keep = rng.random(batch) * density.upper_bound < r
        accepted.append(x[keep])
        count += int(keep.sum())
        proposed += batch
        if proposed >= warmup and count < 1e-3 * proposed:
            raise SamplingError("density upper bound too loose")
    return PointCloud(np.concatenate(accepted)[:n], domain, seed)


def cloud_with_labels(domain: Domain, positions, values, n: int,
                      density: DensityModel, seed: int) -> tuple[PointCloud, LabelSet]:
    """Cloud whose first ``N`` nodes are the labeled positions and whose
    remaining ``n - N`` nodes are i.i.d. samples."""
    pos = np.asarray(positions, dtype=float).reshape(-1, domain.dim)
    N = pos.shape[0]
    if N >= n:
        raise ValueError("need fewer labels than nodes")
    free = sample_cloud(n - N, domain, density, seed) if n - N >= 2 else None
    rest = free.points if free is not None else sample_cloud(2, domain, density, seed).points[:1]
    cloud = PointCloud(np.vstack([pos, rest]), domain, seed)
    return cloud, LabelSet(np.arange(N), values)


@dataclass(frozen=True, eq=False)
class NeighborIndex:
    """Uniform spatial hash: node ``i`` lives in cell ``floor(x_i / cell_size)``."""

    cell_size: float
    buckets: Mapping[tuple[int, ...], np.ndarray]
    cells: np.ndarray = field(repr=False)


def build_index(cloud: PointCloud, cell_size: float) -> NeighborIndex:
    if not cell_size > 0:
        raise ValueError("cell_size must be positive")
    cells = np.floor(cloud.points / cell_size).astype(np.int64)
    order = np.lexsort(cells.T[::-1])
    sorted_cells = cells[order]
    change = np.any(np.diff(sorted_cells, axis=0) != 0, axis=1)
    starts = np.concatenate([[0], np.nonzero(change)[0] + 1, [len(order)]])
    buckets = {}
    for a, b in zip(starts[:-1], starts[1:]):
        members = np.sort(order[a:b])
        members.setflags(write=False)
        buckets[tuple(int(c) for c in sorted_cells[a])] = members
    cells.setflags(write=False)
    return NeighborIndex(float(cell_size), MappingProxyType(buckets), cells)


def _offsets(dim: int, span: int):
    return itertools.product(range(-span, span + 1), repeat=dim)


def _candidates(index: NeighborIndex, cell: tuple[int, ...], span: int) -> np.ndarray:
    found = []
    for off in _offsets(len(cell), span):
        b = index.buckets.get(tuple(c + o for c, o in zip(cell, off)))
        if b is not None:
            found.append(b)
    return np.concatenate(found) if found else np.empty(0, dtype=np.int64)


def radius_neighbors(index: NeighborIndex, cloud: PointCloud, i: int, r: float) -> np.ndarray:
    """Sorted indices ``j`` with ``|x_i - x_j| <= r``, ``i`` included."""
    if not r > 0:
        raise ValueError("radius must be positive")
    span = max(1, math.ceil(r / index.cell_size))
    cand = _candidates(index, tuple(index.cells[i]), span)
    hit = within_radius(cloud.points[cand] - cloud.points[i], r)
    return np.sort(cand[hit])


def radius_neighbors_all(index: NeighborIndex, cloud: PointCloud, r: float) -> tuple[np.ndarray, np.ndarray]:
    """Closed-ball neighborhoods of every node in CSR form ``(indptr, indices)``.

    Rows are sorted ascending and include the node itself.
    """
    if not r > 0:
        raise ValueError("radius must be positive")
    n = cloud.n
    span = max(1, math.ceil(r / index.cell_size))
    rows: list[np.ndarray | None] = [None] * n
    pts = cloud.points
    for cell, members in index.buckets.items():
        cand = np.sort(_candidates(index, cell, span))
        diff = pts[members][:, None, :] - pts[cand][None, :, :]
        hit = within_radius(diff, r)
        for row, m in enumerate(members):
            rows[m] = cand[hit[row]]
    counts = np.fromiter((len(x) for x in rows), dtype=np.int64, count=n)
    indptr = np.concatenate([[0], np.cumsum(counts)])
    indices = np.concatenate(rows).astype(np.int64)
    return indptr, indices


def delta_n(n: float, d: int) -> float:
    """Transport-distance scale of an ``n``-sample empirical measure."""
    if d < 2:
        raise ValueError("delta schedule undefined below d=2")
    if n < 3:
        raise ValueError("delta schedule needs n >= 3")
    ln = math.log(n)
    if d == 2:
        return ln ** 0.75 / math.sqrt(n)
    return (ln / n) ** (1.0 / d)


def epsilon_schedule(n: float, d: int, amplitude: float = 1.5, exponent: float = 0.4,
                     diameter: float | None = None) -> float:
    """``amplitude * delta_n ** exponent``; d = 1 borrows the d = 2 schedule."""
    if not amplitude > 0:
        raise ValueError("amplitude must be positive")
    if not 0 < exponent < 0.5:
        raise ValueError("exponent must lie in (0, 0.5) so that epsilon >> sqrt(delta_n)")
    eps = amplitude * delta_n(n, max(d, 2)) ** exponent
    if diameter is None:
        diameter = math.sqrt(d)
    if eps >= diameter:
        raise DomainError("epsilon exceeds domain")
    return eps


# -- CSV persistence ---------------------------------------------------------

def _fmt(x: float) -> str:
    return "%.17g" % x


def write_cloud_csv(path, cloud: PointCloud) -> None:
    path = Path(path)
    header = ["id"] + [f"x{k}" for k in range(cloud.dim)]
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, row in enumerate(cloud.points):
            w.writerow([i] + [_fmt(v) for v in row])


def read_cloud_csv(path, domain: Domain, seed: int | None = None) -> PointCloud:
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    expected = ["id"] + [f"x{k}" for k in range(domain.dim)]
    if header != expected:
        raise ValueError(f"{path}: header {header} does not match {expected}")
    ids = [int(r[0]) for r in rows[1:]]
    if ids != list(range(len(ids))):
        raise ValueError(f"{path}: ids must be contiguous from 0")
    pts = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=float)
    return PointCloud(pts.reshape(-1, domain.dim), domain, seed)


def write_labels_csv(path, labels: LabelSet) -> None:
    write_field_csv(path, labels.values, ids=labels.indices)


def read_labels_csv(path) -> LabelSet:
    ids, vals = read_field_csv(path)
    return LabelSet(ids, vals)


def write_field_csv(path, values, ids=None) -> None:
    values = np.asarray(values, dtype=float)
    ids = np.arange(values.size) if ids is None else np.asarray(ids)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "value"])
        for i, v in zip(ids, values):
            w.writerow([int(i), _fmt(v)])


def read_field_csv(path) -> tuple[np.ndarray, np.ndarray]:
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["id", "value"]:
        raise ValueError(f"{path}: expected header id,value")
    ids = np.array([int(r[0]) for r in rows[1:]], dtype=np.int64)
    vals = np.array([float(r[1]) for r in rows[1:]], dtype=float)
    return ids, vals
