"""Kernel profiles, their unit-ball moments and the radius calibration k(p).

The two moments are

    sigma2 = 1/2 * int_{B(0,1)} eta(|y|) dy
    sigma1 = 1/2 * int_{B(0,1)} eta(|y|) y_1^2 dy

and both reduce to radial integrals through the Dirichlet-type identity

    int_B g(|x|^2) prod |x_i|^(2a_i - 1) dx
        = prod Gamma(a_i) / Gamma(sum a_i) * int_0^1 g(t) t^(sum a_i - 1) dt.

With t = r^2 this gives

    sigma2 = pi^(d/2) / Gamma(d/2)         * int_0^1 eta(r) r^(d-1) dr
    sigma1 = pi^(d/2) / (2 Gamma(d/2 + 1)) * int_0^1 eta(r) r^(d+1) dr

which stays smooth at r = 0 for every d >= 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import KernelError, QuadratureError

KERNEL_KINDS = ("constant", "gaussian", "tabulated")


@dataclass(frozen=True)
class Kernel:
    kind: str = "constant"
    sigma: float | None = None
    table: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise KernelError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "gaussian":
            if self.sigma is None or not self.sigma > 0:
                raise KernelError("gaussian kernel needs sigma > 0")
        if self.kind == "tabulated":
            if not self.table or len(self.table) < 2:
                raise KernelError("tabulated kernel needs at least two samples")
            s = np.array([p[0] for p in self.table], dtype=float)
            e = np.array([p[1] for p in self.table], dtype=float)
            if s[0] != 0.0 or s[-1] != 1.0 or np.any(np.diff(s) <= 0):
                raise KernelError("table abscissae must increase strictly from 0 to 1")
            if np.any(np.diff(e) > 0):
                raise KernelError("kernel profile must be nonincreasing")
            if np.any(e < 0) or not np.all(np.isfinite(e)):
                raise KernelError("kernel profile must be finite and nonnegative")
        # gaussian profiles are used unscaled (eta(0) = 1), so they cannot meet
        # eta(1) >= 1; only the other kinds are held to the bounds
        if self.kind != "gaussian" and not self.admissible:
            raise KernelError(
                f"kernel violates eta(0) <= 2, eta(1) >= 1 (eta(0)={self.at(0.0)}, eta(1)={self.at(1.0)})"
            )

    @classmethod
    def constant(cls) -> "Kernel":
        return cls("constant")

    @classmethod
    def gaussian(cls, sigma: float) -> "Kernel":
        return cls("gaussian", sigma=float(sigma))

    @classmethod
    def tabulated(cls, s, eta) -> "Kernel":
        return cls("tabulated", table=tuple((float(a), float(b)) for a, b in zip(s, eta)))

    @property
    def admissible(self) -> bool:
        return self.at(0.0) <= 2.0 and self.at(1.0) >= 1.0

    @property
    def knots(self) -> tuple[float, ...]:
        if self.kind == "tabulated":
            return tuple(p[0] for p in self.table)
        return (0.0, 1.0)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "constant":
            out = np.ones_like(s)
        elif self.kind == "gaussian":
            out = np.exp(-(s * s) / self.sigma ** 2)
        else:
            xs = [p[0] for p in self.table]
            ys = [p[1] for p in self.table]
            out = np.interp(s, xs, ys)
        return np.where(s <= 1.0, out, 0.0)

    def at(self, s: float) -> float:
        return float(self(s))


@dataclass(frozen=True)
class KernelMoments:
    sigma1: float
    sigma2: float
    dim: int

    @property
    def ratio(self) -> float:
        """sigma2 / sigma1."""
        return self.sigma2 / self.sigma1


def adaptive_simpson(f, a: float, b: float, rtol: float = 1e-10, max_level: int = 60) -> float:
    """Adaptive Simpson quadrature with a relative tolerance.

    Raises :class:`QuadratureError` if some subinterval still fails the
    tolerance test after ``max_level`` bisections.
    """
    # coarse 16-panel estimate sets the absolute scale of the target
    xs = np.linspace(a, b, 33)
    ys = np.array([f(x) for x in xs])
    scale = abs((b - a) / 96 * (ys[0] + ys[-1] + 4 * ys[1:-1:2].sum() + 2 * ys[2:-1:2].sum()))
    target = rtol * max(scale, 1e-300)

    total = 0.0
    # explicit stack: (a, b, fa, fm, fb, whole, tol, level)
    stack = []
    for lo, hi in zip(xs[:-1:2], xs[2::2]):
        flo, fmid, fhi = f(lo), f(0.5 * (lo + hi)), f(hi)
        stack.append((lo, hi, flo, fmid, fhi, (hi - lo) / 6 * (flo + 4 * fmid + fhi), target / 16, 4))
    while stack:
        lo, hi, flo, fmid, fhi, est, tol, level = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6 * (flo + 4 * flm + fmid)
        right = (hi - mid) / 6 * (fmid + 4 * frm + fhi)
        delta = left + right - est
        if abs(delta) <= 15 * tol:
            total += left + right + delta / 15
        elif level >= max_level:
            raise QuadratureError("moment quadrature stalled")
        else:
            stack.append((lo, mid, flo, flm, fmid, left, tol / 2, level + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, tol / 2, level + 1))
    return total


def _radial(kernel: Kernel, power: int) -> float:
    """int_0^1 eta(r) r^power dr, split at the kernel's knots."""
    knots = kernel.knots
    return sum(
        adaptive_simpson(lambda r: kernel.at(r) * r ** power, a, b)
        for a, b in zip(knots[:-1], knots[1:])
    )


@lru_cache(maxsize=None)
def moments(kernel: Kernel, d: int) -> KernelMoments:
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if kernel.kind == "constant":
        half_ball = 0.5 * math.pi ** (d / 2) / math.gamma(d / 2 + 1)
        return KernelMoments(half_ball / (d + 2), half_ball, d)
    c2 = math.pi ** (d / 2) / math.gamma(d / 2)
    c1 = math.pi ** (d / 2) / (2 * math.gamma(d / 2 + 1))
    return KernelMoments(c1 * _radial(kernel, d + 1), c2 * _radial(kernel, d - 1), d)


def radial_moments(kernel: Kernel, d: int) -> KernelMoments:
    """Quadrature moments even for the constant kernel (no closed form)."""
    c2 = math.pi ** (d / 2) / math.gamma(d / 2)
    c1 = math.pi ** (d / 2) / (2 * math.gamma(d / 2 + 1))
    return KernelMoments(c1 * _radial(kernel, d + 1), c2 * _radial(kernel, d - 1), d)


def k_of_p(p: float, m: KernelMoments) -> float:
    if p < 2:
        raise ValueError("exponent below 2 unsupported")
    return math.sqrt((p - 2) * m.sigma1 / m.sigma2)


def p_of_k(k: float, m: KernelMoments) -> float:
    if k < 0:
        raise ValueError("k must be nonnegative")
    return k * k * m.sigma2 / m.sigma1 + 2


def eta_chi(kernel: Kernel, eps: float, s, dim: int):
    """Rescaled, truncated kernel eps^-d eta(s/eps) on the closed ball s <= eps."""
    s = np.asarray(s, dtype=float)
    w = kernel(s / eps) / eps ** dim
    out = np.where(s <= eps, w, 0.0)
    return float(out) if out.ndim == 0 else out
