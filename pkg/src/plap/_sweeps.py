"""Compiled node-wise sweeps used by :mod:`plap.solvers`.

Each sweep updates the free nodes once, either in place in ascending order
(Gauss-Seidel) or from a frozen copy of the previous iterate (Jacobi), and
returns the sup norm of the change.
"""
import numpy as np
from numba import njit

SCHEME_P = 0
SCHEME_INF = 1
SCHEME_GAME = 2


@njit(cache=True, nogil=True)
def _root_p(vals, w, p, t0, tol):
    # root of t -> sum w |v - t|^(p-2) (v - t), strictly decreasing on [min v, max v]
    lo = vals.min()
    hi = vals.max()
    if hi - lo <= tol:
        return 0.5 * (lo + hi)
    if p == 2.0:
        return np.sum(w * vals) / np.sum(w)
    t = min(max(t0, lo), hi)
    for _ in range(200):
        f = 0.0
        df = 0.0
        for j in range(vals.size):
            r = vals[j] - t
            a = abs(r)
            if a > 0.0:
                ap = a ** (p - 2.0)
                f += w[j] * ap * r
                df += w[j] * ap
        if f == 0.0:
            return t
        if f > 0.0:
            lo = t
        else:
            hi = t
        df *= -(p - 1.0)
        tn = t - f / df if df < 0.0 else 0.5 * (lo + hi)
        if not (lo < tn < hi):
            tn = 0.5 * (lo + hi)
        if abs(tn - t) <= tol or hi - lo <= tol:
            return tn
        t = tn
    return t


@njit(cache=True, nogil=True)
def _inf_value(vals, w, t):
    hi = -np.inf
    lo = np.inf
    for j in range(vals.size):
        s = w[j] * (vals[j] - t)
        if s > hi:
            hi = s
        if s < lo:
            lo = s
    return hi + lo


@njit(cache=True, nogil=True)
def _root_inf(vals, w, tol):
    lo = vals.min()
    hi = vals.max()
    if hi - lo <= tol:
        return 0.5 * (lo + hi)
    if w.min() == w.max():
        return 0.5 * (lo + hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _inf_value(vals, w, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@njit(cache=True, nogil=True)
def _root_game(vals, w, p, lam, tol):
    lo = vals.min()
    hi = vals.max()
    if hi - lo <= tol:
        return 0.5 * (lo + hi)
    deg = np.sum(w)
    wv = np.sum(w * vals)
    c = lam * (p - 2.0)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        g = (wv - deg * mid) / deg + c * _inf_value(vals, w, mid)
        if g > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@njit(cache=True, nogil=True)
def graph_sweep(scheme, ptr, idx, w, u, free, p, lam, damping, tol, gauss_seidel):
    src = u if gauss_seidel else u.copy()
    change = 0.0
    for i in range(u.size):
        if not free[i]:
            continue
        a = ptr[i]
        b = ptr[i + 1]
        vals = src[idx[a:b]]
        ww = w[a:b]
        if scheme == SCHEME_P:
            t = _root_p(vals, ww, p, src[i], tol)
        elif scheme == SCHEME_INF:
            t = _root_inf(vals, ww, tol)
        else:
            t = _root_game(vals, ww, p, lam, tol)
        new = (1.0 - damping) * src[i] + damping * t
        d = abs(new - u[i])
        if d > change:
            change = d
        u[i] = new
    return change


@njit(cache=True, nogil=True)
def local_extrema(inner_ptr, inner_idx, u, hi, lo):
    for j in range(inner_ptr.size - 1):
        mx = -np.inf
        mn = np.inf
        for q in range(inner_ptr[j], inner_ptr[j + 1]):
            v = u[inner_idx[q]]
            if v > mx:
                mx = v
            if v < mn:
                mn = v
        hi[j] = mx
        lo[j] = mn


@njit(cache=True, nogil=True)
def hyper_jacobi(outer_ptr, outer_idx, w, inner_ptr, inner_idx, u, free, damping):
    n = u.size
    hi = np.empty(n)
    lo = np.empty(n)
    local_extrema(inner_ptr, inner_idx, u, hi, lo)
    change = 0.0
    new_u = u.copy()
    for i in range(n):
        if not free[i]:
            continue
        s = 0.0
        mass = 0.0
        for q in range(outer_ptr[i], outer_ptr[i + 1]):
            j = outer_idx[q]
            s += w[q] * (hi[j] + lo[j])
            mass += w[q]
        new = (1.0 - damping) * u[i] + damping * s / (2.0 * mass)
        d = abs(new - u[i])
        if d > change:
            change = d
        new_u[i] = new
    u[:] = new_u
    return change


@njit(cache=True, nogil=True)
def _rescan(inner_ptr, inner_idx, u, j):
    mx = -np.inf
    mn = np.inf
    for q in range(inner_ptr[j], inner_ptr[j + 1]):
        v = u[inner_idx[q]]
        if v > mx:
            mx = v
        if v < mn:
            mn = v
    return mx, mn


@njit(cache=True, nogil=True)
def hyper_gauss_seidel(outer_ptr, outer_idx, w, inner_ptr, inner_idx, u, free, damping, hi, lo):
    # hi/lo hold the inner-ball max/min of the current u and are kept in sync;
    # inner balls are symmetric, so node i affects exactly the balls of inner(i)
    change = 0.0
    for i in range(u.size):
        if not free[i]:
            continue
        s = 0.0
        mass = 0.0
        for q in range(outer_ptr[i], outer_ptr[i + 1]):
            j = outer_idx[q]
            s += w[q] * (hi[j] + lo[j])
            mass += w[q]
        old = u[i]
        new = (1.0 - damping) * old + damping * s / (2.0 * mass)
        d = abs(new - old)
        if d > change:
            change = d
        if new == old:
            continue
        u[i] = new
        for q in range(inner_ptr[i], inner_ptr[i + 1]):
            j = inner_idx[q]
            if new >= hi[j]:
                hi[j] = new
            elif old == hi[j]:
                hi[j], _ = _rescan(inner_ptr, inner_idx, u, j)
            if new <= lo[j]:
                lo[j] = new
            elif old == lo[j]:
                _, lo[j] = _rescan(inner_ptr, inner_idx, u, j)
    return change
