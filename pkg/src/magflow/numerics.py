"""Small numerical helpers shared across modules.

Grid-plus-refinement extremum searches, bracketed root finding, and cached
Gauss-Legendre nodes. Everything here is deterministic: fixed grids, fixed
iteration budgets, ties broken toward smaller abscissae.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@lru_cache(maxsize=32)
def gauss_nodes(n: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def golden_max(f, a: float, b: float, tol: float = 1e-9, max_iter: int = 200):
    """Golden-section maximization of a unimodal f on [a, b]."""
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
    xm = 0.5 * (a + b)
    return xm, f(xm)


def grid_sup(f, a: float, b: float, n: int = 4096, top_k: int = 5,
             xtol: float = 1e-9, endpoint_values=(None, None)):
    """Supremum of f on [a, b] by dense grid plus golden-section refinement.

    f must accept numpy arrays. The grid is uniform over the open interval;
    endpoint_values, when given, stand in for f at a and b (useful when f is
    defined there only as a limit). The top_k interior local maxima are each
    refined to xtol in the abscissa. Returns (argmax, sup).
    """
    t = np.linspace(a, b, n + 2)[1:-1]
    v = np.asarray(f(t), dtype=float)
    interior = v[1:-1]
    is_max = (interior >= v[:-2]) & (interior >= v[2:])
    idx = np.nonzero(is_max)[0] + 1
    if idx.size == 0:
        idx = np.array([int(np.argmax(v))])
    order = np.argsort(-v[idx], kind="stable")
    best_x, best_v = None, -np.inf
    for i in idx[order[:top_k]]:
        lo = t[i - 1] if i > 0 else a
        hi = t[i + 1] if i < t.size - 1 else b
        x, fx = golden_max(lambda s: float(f(s)), lo, hi, tol=xtol)
        if fx > best_v:
            best_x, best_v = x, fx
    for te, ve in zip((a, b), endpoint_values):
        if ve is not None and ve > best_v:
            best_x, best_v = te, ve
    return best_x, best_v


def grid_roots(f, a: float, b: float, n: int = 4096, xtol: float = 1e-12):
    """All simple roots of f on (a, b) located by sign change plus brentq."""
    t = np.linspace(a, b, n + 1)
    v = np.asarray(f(t), dtype=float)
    roots = []
    for i in range(n):
        if v[i] == 0.0:
            roots.append(t[i])
        elif v[i] * v[i + 1] < 0.0:
            roots.append(brentq(lambda s: float(f(s)), t[i], t[i + 1],
                                xtol=xtol, maxiter=200))
    return roots


def bisect_root(f, a: float, b: float, tol: float = 1e-10, max_iter: int = 200):
    """Plain bisection; f(a) and f(b) must have opposite signs."""
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise ValueError("bisect_root: no sign change on bracket")
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0 or (b - a) < tol:
            return m
        if fa * fm < 0:
            b, fb = m, fm
        else:
            a, fa = m, fm
    return 0.5 * (a + b)
