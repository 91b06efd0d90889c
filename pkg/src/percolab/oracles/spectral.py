"""Spectral quantities of the tree two-point kernel ``T_p(u, v) = p^d(u, v)``.

The top eigenvector of the (entrywise positive) restriction of T_p to a ball
B(v, L) is unique, hence invariant under automorphisms fixing v, hence radial.
So the whole computation collapses to an (L+1) x (L+1) matrix indexed by
depth. With ``w_a = sqrt|S_a|`` the reduced matrix ``w_a M_ab / w_b`` is
symmetric and its spectrum on radial functions matches that of T_p.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .. import NumericError, PrecisionError, ValidationError
from ..graphs import GraphFamily, RegularTree

MAX_ITER = 10_000


def _sphere(d: int, r: int) -> int:
    return 1 if r == 0 else d * (d - 1) ** (r - 1)


def depth_pair_counts(d: int, a: int, b: int):
    """For a fixed x at depth a, the ``(distance, count)`` pairs over y at depth b,
    grouped by the depth c of their last common ancestor."""
    out = []
    for c in range(min(a, b) + 1):
        if c == a:
            if b == a:
                out.append((0, 1))
            else:
                out.append((b - a, _sphere(d, b) if a == 0 else (d - 1) ** (b - a)))
        elif c == b:
            out.append((a - b, 1))
        else:
            others = d - 1 if c == 0 else d - 2
            out.append((a + b - 2 * c, others * (d - 1) ** (b - c - 1)))
    return out


def radial_kernel(d: int, p: float, L: int) -> np.ndarray:
    """``M[a, b] = sum_{y in S_b} T_p(x, y)`` for any x in S_a (unsymmetrized)."""
    M = np.zeros((L + 1, L + 1))
    for a in range(L + 1):
        for b in range(L + 1):
            M[a, b] = sum(float(cnt) * p ** k for k, cnt in depth_pair_counts(d, a, b))
    return M


def radial_matrix(d: int, p: float, L: int) -> np.ndarray:
    """Symmetric radial reduction of T_p restricted to B(root, L)."""
    M = radial_kernel(d, p, L)
    w = np.sqrt(np.array([float(_sphere(d, r)) for r in range(L + 1)]))
    Ms = w[:, None] * M / w[None, :]
    return 0.5 * (Ms + Ms.T)


def power_iteration(A: np.ndarray, tol: float = 1e-12, max_iter: int = MAX_ITER):
    """Dominant eigenpair of a symmetric non-negative matrix.

    Returns ``(value, iterations, vector)``; stops once successive Rayleigh
    quotients differ by less than ``tol`` (relative).
    """
    x = np.ones(A.shape[0]) / math.sqrt(A.shape[0])
    value = float(x @ A @ x)
    for it in range(1, max_iter + 1):
        y = A @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0, it, x
        x = y / norm
        new = float(x @ A @ x)
        if abs(new - value) <= tol * max(1.0, abs(new)):
            return new, it, x
        value = new
    raise NumericError(f"power iteration did not converge in {max_iter} iterations")


def _require_tree(family) -> int:
    if isinstance(family, RegularTree):
        return family.d
    if isinstance(family, int):
        return family
    raise ValidationError("the two-point kernel is only exact on regular trees")


def operator_norm(family: GraphFamily | int, p: float, L: int, tol: float = 1e-12):
    """``(norm_lower, iterations)``: top eigenvalue of T_p on B(v, L).

    This is a lower bound on the full-graph norm and non-decreasing in L.
    """
    d = _require_tree(family)
    if L < 0:
        raise ValidationError("L must be non-negative")
    if p == 0.0:
        return 1.0, 0
    value, it, _ = power_iteration(radial_matrix(d, p, L), tol)
    return value, it


def explicit_ball_kernel(family: GraphFamily, p: float, L: int) -> np.ndarray:
    """Dense T_p on B(root, L) built vertex by vertex (small L only)."""
    verts = family.ball_enumerate(family.root(), L, cap=5000)
    n = len(verts)
    T = np.empty((n, n))
    for i, u in enumerate(verts):
        for j in range(i, n):
            T[i, j] = T[j, i] = p ** family.graph_distance(u, verts[j])
    return T


def tree_norm_exact(d: int, p: float) -> float:
    """Full-tree ``||T_p||_{2->2}`` from the spherical-function expansion; inf at
    and beyond ``p = 1/sqrt(d - 1)``."""
    x = p * math.sqrt(d - 1)
    if x >= 1.0:
        return math.inf
    return 1.0 + d / (d - 1) * (x / (1 - x) + (d - 2) / d * x / (1 - x) ** 2)


def schur_bound(d: int, p: float) -> float:
    """Row-sum bound ``1 + sum_r d (d-1)^(r-1) p^r``; inf for p >= 1/(d-1)."""
    m = (d - 1) * p
    if m >= 1.0:
        return math.inf
    return 1.0 + d * p / (1.0 - m)


def p22_tree(d: int) -> float:
    return 1.0 / math.sqrt(d - 1)


def local_growth_exponent(d: int, p: float, L: int) -> float:
    """``log(lambda(L) / lambda(L-1)) / log(L / (L-1))`` for the truncated norm."""
    hi = operator_norm(d, p, L, tol=1e-14)[0]
    lo = operator_norm(d, p, L - 1, tol=1e-14)[0]
    return math.log(hi / lo) / math.log(L / (L - 1))


def norm_blowup_onset(d: int, L: int = 40, bracket=None) -> float:
    """Parameter at which the truncated norm starts growing like ``L^2``.

    Below ``1/sqrt(d - 1)`` the truncated norm saturates (exponent 0), above
    it grows exponentially in L, and at the threshold it grows like ``L^2``;
    the onset is where the local exponent crosses 2.
    """
    if bracket is None:
        c = p22_tree(d)
        bracket = (0.85 * c, min(1.15 * c, 0.999))
    return brentq(lambda p: local_growth_exponent(d, p, L) - 2.0, *bracket, xtol=1e-6)


# --- modified triangle diagram ---------------------------------------------------

def _walk_step(f: np.ndarray, d: int) -> np.ndarray:
    """Simple random walk P applied to a radial function (zero beyond L)."""
    g = np.zeros_like(f)
    g[0] = f[1] if f.size > 1 else 0.0
    nxt = np.append(f[2:], 0.0)
    g[1:] = f[:-1] / d + (d - 1) / d * nxt
    return g


def triangle_value(d: int, p: float, k: int, L: int) -> float:
    """``(T_p^2 P^k T_p)(v, v)`` with T_p restricted to B(v, L)."""
    M = radial_kernel(d, p, L)
    f = np.array([p ** a for a in range(L + 1)])  # T_p delta_v
    for _ in range(k):
        f = _walk_step(f, d)
    f = M @ f
    f = M @ f
    return float(f[0])


def triangle_diagnostic_values(d: int, p: float, k_list, L: int, tol: float = 0.10):
    """``[(k, value, tail_estimate)]``; raises PrecisionError if any tail estimate
    exceeds ``tol`` times the value.

    The truncation tail is estimated from increments between L - 2s, L - s
    and L (s = max(1, L // 10)), extrapolated geometrically.
    """
    if L < 3:
        raise ValidationError("L must be at least 3")
    s = max(1, L // 10)
    out = []
    for k in k_list:
        v0, v1, v2 = (triangle_value(d, p, k, L - 2 * s), triangle_value(d, p, k, L - s),
                      triangle_value(d, p, k, L))
        inc1, inc2 = v2 - v1, v1 - v0
        if inc1 <= 0.0:
            tail = 0.0
        elif inc2 <= 0.0 or inc1 >= inc2:
            tail = math.inf
        else:
            rho = inc1 / inc2
            tail = inc1 * rho / (1.0 - rho)
        if tail > tol * v2:
            raise PrecisionError(
                f"truncation tail {tail:.3g} exceeds {tol:.0%} of value {v2:.3g} at k={k}; "
                f"increase L beyond {L}")
        out.append((k, v2, tail))
    return out
