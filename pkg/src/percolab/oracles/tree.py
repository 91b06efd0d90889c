"""Exact percolation quantities on the d-regular tree.

On a tree the open path from the root to any vertex is unique, so the
intrinsic sphere of radius r is the set of vertices at graph distance r whose
geodesic is fully open, and the cluster generations form a Galton-Watson
process: Binomial(d, p) children at the root, Binomial(d - 1, p) afterwards.
Everything here follows from that observation and never touches a sampler.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binom

from .. import ValidationError
from ..graphs import GraphFamily, RegularTree

EXTINCTION_TOL = 1e-12


@dataclass(frozen=True)
class TreeModel:
    d: int
    p: float

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 3:
            raise ValidationError(f"tree degree must be an integer >= 3, got {self.d!r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"p must lie in [0, 1], got {self.p!r}")

    @property
    def pc(self) -> float:
        return 1.0 / (self.d - 1)

    @property
    def mean_offspring(self) -> float:
        return (self.d - 1) * self.p


# --- growth ---------------------------------------------------------------------

def tree_sphere_mean(model: TreeModel, r: int) -> float:
    r = int(r)  # numpy integers would wrap in the power below
    if r < 0:
        raise ValidationError("radius must be non-negative")
    if r == 0:
        return 1.0
    return model.d * (model.d - 1) ** (r - 1) * model.p ** r


def tree_sphere_means(model: TreeModel, r_max: int) -> np.ndarray:
    return np.array([tree_sphere_mean(model, r) for r in range(r_max + 1)])


def tree_ball_mean(model: TreeModel, r: int) -> float:
    return float(tree_sphere_means(model, r).sum())


def tree_gamma(model: TreeModel) -> float:
    """Exponential growth rate; zero at and below p_c."""
    m = model.mean_offspring
    return math.log(m) if m > 1.0 else 0.0


# --- survival ---------------------------------------------------------------------

def extinction_fixed_point(model: TreeModel) -> tuple[float, float]:
    """``(q, theta_root)``: subtree extinction probability and root survival.

    q is the smallest fixed point of ``f(q) = (1 - p + p q)^(d - 1)``, reached
    by iterating f from 0 and polishing with Newton steps.
    """
    d, p = model.d, model.p
    if model.mean_offspring <= 1.0:
        return 1.0, 0.0
    if p >= 1.0:
        return 0.0, 1.0

    def f(x):
        return (1.0 - p + p * x) ** (d - 1)

    q = 0.0
    for _ in range(200_000):
        nxt = f(q)
        if abs(nxt - q) < EXTINCTION_TOL * 1e-2:
            q = nxt
            break
        q = nxt
    for _ in range(50):
        g = f(q) - q
        dg = (d - 1) * p * (1.0 - p + p * q) ** (d - 2) - 1.0
        step = g / dg
        q -= step
        if abs(step) < 1e-16:
            break
    theta = 1.0 - (1.0 - p + p * q) ** d
    return q, theta


def survival_probability(model: TreeModel) -> float:
    return extinction_fixed_point(model)[1]


def finite_horizon_q(model: TreeModel, horizon: int) -> np.ndarray:
    """``q[m]``: probability a non-root vertex has no descendant m levels below."""
    d, p = model.d, model.p
    q = np.zeros(horizon + 1)
    for m in range(1, horizon + 1):
        q[m] = (1.0 - p + p * q[m - 1]) ** (d - 1)
    return q


def horizon_survival(model: TreeModel, R: int) -> float:
    """``P(Z_R > 0)``: the root reaches intrinsic distance R."""
    if R == 0:
        return 1.0
    q = finite_horizon_q(model, R - 1)[R - 1]
    return 1.0 - (1.0 - model.p + model.p * q) ** model.d


def _sphere_mean_weighted(model: TreeModel, r: int, s: float) -> float:
    """``E[Z_r s^{Z_r}]`` by differentiating the generation pgf at s."""
    d, p = model.d, model.p
    if r == 0:
        return s
    x = s
    deriv = 1.0
    for _ in range(r - 1):
        deriv *= (d - 1) * p * (1.0 - p + p * x) ** (d - 2)
        x = (1.0 - p + p * x) ** (d - 1)
    deriv *= d * p * (1.0 - p + p * x) ** (d - 1)
    return s * deriv


def conditional_sphere_mean(model: TreeModel, r: int, horizon: int | None = None) -> float:
    """``E[Z_r | survival]`` where survival is ``Z_horizon > 0`` (or infinite if None).

    Uses ``E[Z_r 1{alive}] = E Z_r - E[Z_r q^{Z_r}]`` with q the extinction
    probability of a depth-r vertex's line over the remaining horizon.
    """
    if horizon is None:
        q, theta = extinction_fixed_point(model)
        if theta <= 0.0:
            raise ValidationError("conditioning on survival needs p > p_c")
    else:
        theta = horizon_survival(model, horizon)
        if theta <= 0.0:
            raise ValidationError("the survival event has probability zero")
        if r >= horizon:
            return tree_sphere_mean(model, r) / theta
        q = finite_horizon_q(model, horizon - r)[horizon - r]
    if r == 0:
        return 1.0
    joint = tree_sphere_mean(model, r) - _sphere_mean_weighted(model, r, q)
    return joint / theta


def conditional_ball_means(model: TreeModel, r_max: int, horizon: int | None = None) -> np.ndarray:
    return np.cumsum([conditional_sphere_mean(model, r, horizon) for r in range(r_max + 1)])


# --- generating function -----------------------------------------------------------

def alpha_p(model: TreeModel) -> float:
    m = model.mean_offspring
    return math.inf if m == 0 else 1.0 / m


def tree_genfun(model: TreeModel, alpha: float) -> float:
    """``sum_r alpha^r E[#dB(r)]``; ``inf`` when the series diverges."""
    if alpha < 0:
        raise ValidationError("alpha must be non-negative")
    x = model.mean_offspring * alpha
    if x >= 1.0:
        return math.inf
    return 1.0 + model.d * model.p * alpha / (1.0 - x)


def tree_genfun_derivative(model: TreeModel, alpha: float) -> float:
    x = model.mean_offspring * alpha
    if x >= 1.0:
        return math.inf
    return model.d * model.p / (1.0 - x) ** 2


def genfun_blowup_limit(model: TreeModel) -> float:
    """``lim (alpha_p - alpha) G(alpha)`` as alpha increases to alpha_p."""
    if model.p == 0:
        return 0.0
    return model.d * alpha_p(model) / (model.d - 1)


def tauberian_bound(model: TreeModel, r: int, alpha: float) -> float:
    """Right side ``Gr(r // 2) + 4 G(alpha)^2 alpha^-r / (r^2 (1 - alpha))``."""
    g = tree_genfun(model, alpha)
    return tree_ball_mean(model, r // 2) + 4.0 * g * g / (r * r * (1.0 - alpha)) * alpha ** (-r)


# --- cluster sizes -----------------------------------------------------------------

def susceptibility(model: TreeModel) -> float:
    m = model.mean_offspring
    if m >= 1.0:
        return math.inf
    return 1.0 + model.d * model.p / (1.0 - m)


def total_progeny_logpmf(model: TreeModel, n_max: int) -> np.ndarray:
    """``log P(|K| = n)`` for n = 0..n_max (entry 0 is -inf).

    Root with k open edges, then k independent subtrees of total size n - 1;
    the hitting-time identity gives
    ``P(T_1 + ... + T_k = m) = (k / m) P(Bin(m (d - 1), p) = m - k)``.
    """
    if not 1 <= n_max <= 10**6:
        raise ValidationError("n_max must lie in [1, 10^6]")
    d, p = model.d, model.p
    out = np.full(n_max + 1, -np.inf)
    if p == 0.0:
        out[1] = 0.0
        return out
    if p == 1.0:
        return out
    out[1] = d * math.log1p(-p)
    m = np.arange(1, n_max)  # m = n - 1 >= 1
    terms = []
    for k in range(1, d + 1):
        log_root = (math.log(math.comb(d, k)) + k * math.log(p) + (d - k) * math.log1p(-p))
        lb = binom.logpmf(m - k, m * (d - 1), p)
        terms.append(log_root + np.log(k) - np.log(m) + lb)
    out[2:] = logsumexp(np.vstack(terms), axis=0)
    return out


def total_progeny_pmf(model: TreeModel, n_max: int) -> tuple[np.ndarray, bool]:
    """``(pmf, underflow)`` with ``pmf[n] = P(|K| = n)``; underflowed entries are 0."""
    logpmf = total_progeny_logpmf(model, n_max)
    pmf = np.exp(logpmf)
    underflow = bool(np.any((pmf == 0.0) & np.isfinite(logpmf)))
    return pmf, underflow


def total_progeny_pmf_convolution(model: TreeModel, n_max: int) -> np.ndarray:
    """Same pmf by convolving subtree-size laws; O(n_max^2), for cross-checks.

    The subtree size law u solves ``u = x (1 - p + p u)^(d - 1)`` as a power
    series, found by fixed-point iteration on truncated coefficients.
    """
    d, p = model.d, model.p
    u = np.zeros(n_max + 1)
    u[1] = 1.0
    for _ in range(n_max):
        inner = np.zeros(n_max + 1)
        inner[0] = 1.0 - p
        inner += p * u
        power = np.zeros(n_max + 1)
        power[0] = 1.0
        for _ in range(d - 1):
            power = np.convolve(power, inner)[: n_max + 1]
        new = np.zeros(n_max + 1)
        new[1:] = power[:n_max]
        if np.allclose(new, u, rtol=0, atol=1e-300):
            break
        u = new
    inner = np.zeros(n_max + 1)
    inner[0] = 1.0 - p
    inner += p * u
    power = np.zeros(n_max + 1)
    power[0] = 1.0
    for _ in range(d):
        power = np.convolve(power, inner)[: n_max + 1]
    pmf = np.zeros(n_max + 1)
    pmf[1:] = power[:n_max]
    return pmf


def finite_tail_log(model: TreeModel, sizes, n_max: int | None = None) -> np.ndarray:
    """``log P(n <= |K| < inf)`` at each n in ``sizes``.

    The tail is summed from the pmf up to ``n_max`` (default 16 max(sizes));
    the remainder decays geometrically and is negligible there.
    """
    sizes = np.asarray(sizes, dtype=int)
    n_max = int(16 * sizes.max()) if n_max is None else n_max
    logpmf = total_progeny_logpmf(model, n_max)
    rev = np.logaddexp.accumulate(logpmf[::-1])[::-1]
    return rev[sizes]


def zeta_reference_slope(model: TreeModel, size_grid) -> float:
    """``-slope`` of the log finite tail over the upper half of ``size_grid``."""
    grid = np.sort(np.asarray(size_grid, dtype=int))
    upper = grid[len(grid) // 2:]
    y = finite_tail_log(model, upper)
    return -float(np.polyfit(upper, y, 1)[0])


def zeta_asymptotic(model: TreeModel) -> float:
    """Exact decay rate of ``P(|K| = n)``, ``-log min_s f(s) / s`` for the
    subtree offspring pgf f, via the saddle point of the hitting-time formula."""
    d, p = model.d, model.p
    if p in (0.0, 1.0):
        return math.inf
    # minimise (1 - p + p s)^(d - 1) / s over s > 0
    s = (1.0 - p) / ((d - 2) * p)
    return -((d - 1) * math.log(1.0 - p + p * s) - math.log(s))


# --- brute force ---------------------------------------------------------------------

BRUTE_FORCE_MAX_EDGES = 22


def brute_force_ball_expectation(family: GraphFamily, p, r: int) -> Fraction:
    """Exact ``E[#B_int(v, r)]`` by summing over every configuration of the
    edges an open path of length <= r from the root can use.

    ``p`` is converted with ``Fraction(str(p))`` so decimal inputs stay exact.
    Reachability is computed for all configurations at once by r rounds of
    Bellman-Ford relaxation; no path-uniqueness is assumed.
    """
    if not 0 <= r <= 3:
        raise ValidationError("brute force is limited to r <= 3")
    pf = Fraction(str(p)) if not isinstance(p, Fraction) else p
    if not 0 <= pf <= 1:
        raise ValidationError("p must lie in [0, 1]")
    if r == 0:
        return Fraction(1)
    root = family.root()
    inner = family.ball_enumerate(root, r - 1)
    inner_keys = {v.serialize() for v in inner}
    edges = sorted({family.edge_string(x, y) for x in inner_keys for y in family.neighbor_keys(x)})
    if len(edges) > BRUTE_FORCE_MAX_EDGES:
        raise ValidationError(f"{len(edges)} relevant edges exceed the brute-force limit")
    verts = sorted({k for e in edges for k in e.split("~")} | {root.serialize()})
    index = {k: i for i, k in enumerate(verts)}
    pairs = [tuple(index[k] for k in e.split("~")) for e in edges]
    n_e = len(edges)
    counts = np.zeros((n_e + 1, len(verts) + 1), dtype=np.int64)
    chunk = 1 << 18
    for start in range(0, 1 << n_e, chunk):
        cfg = np.arange(start, min(start + chunk, 1 << n_e), dtype=np.int64)
        bits = ((cfg[:, None] >> np.arange(n_e)) & 1).astype(bool)
        reached = np.zeros((cfg.size, len(verts)), dtype=bool)
        reached[:, index[root.serialize()]] = True
        for _ in range(r):
            nxt = reached.copy()
            for j, (a, b) in enumerate(pairs):
                nxt[:, b] |= reached[:, a] & bits[:, j]
                nxt[:, a] |= reached[:, b] & bits[:, j]
            reached = nxt
        n_open = bits.sum(axis=1)
        n_reached = reached.sum(axis=1)
        np.add.at(counts, (n_open, n_reached), 1)
    total = Fraction(0)
    for k in range(n_e + 1):
        w = pf ** k * (1 - pf) ** (n_e - k)
        row = counts[k]
        total += w * int((row * np.arange(row.size)).sum())
    return total


def tree_ball_mean_exact(d: int, p, r: int) -> Fraction:
    """Closed form ``1 + sum_{k<=r} d (d-1)^(k-1) p^k`` in rational arithmetic."""
    pf = Fraction(str(p)) if not isinstance(p, Fraction) else p
    return 1 + sum(d * (d - 1) ** (k - 1) * pf ** k for k in range(1, r + 1))


# --- reports -------------------------------------------------------------------------

@dataclass
class OracleReport:
    d: int
    p: float
    p_c: float
    gamma: float
    theta_root: float
    extinction_q: float
    chi: float
    alpha_p: float
    genfun: str
    progeny_pmf: list = field(default_factory=list)

    def to_json(self) -> str:
        def fix(x):
            return str(x) if isinstance(x, float) and not math.isfinite(x) else x
        return json.dumps({k: fix(v) for k, v in asdict(self).items()}, sort_keys=True)


def oracle_report(model: TreeModel, n_max: int = 0) -> OracleReport:
    q, theta = extinction_fixed_point(model)
    pmf = total_progeny_pmf(model, n_max)[0][1:].tolist() if n_max > 0 else []
    return OracleReport(
        d=model.d, p=model.p, p_c=model.pc, gamma=tree_gamma(model), theta_root=theta,
        extinction_q=q, chi=susceptibility(model), alpha_p=alpha_p(model),
        genfun=f"1 + {model.d}*p*a/(1 - {model.d - 1}*p*a)", progeny_pmf=pmf)


def require_tree(family: GraphFamily) -> RegularTree:
    if not isinstance(family, RegularTree):
        raise ValidationError("this oracle is only available for regular trees")
    return family

