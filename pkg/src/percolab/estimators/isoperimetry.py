"""Finite-cluster tails, hull isoperimetry and the Cheeger-constant bounds."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .. import ValidationError
from ..explore import DEFAULT_VERTEX_CAP, cluster_transcript, hull_profile, map_samples
from ..graphs import GraphFamily
from ..gw import sample_cluster_sizes_gw, sample_hulls_gw
from ..sampler import EdgeConfig
from .growth import linear_fit
from .sampling import default_R_inf, resolve_engine

DEFAULT_SIZE_GRID = (16, 32, 64, 128, 256)
BISECTION_TOL = 1e-6


# --- zeta ----------------------------------------------------------------------------

@dataclass
class ZetaEstimate:
    p: float
    p_tilt: float
    zeta_hat: float
    stderr: float
    size_grid: list
    tail_hat: list
    tail_se: list
    n_samples: int
    n_censored: int
    cap: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _bfs_transcript(family, p_tilt, cap, seed, center_key, i):
    cfg = EdgeConfig.make(seed, i, p_tilt)
    return cluster_transcript(family, cfg, family.code(center_key), cap)


def cluster_size_sample(family: GraphFamily, p_tilt: float, n_samples: int, cap: int,
                        seed: int, engine: str = "auto", threads: int = 1):
    """``(sizes, n_open, n_closed, censored)`` arrays for clusters explored at p_tilt."""
    engine = resolve_engine(family, engine)
    if engine == "gw":
        return sample_cluster_sizes_gw(family, p_tilt, n_samples, cap, seed, threads)
    func = partial(_bfs_transcript, family, p_tilt, cap, seed, family.root().serialize())
    res = map_samples(func, range(n_samples), threads)
    arr = np.array(res, dtype=np.int64).reshape(n_samples, 4)
    return arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3].astype(bool)


def zeta_estimate(family: GraphFamily, p: float, size_grid=DEFAULT_SIZE_GRID,
                  n_samples: int = 100_000, cap: int | None = None, seed: int = 0,
                  p_tilt: float | None = None, engine: str = "auto",
                  threads: int = 1) -> ZetaEstimate:
    """Decay rate of ``P(n <= |K| < inf)`` from a regression over the upper half
    of ``size_grid``.

    Clusters are explored at ``p_tilt`` (default p_c, where the size tail is a
    power law) and reweighted by ``(p/p')^open ((1-p)/(1-p'))^closed`` over the
    edges each exploration read, which is the exact likelihood ratio of the
    transcript. With ``p_tilt == p`` this is plain Monte Carlo. Clusters
    reaching ``cap`` are censored and treated as infinite.
    """
    grid = np.sort(np.asarray(size_grid, dtype=int))
    if grid.size < 2 or grid[0] < 1:
        raise ValidationError("size_grid needs at least two positive sizes")
    cap = 4 * int(grid[-1]) + 1 if cap is None else int(cap)
    if cap <= 4 * grid[-1]:
        raise ValidationError("cap must exceed 4 * max(size_grid)")
    if p_tilt is None:
        p_tilt = family.pc if family.pc is not None else p
    if p_tilt <= 0.0 or p_tilt >= 1.0:
        raise ValidationError("the exploration parameter must lie in (0, 1)")
    if p <= 0.0 or p >= 1.0:
        raise ValidationError("all clusters have a single size at p in {0, 1}; "
                              "the tail slope is undefined")
    sizes, n_open, n_closed, censored = cluster_size_sample(family, p_tilt, n_samples, cap,
                                                            seed, engine, threads)
    logw = (n_open * math.log(p / p_tilt)
            + n_closed * math.log((1.0 - p) / (1.0 - p_tilt)))
    w = np.where(censored, 0.0, np.exp(logw))
    tails, ses = [], []
    for n in grid:
        x = w * (sizes >= n)
        tails.append(float(x.mean()))
        ses.append(float(x.std(ddof=1) / math.sqrt(x.size)))
    tails_a = np.array(tails)
    if np.any(tails_a <= 0.0):
        raise ValidationError("no finite cluster reached some grid size; "
                              "the tail is not estimable on this grid")
    upper = slice(grid.size // 2, None)
    slope, _, se = linear_fit(grid[upper], np.log(tails_a[upper]),
                              np.array(ses)[upper] / tails_a[upper])
    return ZetaEstimate(p, p_tilt, -slope, se, grid.tolist(), tails, ses, n_samples,
                        int(censored.sum()), cap)


# --- Cheeger bounds ------------------------------------------------------------------

def bs_formula(phi: float, p: float) -> float:
    """``phi log(phi / (1-p)) + (1 - phi) log(phi / p)`` for phi in (0, 1)."""
    if not 0.0 < phi < 1.0:
        raise ValidationError("phi must lie in (0, 1)")
    return phi * math.log(phi / (1.0 - p)) + (1.0 - phi) * math.log(phi / p)


def _alpha_condition(alpha: float, p: float, zeta: float) -> float:
    """``log(alpha^-alpha (1-alpha)^-(1-alpha) (p/(1-p))^alpha) - zeta``."""
    ent = 0.0
    if 0.0 < alpha < 1.0:
        ent = -alpha * math.log(alpha) - (1.0 - alpha) * math.log(1.0 - alpha)
    return ent + alpha * math.log(p / (1.0 - p)) - zeta


def cheeger_lower(p: float, zeta: float) -> float:
    """Half the supremum of alpha in [0, p] with ``alpha^-alpha (1-alpha)^-(1-alpha)
    (p/(1-p))^alpha < e^zeta``; 0 when zeta <= 0.

    The left side is increasing on [0, p] (its log-derivative is
    ``log((1-alpha)/alpha) + log(p/(1-p)) >= 0`` there), so the admissible set
    is an interval and bisection to 1e-6 finds its end.
    """
    if zeta <= 0.0 or not 0.0 < p < 1.0:
        return 0.0
    if _alpha_condition(p, p, zeta) < 0.0:
        return 0.5 * p
    lo, hi = 0.0, p
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if _alpha_condition(mid, p, zeta) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * lo


# --- hulls ---------------------------------------------------------------------------

@dataclass
class HullProfile:
    p: float
    R_inf: int
    radii: list
    mean_ratio: list
    se_ratio: list
    n_survivors: int
    n_samples: int
    engine: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _bfs_hulls(family, p, i_list, R_inf, cap, seed, center_key, i):
    cfg = EdgeConfig.make(seed, i, p)
    res = hull_profile(family, cfg, family.code(center_key), i_list, R_inf, cap)
    return [(h.hull_size, h.open_boundary, h.survived, h.truncated) for h in res]


def hull_ratio_profile(family: GraphFamily, p: float, i_list, n_samples: int, seed: int,
                       R_inf: int | None = None, engine: str = "auto", threads: int = 1,
                       vertex_cap: int = DEFAULT_VERTEX_CAP) -> HullProfile:
    """Mean of ``|dE^open Hull(v, i)| / |Hull(v, i)|`` over proxy survivors."""
    i_list = sorted(int(i) for i in i_list)
    R_inf = default_R_inf(family, p) if R_inf is None else R_inf
    if not i_list or i_list[0] < 0 or i_list[-1] > R_inf - 2:
        raise ValidationError("hull radii must lie in [0, R_inf - 2]")
    engine = resolve_engine(family, engine)
    if engine == "gw":
        res = sample_hulls_gw(family, p, R_inf, n_samples, seed, i_list[-1], threads)
        surv = res["survived"]
        idx = np.asarray(i_list)
        ratios = res["open_boundary"][surv][:, idx] / res["hull_sizes"][surv][:, idx]
    else:
        func = partial(_bfs_hulls, family, p, i_list, R_inf, vertex_cap, seed,
                       family.root().serialize())
        out = np.array(map_samples(func, range(n_samples), threads), dtype=float)
        surv = (out[:, 0, 2] > 0) & (out[:, 0, 3] == 0)
        ratios = out[surv][:, :, 1] / out[surv][:, :, 0]
    n_surv = int(surv.sum())
    if n_surv == 0:
        mean = se = np.full(len(i_list), np.nan)
    else:
        mean = ratios.mean(axis=0)
        se = ratios.std(axis=0, ddof=1) / math.sqrt(n_surv) if n_surv > 1 else np.zeros_like(mean)
    return HullProfile(p, R_inf, i_list, mean.tolist(), se.tolist(), n_surv, n_samples, engine)


def default_hull_radii(family: GraphFamily, p: float, R_inf: int) -> list:
    """Radii 1 .. R_inf // 2: deep enough to leave the critical window, short
    enough that the frontier at R_inf still separates hull from infinity."""
    return list(range(1, R_inf // 2 + 1))


@dataclass
class IsoperimetryReport:
    p: float
    hull_ratio_profile: list
    zeta_hat: float
    cheeger_lower: float
    cheeger_upper_proxy: float
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"p": self.p, "hull_ratio_profile": self.hull_ratio_profile,
                "zeta_hat": self.zeta_hat, "cheeger_lower": self.cheeger_lower,
                "cheeger_upper_proxy": self.cheeger_upper_proxy, **self.extra}


def cheeger_bounds(p: float, zeta_hat: float, profile: HullProfile | None) -> IsoperimetryReport:
    lower = cheeger_lower(p, zeta_hat)
    if profile is None or profile.n_survivors == 0:
        pairs, upper = [], math.nan
    else:
        pairs = list(zip(profile.radii, profile.mean_ratio))
        upper = float(np.nanmin(profile.mean_ratio))
    return IsoperimetryReport(p, pairs, zeta_hat, lower, upper)


def cheeger_exponent(p_list, uppers, p_c: float):
    """Slope of log(upper proxy) against log(p - p_c), with its stderr."""
    x = np.log(np.asarray(p_list, float) - p_c)
    y = np.log(np.asarray(uppers, float))
    slope, _, se = linear_fit(x, y)
    return slope, se
