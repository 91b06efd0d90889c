"""Growth tables, growth-rate fits and the experiments built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .. import ExperimentError, ValidationError
from ..explore import DEFAULT_VERTEX_CAP, ClusterSample
from ..graphs import GraphFamily
from .sampling import default_R_inf, sample_clusters


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return "" if math.isnan(x) else repr(float(x))
    return str(x)


@dataclass
class GrowthTable:
    """Sample means of sphere and ball sizes with standard errors.

    ``mean_ball_conditional`` averages over survival-proxy survivors only and
    is NaN where there are none.
    """

    p: float
    radii: np.ndarray
    mean_sphere: np.ndarray
    mean_ball: np.ndarray
    mean_ball_conditional: np.ndarray
    se_sphere: np.ndarray
    se_ball: np.ndarray
    se_ball_conditional: np.ndarray
    n_samples: int
    n_survivors: int | None = None
    n_truncated: int = 0
    R_inf: int | None = None
    seed: int | None = None
    engine: str = ""
    family: str = ""

    CSV_HEADER = ("r", "mean_sphere", "se_sphere", "mean_ball", "se_ball",
                  "mean_ball_conditional", "se_ball_conditional")

    def index(self, r: int) -> int:
        hits = np.flatnonzero(self.radii == r)
        if hits.size == 0:
            raise ValidationError(f"radius {r} not in table")
        return int(hits[0])

    def csv_rows(self):
        for i, r in enumerate(self.radii):
            yield tuple(_fmt(x) for x in (
                int(r), self.mean_sphere[i], self.se_sphere[i], self.mean_ball[i],
                self.se_ball[i], self.mean_ball_conditional[i], self.se_ball_conditional[i]))

    def summary(self) -> dict:
        return {"p": self.p, "n_samples": self.n_samples, "n_survivors": self.n_survivors,
                "n_truncated": self.n_truncated, "R_inf": self.R_inf, "seed": self.seed,
                "engine": self.engine, "family": self.family}


def _mean_se(x: np.ndarray):
    n = x.shape[0]
    if n == 0:
        nan = np.full(x.shape[1:], np.nan)
        return nan, nan
    mean = x.mean(axis=0)
    se = x.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(x.shape[1:])
    return mean, se


def table_from_sample(sample: ClusterSample, radii=None) -> GrowthTable:
    radii = np.arange(sample.r_max + 1) if radii is None else np.asarray(radii, dtype=int)
    if radii.size == 0 or np.any(np.diff(radii) <= 0) or radii[0] < 0:
        raise ValidationError("radii must be a non-empty ascending list of non-negative integers")
    if radii[-1] > sample.r_max:
        raise ValidationError("radii exceed the sampled r_max")
    valid = sample.valid
    spheres = sample.spheres[valid].astype(float)
    balls = np.cumsum(spheres, axis=1)
    ms, ss = _mean_se(spheres[:, radii])
    mb, sb = _mean_se(balls[:, radii])
    n_surv = None
    if sample.survived is not None:
        surv = sample.survived[valid]
        n_surv = int(surv.sum())
        mc, sc = _mean_se(balls[surv][:, radii])
    else:
        mc = sc = np.full(radii.size, np.nan)
    return GrowthTable(sample.p, radii, ms, mb, mc, ss, sb, sc, int(valid.sum()), n_surv,
                       int((~valid).sum()), sample.R_inf, sample.seed, sample.engine,
                       getattr(sample.family, "descriptor", ""))


def growth_table(family: GraphFamily, p: float, radii, n_samples: int, seed: int,
                 R_inf: int | None = None, engine: str = "auto", threads: int = 1,
                 vertex_cap: int = DEFAULT_VERTEX_CAP) -> GrowthTable:
    """Monte Carlo estimates of E[#dB(r)], E[#B(r)] and E[#B(r) | survival proxy].

    Truncated (capped) samples are dropped; the resulting downward bias of the
    mean ball is at most ``vertex_cap * P(cap hit)``.
    """
    radii = np.asarray(list(radii), dtype=int)
    if radii.size == 0:
        raise ValidationError("radii must be non-empty")
    if n_samples < 100:
        raise ValidationError("growth tables need at least 100 samples")
    sample = sample_clusters(family, p, int(radii.max()), n_samples, seed, R_inf, engine,
                             threads, vertex_cap)
    return table_from_sample(sample, radii)


# --- rate fits ----------------------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    gamma_hat: float
    window: tuple[int, int]
    stderr: float
    method: str
    slope: float
    intercept: float

    def as_dict(self) -> dict:
        return {"gamma_hat": self.gamma_hat, "window": list(self.window), "stderr": self.stderr,
                "method": self.method, "slope": self.slope, "intercept": self.intercept}


def default_window(family: GraphFamily | None, p: float, r_max: int) -> tuple[int, int]:
    pc = None if family is None else family.pc
    if pc is None or p <= pc:
        lo = min(8, r_max)
    else:
        lo = max(8, int(math.ceil(2.0 / (p - pc) - 1e-9)))  # guard against 20.000000000000004
    return lo, r_max


def linear_fit(x, y, se_y=None):
    """OLS slope/intercept; stderr combines residual scatter with the
    delta-method propagation of independent errors ``se_y``."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.size < 2:
        raise ValidationError("a fit needs at least two points")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean()) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    var = 0.0
    if x.size > 2:
        resid = y - (intercept + slope * x)
        var += float(resid @ resid) / (x.size - 2) / sxx
    if se_y is not None:
        w = xc / sxx
        var += float(np.sum((w * np.asarray(se_y, float)) ** 2))
    return slope, intercept, math.sqrt(var)


def rate_fit(table: GrowthTable, window=None, method: str = "sphere-slope",
             family: GraphFamily | None = None, degree: int | None = None) -> RateFit:
    """Least-squares slope of log mean sphere (or ball) against r on ``window``."""
    if window is None:
        window = default_window(family, table.p, int(table.radii[-1]))
    lo, hi = int(window[0]), int(window[1])
    mask = (table.radii >= lo) & (table.radii <= hi)
    if lo > hi or mask.sum() < 2 or lo < table.radii[0] or hi > table.radii[-1]:
        raise ValidationError(f"window {window} is not inside the table radii")
    if method == "sphere-slope":
        m, se = table.mean_sphere[mask], table.se_sphere[mask]
    elif method == "ball-slope":
        m, se = table.mean_ball[mask], table.se_ball[mask]
    else:
        raise ValidationError(f"unknown rate-fit method {method!r}")
    if np.any(~(m > 0)):
        raise ValidationError("non-positive mean in the fit window")
    slope, intercept, stderr = linear_fit(table.radii[mask], np.log(m), se / m)
    degree = degree if degree is not None else (family.degree if family is not None else None)
    cap = math.log(degree - 1) if degree else math.inf
    gamma = min(max(slope, 0.0), cap)
    return RateFit(gamma, (lo, hi), stderr, method, slope, intercept)


@dataclass
class RateScaling:
    p_c: float
    fits: list
    exponent: float
    exponent_stderr: float
    upper_bound_ok: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"p_c": self.p_c, "exponent": self.exponent,
                "exponent_stderr": self.exponent_stderr,
                "fits": [{"p": p, **f.as_dict()} for p, f in self.fits],
                "upper_bound_ok": self.upper_bound_ok}


def scaled_r_max(family: GraphFamily, p: float, r_max: int, factor: int = 4) -> int:
    """``min(r_max, factor * window_start)``: a fit window of fixed relative
    width that keeps sphere counts bounded far from p_c."""
    lo = default_window(family, p, r_max)[0]
    return min(r_max, max(factor * lo, lo + 2))


def rate_scaling_experiment(family: GraphFamily, p_list, r_max: int, n_samples: int,
                            seed: int, engine: str = "auto", threads: int = 1,
                            vertex_cap: int = DEFAULT_VERTEX_CAP, tables_out=None,
                            window_factor: int = 4) -> RateScaling:
    """Rate fits across ``p_list`` and the exponent of gamma against p - p_c.

    Each p is sampled to ``scaled_r_max`` and fitted on its default window.
    Also checks the universal bound ``gamma <= (p - p_c) / p_c`` up to three
    standard errors at every p.
    """
    pc = family.pc
    if pc is None:
        raise ValidationError("rate scaling needs a known p_c for the family")
    p_list = sorted(float(p) for p in p_list)
    if any(p < pc for p in p_list):
        raise ValidationError("every p must be at least p_c")
    fits = []
    for p in p_list:
        r_hi = scaled_r_max(family, p, r_max, window_factor)
        table = growth_table(family, p, range(r_hi + 1), n_samples, seed, None, engine,
                             threads, vertex_cap)
        if tables_out is not None:
            tables_out.append(table)
        fits.append((p, rate_fit(table, family=family)))
    ok = [bool(f.gamma_hat <= (p - pc) / pc + 3 * f.stderr) for p, f in fits]
    xs = [math.log(p - pc) for p, f in fits if p > pc and f.gamma_hat > 0]
    ys = [math.log(f.gamma_hat) for p, f in fits if p > pc and f.gamma_hat > 0]
    ses = [f.stderr / f.gamma_hat for p, f in fits if p > pc and f.gamma_hat > 0]
    if len(xs) >= 2:
        exponent, _, ex_se = linear_fit(xs, ys, ses)
    else:
        exponent, ex_se = math.nan, math.nan
    return RateScaling(pc, fits, exponent, ex_se, ok)


# --- shape of the growth near criticality --------------------------------------------------

def window_ratios(table: GrowthTable, r_hi: int) -> np.ndarray:
    """``mean_ball[r] / r`` for 1 <= r <= r_hi."""
    mask = (table.radii >= 1) & (table.radii <= r_hi)
    return table.mean_ball[mask] / table.radii[mask]


def shape_regression(entries, conditional: bool = False):
    """Pooled regression of ``log(mean_ball e^{-gamma r})`` on ``log(r ^ 1/eps)``.

    ``entries`` is a list of ``(table, gamma_hat, eps)``; each contributes the
    radii ``2 <= r <= 4 / eps``. Returns ``(slope, intercept, stderr)``.
    """
    xs, ys = [], []
    for table, gamma, eps in entries:
        r = table.radii
        mask = (r >= 2) & (r <= 4.0 / eps)
        col = table.mean_ball_conditional if conditional else table.mean_ball
        vals = col[mask]
        if np.any(~(vals > 0)):
            raise ValidationError("missing or non-positive means inside the regression range")
        xs.append(np.log(np.minimum(r[mask], 1.0 / eps)))
        ys.append(np.log(vals) - gamma * r[mask])
    return linear_fit(np.concatenate(xs), np.concatenate(ys))


def conditional_sensitivity(family: GraphFamily, p: float, r_max: int, n_samples: int,
                            seed: int, R_inf: int | None = None, engine: str = "auto",
                            threads: int = 1, vertex_cap: int = DEFAULT_VERTEX_CAP):
    """Largest relative change of conditional mean balls when R_inf doubles.

    Both conditionings use one set of samples explored to 2 R_inf, which
    couples them. Returns ``(max_rel_change, table_R, table_2R)``.
    """
    R = default_R_inf(family, p) if R_inf is None else R_inf
    sample = sample_clusters(family, p, max(r_max, 2 * R), n_samples, seed, 2 * R, engine,
                             threads, vertex_cap)
    t2 = table_from_sample(sample, range(r_max + 1))
    alive_R = sample.spheres[:, R] > 0
    s1 = ClusterSample(family, p, seed, sample.spheres, alive_R, sample.truncated, R,
                       sample.engine, sample.vertex_cap)
    t1 = table_from_sample(s1, range(r_max + 1))
    rel = np.abs(t2.mean_ball_conditional / t1.mean_ball_conditional - 1.0)
    return float(np.nanmax(rel)), t1, t2


def submultiplicativity_violations(table: GrowthTable, n_sigma: float = 3.0):
    """Pairs ``(r, l)`` with ``Gr(r + l) > Gr(r) Gr(l) + n_sigma * se``."""
    out = []
    radii = list(table.radii)
    for i, r in enumerate(radii):
        for j, l in enumerate(radii):
            if r + l not in radii:
                continue
            k = radii.index(r + l)
            lhs = table.mean_ball[k]
            rhs = table.mean_ball[i] * table.mean_ball[j]
            se = math.hypot(table.se_ball[k],
                            table.mean_ball[i] * table.se_ball[j] + table.mean_ball[j] * table.se_ball[i])
            if lhs > rhs + n_sigma * se:
                out.append((int(r), int(l)))
    return out


# --- quenched rates ----------------------------------------------------------------------

@dataclass
class KestenStigumResult:
    p: float
    r_max: int
    gamma_hat: float
    n_samples: int
    n_survivors: int
    quenched_rates: np.ndarray
    fraction_within: float
    delta: float
    min_normalized: np.ndarray

    def as_dict(self) -> dict:
        return {"p": self.p, "r_max": self.r_max, "gamma_hat": self.gamma_hat,
                "n_samples": self.n_samples, "n_survivors": self.n_survivors,
                "fraction_within": self.fraction_within, "delta": self.delta,
                "min_normalized_min": float(self.min_normalized.min()),
                "all_positive": bool(np.all(self.min_normalized > 0))}


def kesten_stigum_experiment(family: GraphFamily, p: float, r_max: int, n_samples: int,
                             seed: int, delta: float = 0.01, min_survivors: int = 0,
                             gamma_hat: float | None = None, engine: str = "auto",
                             threads: int = 1, vertex_cap: int = DEFAULT_VERTEX_CAP
                             ) -> KestenStigumResult:
    """Per-survivor quenched rates ``log|dB(r_max)| / r_max`` against gamma_hat.

    Survival means reaching r_max. If fewer than ``min_survivors`` survive, the
    sample size is scaled up once from the observed survival frequency and the
    whole run is redone at the larger size (so output depends only on inputs).
    """
    if family.pc is not None and p <= family.pc:
        raise ValidationError("the quenched-rate experiment needs p > p_c")
    sample = sample_clusters(family, p, r_max, n_samples, seed, r_max, engine, threads,
                             vertex_cap)
    surv = sample.survived & sample.valid
    if min_survivors and surv.sum() < min_survivors:
        freq = max(surv.mean(), 1.0 / n_samples)
        n_samples = int(math.ceil(1.2 * min_survivors / freq))
        sample = sample_clusters(family, p, r_max, n_samples, seed, r_max, engine, threads,
                                 vertex_cap)
        surv = sample.survived & sample.valid
    if not surv.any():
        raise ExperimentError("no sample survived to r_max")
    if gamma_hat is None:
        gamma_hat = rate_fit(table_from_sample(sample), family=family).gamma_hat
    z = sample.spheres[surv]
    rates = np.log(z[:, r_max].astype(float)) / r_max
    within = float(np.mean(np.abs(rates - gamma_hat) <= delta))
    w = np.arange(r_max // 2, r_max + 1)
    normalized = (z[:, w] * np.exp(-gamma_hat * w)).min(axis=1)
    return KestenStigumResult(p, r_max, float(gamma_hat), sample.n_samples, int(surv.sum()),
                              rates, within, delta, normalized)
