"""Monte Carlo generating function ``G(p, alpha) = sum_r alpha^r E[#dB(r)]``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import DivergenceError, ValidationError
from ..explore import ClusterSample
from ..graphs import GraphFamily
from .growth import rate_fit, table_from_sample
from .sampling import sample_clusters

DIFF_STEP_FRACTION = 25


@dataclass(frozen=True)
class GenFunEval:
    p: float
    alpha: float
    value_hat: float
    se: float
    tail_bound: float
    r_trunc: int
    gamma_hat: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _per_sample(sample: ClusterSample, alpha: float, r_trunc: int, deriv: int = 0) -> np.ndarray:
    z = sample.spheres[sample.valid, : r_trunc + 1].astype(float)
    r = np.arange(r_trunc + 1, dtype=float)
    if deriv == 0:
        w = alpha ** r
    else:
        w = np.zeros_like(r)
        w[1:] = r[1:] * alpha ** (r[1:] - 1)
    return z @ w


def _mean_se(x: np.ndarray):
    return float(x.mean()), (float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0)


def fitted_gamma(sample: ClusterSample) -> float:
    return rate_fit(table_from_sample(sample), family=sample.family).gamma_hat


def genfun_from_sample(sample: ClusterSample, alpha: float, r_trunc: int | None = None,
                       gamma_hat: float | None = None) -> GenFunEval:
    """Truncated sum with its geometric tail bound.

    Raises DivergenceError when ``alpha e^gamma_hat >= 1``.
    """
    if alpha < 0:
        raise ValidationError("alpha must be non-negative")
    r_trunc = sample.r_max if r_trunc is None else r_trunc
    if r_trunc > sample.r_max:
        raise ValidationError("r_trunc exceeds the sampled radius")
    if alpha == 0.0 or sample.p == 0.0:
        return GenFunEval(sample.p, alpha, 1.0, 0.0, 0.0, r_trunc, 0.0)
    if gamma_hat is None:
        gamma_hat = fitted_gamma(sample)
    g = math.exp(gamma_hat)
    if alpha * g >= 1.0:
        raise DivergenceError(f"alpha={alpha} is at or beyond the estimated radius of "
                              f"convergence {math.exp(-gamma_hat):.6g}",
                              alpha_p=math.exp(-gamma_hat))
    value, se = _mean_se(_per_sample(sample, alpha, r_trunc))
    last = float(sample.spheres[sample.valid, r_trunc].mean())
    tail = alpha ** (r_trunc + 1) * last * g / (1.0 - alpha * g)
    return GenFunEval(sample.p, alpha, value, se, tail, r_trunc, gamma_hat)


def genfun_eval(family: GraphFamily, p: float, alpha: float, n_samples: int, r_trunc: int,
                seed: int, engine: str = "auto", threads: int = 1) -> GenFunEval:
    sample = sample_clusters(family, p, r_trunc, n_samples, seed, None, engine, threads)
    return genfun_from_sample(sample, alpha, r_trunc)


@dataclass
class BlowupResult:
    p: float
    alpha_p_hat: float
    alphas: list
    products: list
    product_se: list
    evals: list
    ratio: float
    alpha_div_hat: float

    def as_dict(self) -> dict:
        return {"p": self.p, "alpha_p_hat": self.alpha_p_hat, "alphas": self.alphas,
                "products": self.products, "product_se": self.product_se,
                "max_min_ratio": self.ratio, "alpha_divergence_hat": self.alpha_div_hat,
                "values": [e.value_hat for e in self.evals],
                "value_se": [e.se for e in self.evals],
                "tail_bounds": [e.tail_bound for e in self.evals]}


def genfun_blowup_from_sample(sample: ClusterSample, alpha_fracs=None, alphas=None,
                              gamma_hat: float | None = None) -> BlowupResult:
    """Products ``(alpha_p_hat - alpha) G_hat(alpha)`` as alpha increases to alpha_p_hat.

    Give either absolute ``alphas`` or ``alpha_fracs`` (fractions of
    alpha_p_hat = e^-gamma_hat). The divergence location is also located
    independently by extrapolating ``1 / G_hat`` linearly through the two
    largest alphas to zero.
    """
    if gamma_hat is None:
        gamma_hat = fitted_gamma(sample)
    ap = math.exp(-gamma_hat)
    if alphas is None:
        if alpha_fracs is None:
            raise ValidationError("give alphas or alpha_fracs")
        alphas = [f * ap for f in alpha_fracs]
    alphas = [float(a) for a in alphas]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValidationError("alphas must be strictly increasing")
    evals = [genfun_from_sample(sample, a, gamma_hat=gamma_hat) for a in alphas]
    prods = [(ap - e.alpha) * e.value_hat for e in evals]
    pses = [(ap - e.alpha) * e.se for e in evals]
    ratio = max(prods) / min(prods) if min(prods) > 0 else math.inf
    if len(evals) >= 2:
        (a1, g1), (a2, g2) = [(e.alpha, 1.0 / e.value_hat) for e in evals[-2:]]
        slope = (g2 - g1) / (a2 - a1)
        alpha_div = a2 - g2 / slope if slope < 0 else math.inf
    else:
        alpha_div = math.nan
    return BlowupResult(sample.p, ap, alphas, prods, pses, evals, ratio, alpha_div)


def genfun_blowup_experiment(family: GraphFamily, p: float, alpha_fracs, n_samples: int,
                             r_trunc: int, seed: int, engine: str = "auto",
                             threads: int = 1) -> BlowupResult:
    sample = sample_clusters(family, p, r_trunc, n_samples, seed, None, engine, threads)
    return genfun_blowup_from_sample(sample, alpha_fracs=alpha_fracs)


# --- Tauberian bound ---------------------------------------------------------------------

@dataclass(frozen=True)
class TauberianRow:
    r: int
    alpha: float
    measured: float
    measured_se: float
    bound: float
    genfun: float
    holds: bool


def tauberian_from_sample(sample: ClusterSample, r_list, gamma_hat: float | None = None,
                          n_sigma: float = 3.0) -> list[TauberianRow]:
    """``Gr(r) <= Gr(r // 2) + 4 G(alpha)^2 alpha^-r / (r^2 (1 - alpha))`` with
    ``alpha = r alpha_p_hat / (r + 1)``.

    G is the truncated estimate, which can only understate the true value, so
    the evaluated bound is conservative.
    """
    if gamma_hat is None:
        gamma_hat = fitted_gamma(sample)
    ap = math.exp(-gamma_hat)
    table = table_from_sample(sample)
    rows = []
    for r in r_list:
        r = int(r)
        if not 1 <= r <= sample.r_max:
            raise ValidationError(f"radius {r} outside the sampled range")
        alpha = r * ap / (r + 1)
        if alpha >= 1.0:
            raise DivergenceError("alpha_p estimate is not below 1", alpha_p=ap)
        g = genfun_from_sample(sample, alpha, gamma_hat=gamma_hat).value_hat
        bound = table.mean_ball[r // 2] + 4.0 * g * g / (r * r * (1.0 - alpha)) * alpha ** (-r)
        meas, se = float(table.mean_ball[r]), float(table.se_ball[r])
        rows.append(TauberianRow(r, alpha, meas, se, float(bound), g,
                                 bool(meas - n_sigma * se <= bound)))
    return rows


def tauberian_bound_check(family: GraphFamily, p: float, r_list, n_samples: int, seed: int,
                          r_trunc: int | None = None, engine: str = "auto",
                          threads: int = 1) -> list[TauberianRow]:
    if family.pc is not None and p <= family.pc:
        raise ValidationError("the Tauberian check needs p > p_c")
    r_trunc = r_trunc if r_trunc is not None else 4 * max(r_list)
    sample = sample_clusters(family, p, r_trunc, n_samples, seed, None, engine, threads)
    return tauberian_from_sample(sample, r_list)


# --- differential inequality --------------------------------------------------------------

@dataclass(frozen=True)
class DiffIneqRow:
    alpha: float
    genfun: float
    deriv_fd: float
    deriv_series: float
    deriv_se: float
    diff_se: float
    eta_hat: float
    agree: bool


def diffineq_from_sample(sample: ClusterSample, alpha_grid, gamma_hat: float | None = None,
                         rel_tol: float = 0.01, n_sigma: float = 3.0) -> list[DiffIneqRow]:
    """Derivative of G two ways (centred difference and the term-wise series)
    and ``eta_hat = dG / G^2`` along ``alpha_grid``.

    The step is ``h = (alpha_p_hat - alpha) / 25``; for ``alpha < h`` a
    second-order forward stencil replaces the centred one.
    """
    if gamma_hat is None:
        gamma_hat = fitted_gamma(sample)
    ap = math.exp(-gamma_hat)
    rows = []
    R = sample.r_max
    for a in alpha_grid:
        a = float(a)
        if not 0.0 <= a < ap:
            raise DivergenceError(f"alpha={a} is not below alpha_p_hat={ap:.6g}", alpha_p=ap)
        h = (ap - a) / DIFF_STEP_FRACTION
        g0 = _per_sample(sample, a, R)
        series = _per_sample(sample, a, R, deriv=1)
        if a < h:
            # second-order one-sided stencil where a centred step would cross 0
            fd = (-3.0 * g0 + 4.0 * _per_sample(sample, a + h, R)
                  - _per_sample(sample, a + 2 * h, R)) / (2 * h)
        else:
            fd = (_per_sample(sample, a + h, R) - _per_sample(sample, a - h, R)) / (2 * h)
        g, _ = _mean_se(g0)
        d_series, d_se = _mean_se(series)
        d_fd, _ = _mean_se(fd)
        _, diff_se = _mean_se(fd - series)
        agree = abs(d_fd - d_series) <= rel_tol * abs(d_series) + n_sigma * diff_se
        rows.append(DiffIneqRow(a, g, d_fd, d_series, d_se, diff_se, d_series / g ** 2,
                                bool(agree)))
    return rows


def differential_inequality_check(family: GraphFamily, p: float, alpha_grid, n_samples: int,
                                  r_trunc: int, seed: int, engine: str = "auto",
                                  threads: int = 1) -> list[DiffIneqRow]:
    sample = sample_clusters(family, p, r_trunc, n_samples, seed, None, engine, threads)
    return diffineq_from_sample(sample, alpha_grid)


def alpha_p_from_rate(gamma_hat: float) -> float:
    return math.exp(-gamma_hat)

