"""Experiment runners behind the command line.

Each runner takes a filled-in :class:`ExperimentConfig` and returns an
:class:`ExperimentOutput`: CSV header and rows, a results dict and named
pass/fail checks. Runners do no I/O.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import ValidationError
from .config import ExperimentConfig
from .estimators.genfun import (diffineq_from_sample, genfun_blowup_from_sample,
                                tauberian_from_sample)
from .estimators.growth import (default_window, kesten_stigum_experiment, rate_fit, rate_scaling_experiment,
                                table_from_sample)
from .estimators.isoperimetry import (bs_formula, cheeger_bounds, cheeger_exponent,
                                      default_hull_radii, hull_ratio_profile, zeta_estimate)
from .estimators.sampling import default_R_inf, sample_clusters
from .estimators.spectral import strictly_decreasing, triangle_diagnostic
from .estimators.variance import variance_bound_check
from .graphs import GraphFamily, RegularTree, parse_family
from .oracles.cheeger import boundary_fraction, cheeger_constant_bruteforce
from .oracles.tree import (TreeModel, alpha_p, tree_gamma, tree_genfun, tree_sphere_mean,
                           zeta_reference_slope)

DEFAULTS = {
    "growth": dict(p=0.6, r_max=12, samples=10_000),
    "rates": dict(p_grid=[0.52, 0.54, 0.56, 0.58, 0.60], r_max=300, samples=100_000),
    "genfun": dict(p=0.6, alpha_fracs=[0.5, 0.7, 0.8, 0.9, 0.95], r_max=200, samples=100_000),
    "tauberian": dict(p=0.6, r_list=[8, 16, 32], samples=100_000),
    "diffineq": dict(p=0.55, alpha_fracs=[0.0, 0.2, 0.4, 0.6, 0.8, 0.9], r_max=300,
                     samples=100_000),
    "ks": dict(p=0.52, r_max=300, samples=5000, min_survivors=500, delta=0.01),
    "zeta": dict(p=0.3, size_grid=[16, 32, 64, 128, 256], samples=100_000, cap=4096,
                 max_edges=12),
    "cheeger": dict(p_grid=[0.52, 0.55, 0.6, 0.65], samples=4000, size_grid=[16, 32, 64, 128, 256],
                    cap=4096),
    "variance": dict(p=0.6, L=6, samples=10_000),
    "triangle": dict(p=0.6, k_list=[0, 2, 4, 8], L=120),
    "fixtures": dict(),
}

# kinds that only make sense above p_c
SUPERCRITICAL = {"ks", "tauberian", "rates", "cheeger"}
TREE_ONLY = {"variance", "triangle"}


def with_defaults(cfg: ExperimentConfig) -> ExperimentConfig:
    changes = {}
    for key, val in DEFAULTS.get(cfg.kind, {}).items():
        cur = getattr(cfg, key)
        if cur is None or (isinstance(cur, list) and not cur):
            changes[key] = val
    if cfg.kind == "tauberian" and cfg.r_max is None:
        changes["r_max"] = 4 * max(changes.get("r_list", cfg.r_list) or [1])
    return cfg.updated(**changes)


def validate(cfg: ExperimentConfig) -> list[str]:
    """Static diagnostics; nothing is sampled."""
    out = []
    try:
        family = parse_family(cfg.family)
    except ValidationError as exc:
        return [f"family: {exc}"]
    cfg = with_defaults(cfg)
    ps = ([cfg.p] if cfg.p is not None else []) + list(cfg.p_grid)
    for p in ps:
        if not 0.0 <= p <= 1.0:
            out.append(f"p={p} outside [0, 1]")
    pc = family.pc
    if cfg.kind in SUPERCRITICAL:
        if pc is None:
            out.append("p_c unknown for this family; supply pc= in the descriptor")
        elif any(p <= pc for p in ps if not (cfg.kind == "rates" and p == pc)):
            out.append("supercritical required: p must exceed p_c")
    if cfg.kind in TREE_ONLY and not isinstance(family, RegularTree):
        out.append(f"{cfg.kind} is only available on regular trees")
    if cfg.engine not in ("auto", "bfs", "gw"):
        out.append(f"unknown engine {cfg.engine!r}")
    elif cfg.engine == "gw" and not isinstance(family, RegularTree):
        out.append("engine gw needs a regular tree")
    for a in cfg.alpha_fracs:
        if not 0.0 <= a < 1.0:
            out.append(f"alpha fraction {a} must lie in [0, 1): the grid touches alpha_p")
    if cfg.r_max is not None and cfg.r_max < 0:
        out.append("r_max must be non-negative")
    if cfg.r_list and cfg.r_max is not None and max(cfg.r_list) > cfg.r_max:
        out.append("window outside radii: r_list exceeds r_max")
    if cfg.kind == "ks" and pc is not None and cfg.p is not None and cfg.p > pc \
            and cfg.r_max is not None:
        lo = default_window(family, cfg.p, cfg.r_max)[0]
        if lo >= cfg.r_max:
            out.append(f"window outside radii: fit window starts at {lo} >= r_max")
    if cfg.r_list and min(cfg.r_list) < 1:
        out.append("r_list entries must be positive")
    if cfg.samples is not None and cfg.samples < 1:
        out.append("samples must be positive")
    if cfg.kind == "growth" and cfg.samples is not None and cfg.samples < 100:
        out.append("growth tables need at least 100 samples")
    if cfg.threads < 1:
        out.append("threads must be at least 1")
    if cfg.kind in ("zeta", "cheeger") and cfg.size_grid and cfg.cap is not None \
            and cfg.cap <= 4 * max(cfg.size_grid):
        out.append("cap must exceed 4 * max(size_grid)")
    if cfg.kind == "zeta" and cfg.p is not None and cfg.p in (0.0, 1.0):
        out.append("zeta needs 0 < p < 1")
    if cfg.kind == "triangle" and cfg.L is not None and cfg.L < 3:
        out.append("triangle needs L >= 3")
    return out


@dataclass
class ExperimentOutput:
    header: tuple
    rows: list
    results: dict
    checks: dict = field(default_factory=dict)
    plot: dict = field(default_factory=dict)


def _tree_model(family: GraphFamily, p: float):
    return TreeModel(family.d, p) if isinstance(family, RegularTree) else None


@lru_cache(maxsize=None)
def _phi_hat(descriptor: str, max_edges: int) -> float:
    return cheeger_constant_bruteforce(parse_family(descriptor), max_edges)


# --- runners -------------------------------------------------------------------------

def run_growth(cfg, family):
    sample = sample_clusters(family, cfg.p, cfg.r_max, cfg.samples, cfg.seed, cfg.r_inf,
                             cfg.engine, cfg.threads, cfg.cap or 1_000_000)
    table = table_from_sample(sample)
    rows = list(table.csv_rows())
    checks = {"ball_nondecreasing": bool(np.all(np.diff(table.mean_ball) >= 0))}
    results = table.summary()
    model = _tree_model(family, cfg.p)
    if model is not None:
        exact = np.array([tree_sphere_mean(model, r) for r in table.radii])
        se = np.where(table.se_sphere > 0, table.se_sphere, np.inf)
        z = np.abs(table.mean_sphere - exact) / se
        ok = (z <= 3) | (table.mean_sphere == exact)
        frac = float(ok[1:].mean()) if ok.size > 1 else 1.0
        results["oracle_fraction_within_3se"] = frac
        checks["oracle_within_3se"] = frac >= 0.95
    return ExperimentOutput(table.CSV_HEADER, rows, results, checks,
                            dict(x="r", y="mean_sphere", logy=True))


def run_rates(cfg, family):
    rs = rate_scaling_experiment(family, cfg.p_grid, cfg.r_max, cfg.samples, cfg.seed,
                                 cfg.engine, cfg.threads)
    rows, checks = [], {}
    oracle_ok = True
    for p, f in rs.fits:
        model = _tree_model(family, p)
        exact = tree_gamma(model) if model is not None else math.nan
        if model is not None:
            oracle_ok &= abs(f.gamma_hat - exact) <= 0.01
        rows.append((repr(p), repr(f.gamma_hat), repr(f.stderr), f.window[0], f.window[1],
                     "" if math.isnan(exact) else repr(exact)))
    checks["upper_bound"] = all(rs.upper_bound_ok)
    if isinstance(family, RegularTree):
        checks["oracle_within_0.01"] = bool(oracle_ok)
    if not math.isnan(rs.exponent):
        checks["exponent_1_pm_0.15"] = abs(rs.exponent - 1.0) <= 0.15
    return ExperimentOutput(("p", "gamma_hat", "stderr", "r_lo", "r_hi", "gamma_oracle"), rows,
                            rs.as_dict(), checks, dict(x="p", y="gamma_hat", logy=False))


def run_genfun(cfg, family):
    sample = sample_clusters(family, cfg.p, cfg.r_max, cfg.samples, cfg.seed, None,
                             cfg.engine, cfg.threads)
    b = genfun_blowup_from_sample(sample, alpha_fracs=cfg.alpha_fracs)
    model = _tree_model(family, cfg.p)
    rows, within = [], True
    for e, prod, pse in zip(b.evals, b.products, b.product_se):
        exact = tree_genfun(model, e.alpha) if model is not None else math.nan
        if model is not None:
            within &= abs(e.value_hat - exact) <= 3 * e.se
        rows.append((repr(e.alpha), repr(e.value_hat), repr(e.se), repr(e.tail_bound),
                     repr(prod), repr(pse), "" if math.isnan(exact) else repr(exact)))
    checks = {"products_bounded_ratio_lt_2": b.ratio < 2.0}
    results = b.as_dict()
    if model is not None:
        ap = alpha_p(model)
        results["alpha_p_oracle"] = ap
        checks["oracle_within_3se"] = bool(within)
        checks["alpha_p_within_2pct"] = abs(b.alpha_p_hat - ap) / ap <= 0.02
    return ExperimentOutput(("alpha", "value_hat", "se", "tail_bound", "product", "product_se",
                             "oracle"), rows, results, checks,
                            dict(x="alpha", y="product", logy=False))


def run_tauberian(cfg, family):
    sample = sample_clusters(family, cfg.p, cfg.r_max, cfg.samples, cfg.seed, None,
                             cfg.engine, cfg.threads)
    rows_t = tauberian_from_sample(sample, cfg.r_list)
    rows = [(t.r, repr(t.alpha), repr(t.measured), repr(t.measured_se), repr(t.bound),
             repr(t.genfun), int(t.holds)) for t in rows_t]
    return ExperimentOutput(("r", "alpha", "measured", "measured_se", "bound", "genfun", "holds"),
                            rows, {"p": cfg.p, "n_samples": cfg.samples},
                            {"bound_holds": all(t.holds for t in rows_t)},
                            dict(x="r", y="measured", logy=True))


def run_diffineq(cfg, family):
    sample = sample_clusters(family, cfg.p, cfg.r_max, cfg.samples, cfg.seed, None,
                             cfg.engine, cfg.threads)
    ap = math.exp(-rate_fit(table_from_sample(sample), family=family).gamma_hat)
    grid = [f * ap for f in cfg.alpha_fracs]
    rs = diffineq_from_sample(sample, grid)
    rows = [(repr(r.alpha), repr(r.genfun), repr(r.deriv_fd), repr(r.deriv_series),
             repr(r.deriv_se), repr(r.eta_hat), int(r.agree)) for r in rs]
    checks = {"eta_positive": all(r.eta_hat > 0 for r in rs),
              "derivatives_agree": all(r.agree for r in rs)}
    return ExperimentOutput(("alpha", "genfun", "deriv_fd", "deriv_series", "deriv_se",
                             "eta_hat", "agree"), rows, {"p": cfg.p, "alpha_p_hat": ap},
                            checks, dict(x="alpha", y="eta_hat", logy=False))


def run_ks(cfg, family):
    res = kesten_stigum_experiment(family, cfg.p, cfg.r_max, cfg.samples, cfg.seed,
                                   cfg.delta, cfg.min_survivors, None, cfg.engine, cfg.threads)
    rows = [(i, repr(float(r)), repr(float(m)))
            for i, (r, m) in enumerate(zip(res.quenched_rates, res.min_normalized))]
    checks = {"fraction_within_ge_0.95": res.fraction_within >= 0.95,
              "min_normalized_positive": bool(np.all(res.min_normalized > 0)),
              "enough_survivors": res.n_survivors >= (cfg.min_survivors or 0)}
    return ExperimentOutput(("survivor", "quenched_rate", "min_normalized"), rows,
                            res.as_dict(), checks, dict(x="survivor", y="quenched_rate",
                                                        logy=False))


def run_zeta(cfg, family):
    z = zeta_estimate(family, cfg.p, cfg.size_grid, cfg.samples, cfg.cap, cfg.seed,
                      cfg.p_tilt, cfg.engine, cfg.threads)
    model = _tree_model(family, cfg.p)
    results = z.as_dict()
    checks = {}
    ref = zeta_reference_slope(model, z.size_grid) if model is not None else math.nan
    if model is not None:
        results["zeta_oracle"] = ref
        checks["oracle_within_15pct"] = abs(z.zeta_hat - ref) <= 0.15 * ref
    phi_edge = _phi_hat(family.descriptor, cfg.max_edges)
    phi = boundary_fraction(phi_edge)
    bs = bs_formula(phi, cfg.p)
    results.update(phi_edge_hat=phi_edge, phi_fraction=phi, bs_formula=bs)
    if bs > 0:
        checks["zeta_ge_bs_formula"] = z.zeta_hat >= bs
    rows = [(n, repr(t), repr(s)) for n, t, s in zip(z.size_grid, z.tail_hat, z.tail_se)]
    return ExperimentOutput(("n", "tail_hat", "tail_se"), rows, results, checks,
                            dict(x="n", y="tail_hat", logy=True))


def run_cheeger(cfg, family):
    rows, uppers, reports = [], [], []
    for i, p in enumerate(cfg.p_grid):
        R = cfg.r_inf or default_R_inf(family, p)
        prof = hull_ratio_profile(family, p, default_hull_radii(family, p, R), cfg.samples,
                                  cfg.seed + i, R, cfg.engine, cfg.threads)
        z = zeta_estimate(family, p, cfg.size_grid, max(cfg.samples, 10_000), cfg.cap,
                          cfg.seed + i, cfg.p_tilt, cfg.engine, cfg.threads)
        rep = cheeger_bounds(p, z.zeta_hat, prof)
        uppers.append(rep.cheeger_upper_proxy)
        reports.append(rep.as_dict())
        rows.append((repr(p), repr(rep.zeta_hat), repr(rep.cheeger_lower),
                     repr(rep.cheeger_upper_proxy), prof.n_survivors, R))
    results = {"reports": reports}
    checks = {}
    if family.pc is not None and len(uppers) >= 2 and all(u > 0 for u in uppers):
        slope, se = cheeger_exponent(cfg.p_grid, uppers, family.pc)
        results.update(upper_exponent=slope, upper_exponent_stderr=se)
        checks["upper_exponent_2_pm_0.5"] = abs(slope - 2.0) <= 0.5
    return ExperimentOutput(("p", "zeta_hat", "cheeger_lower", "cheeger_upper_proxy",
                             "n_survivors", "R_inf"), rows, results, checks,
                            dict(x="p", y="cheeger_upper_proxy", logy=True))


def run_variance(cfg, family):
    v = variance_bound_check(family, cfg.p, cfg.L, cfg.samples, cfg.seed, cfg.r_inf,
                             cfg.threads)
    rows = [(repr(v.p), v.L, v.ball_size, repr(v.mean), repr(v.variance), repr(v.theta_hat),
             repr(v.norm_used), repr(v.bound), int(v.holds))]
    return ExperimentOutput(("p", "L", "ball_size", "mean", "variance", "theta_hat", "norm",
                             "bound", "holds"), rows, v.as_dict(), {"variance_le_bound": v.holds},
                            dict(x="L", y="variance", logy=False))


def run_triangle(cfg, family):
    vals = triangle_diagnostic(family, cfg.p, cfg.k_list, cfg.L)
    rows = [(k, repr(v), repr(t)) for k, v, t in vals]
    return ExperimentOutput(("k", "value", "tail_estimate"), rows,
                            {"p": cfg.p, "L": cfg.L, "values": [v for _, v, _ in vals]},
                            {"strictly_decreasing": strictly_decreasing([v for _, v, _ in vals])},
                            dict(x="k", y="value", logy=True))


RUNNERS = {
    "growth": run_growth, "rates": run_rates, "genfun": run_genfun,
    "tauberian": run_tauberian, "diffineq": run_diffineq, "ks": run_ks, "zeta": run_zeta,
    "cheeger": run_cheeger, "variance": run_variance, "triangle": run_triangle,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentOutput:
    cfg = with_defaults(cfg)
    family = parse_family(cfg.family)
    return RUNNERS[cfg.kind](cfg, family)
