import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from percolab import DivergenceError, ValidationError
from percolab.estimators.genfun import (diffineq_from_sample, genfun_blowup_from_sample,
                                        genfun_from_sample, tauberian_from_sample)
from percolab.estimators.growth import (GrowthTable, conditional_sensitivity, default_window,
                                        growth_table, linear_fit, rate_fit, scaled_r_max,
                                        shape_regression, submultiplicativity_violations,
                                        table_from_sample, window_ratios)
from percolab.estimators.isoperimetry import (bs_formula, cheeger_bounds, cheeger_lower,
                                              hull_ratio_profile, zeta_estimate)
from percolab.estimators.sampling import default_R_inf, resolve_engine, sample_clusters
from percolab.estimators.spectral import strictly_decreasing, triangle_diagnostic
from percolab.estimators.variance import variance_bound_check
from percolab.graphs import RegularTree, TreeCrossZ
from percolab.oracles.tree import (TreeModel, alpha_p, conditional_ball_means,
                                   extinction_fixed_point, tree_ball_mean, tree_genfun,
                                   tree_genfun_derivative, tree_sphere_mean,
                                   zeta_reference_slope)


def exact_table(p, r_max, d=3):
    m = TreeModel(d, p)
    r = np.arange(r_max + 1)
    s = np.array([tree_sphere_mean(m, k) for k in r])
    b = np.cumsum(s)
    z = np.zeros_like(s)
    return GrowthTable(p, r, s, b, np.full(r.size, np.nan), z + 1e-9, z + 1e-9, z, 10**6)


# --- fits ------------------------------------------------------------------------

@given(st.floats(-3, 3), st.floats(-5, 5))
def test_linear_fit_exact_line(slope, intercept):
    x = np.arange(10.0)
    s, c, se = linear_fit(x, intercept + slope * x)
    assert s == pytest.approx(slope, abs=1e-9)
    assert c == pytest.approx(intercept, abs=1e-8)
    assert se < 1e-6


def test_linear_fit_stderr():
    x = np.arange(5.0)
    s, c, se = linear_fit(x, 2 * x, se_y=np.ones(5))
    assert se == pytest.approx(1 / math.sqrt(10))
    with pytest.raises(ValidationError):
        linear_fit([1.0], [2.0])


@pytest.mark.parametrize("p", [0.52, 0.6, 0.8])
def test_rate_fit_on_exact_table(p):
    fam = RegularTree(3)
    table = exact_table(p, 120)
    fit = rate_fit(table, family=fam)
    assert fit.gamma_hat == pytest.approx(math.log(2 * p), abs=1e-9)
    assert fit.window == default_window(fam, p, 120)
    ball = rate_fit(table, window=(60, 120), method="ball-slope", family=fam)
    assert ball.gamma_hat == pytest.approx(math.log(2 * p), rel=0.05)
    with pytest.raises(ValidationError):
        rate_fit(table, window=(100, 200))
    with pytest.raises(ValidationError):
        rate_fit(table, method="nope", family=fam)


def test_windows():
    fam = RegularTree(3)
    assert default_window(fam, 0.6, 300) == (20, 300)
    assert default_window(fam, 0.4, 300) == (8, 300)
    assert default_window(fam, 0.51, 300) == (200, 300)
    assert scaled_r_max(fam, 0.6, 300) == 80
    assert scaled_r_max(fam, 0.52, 300) == 300


def test_window_ratios_and_submultiplicativity():
    table = exact_table(0.5, 40)
    ratios = window_ratios(table, 40)
    assert np.allclose(ratios, (1 + 1.5 * np.arange(1, 41)) / np.arange(1, 41))
    assert submultiplicativity_violations(exact_table(0.6, 30)) == []


def test_shape_regression_exact():
    # unconditional ball at p_c + eps behaves like r on [2, 1/eps]
    eps = 0.02
    table = exact_table(0.5 + eps, 200)
    slope, _, _ = shape_regression([(table, math.log(2 * (0.5 + eps)), eps)])
    assert 0.5 < slope < 1.3


# --- sampling --------------------------------------------------------------------

def test_engine_resolution():
    assert resolve_engine(RegularTree(3), "auto") == "gw"
    assert resolve_engine(TreeCrossZ(3), "auto") == "bfs"
    with pytest.raises(ValidationError):
        resolve_engine(TreeCrossZ(3), "gw")
    with pytest.raises(ValidationError):
        resolve_engine(RegularTree(3), "fast")
    assert default_R_inf(RegularTree(3), 0.55) == 120
    assert default_R_inf(TreeCrossZ(3), 0.55) == 60


def test_closed_form_samples(tree3):
    s = sample_clusters(tree3, 1.0, 4, 3, seed=0, R_inf=6)
    assert s.engine == "closed-form" and s.survived.all()
    t = table_from_sample(s)
    assert t.mean_sphere.tolist() == [1, 3, 6, 12, 24]
    assert np.all(t.se_sphere == 0)


@pytest.mark.parametrize("engine", ["gw", "bfs"])
def test_growth_table_vs_oracle(tree3, engine):
    table = growth_table(tree3, 0.6, range(7), 3000, seed=4, R_inf=20, engine=engine)
    m = TreeModel(3, 0.6)
    for r in (2, 4, 6):
        k = table.index(r)
        assert abs(table.mean_ball[k] - tree_ball_mean(m, r)) < 4 * table.se_ball[k]
        exact_c = conditional_ball_means(m, 6, 20)[r]
        assert abs(table.mean_ball_conditional[k] - exact_c) < 4 * table.se_ball_conditional[k]
    with pytest.raises(ValidationError):
        growth_table(tree3, 0.6, range(3), 50, seed=0)


def test_growth_csv(tree3):
    table = growth_table(tree3, 0.6, range(4), 200, seed=1)
    rows = list(table.csv_rows())
    assert len(rows) == 4 and len(rows[0]) == len(table.CSV_HEADER)
    assert rows[0][0] == "0" and rows[0][1] == "1.0"


def test_conditional_sensitivity_small(tree3):
    rel, t1, t2 = conditional_sensitivity(tree3, 0.6, 10, 4000, seed=3, R_inf=30)
    assert 0 <= rel < 0.05
    assert t1.n_survivors >= t2.n_survivors


# --- generating function ---------------------------------------------------------

@pytest.fixture(scope="module")
def sample06():
    return sample_clusters(RegularTree(3), 0.6, 200, 20_000, seed=8)


def test_genfun_matches_closed_form(sample06):
    m = TreeModel(3, 0.6)
    for frac in (0.0, 0.5, 0.8):
        ev = genfun_from_sample(sample06, frac * alpha_p(m))
        assert abs(ev.value_hat - tree_genfun(m, frac * alpha_p(m))) <= 4 * ev.se + 1e-12
    assert genfun_from_sample(sample06, 0.0).value_hat == 1.0
    with pytest.raises(DivergenceError):
        genfun_from_sample(sample06, 0.9)


def test_blowup(sample06):
    b = genfun_blowup_from_sample(sample06, alpha_fracs=[0.5, 0.8, 0.9])
    assert b.ratio < 2
    assert b.alpha_p_hat == pytest.approx(1 / 1.2, rel=0.01)


def test_tauberian_and_diffineq(sample06):
    rows = tauberian_from_sample(sample06, [4, 8, 16])
    assert all(r.holds for r in rows)
    m = TreeModel(3, 0.6)
    grid = [0.0, 0.3, 0.6]
    for row in diffineq_from_sample(sample06, grid):
        assert row.eta_hat > 0
        assert row.agree
        assert row.deriv_series == pytest.approx(tree_genfun_derivative(m, row.alpha), rel=0.05)


# --- isoperimetry ----------------------------------------------------------------

def test_bs_formula_values():
    assert bs_formula(0.5, 0.5) == pytest.approx(0.0)
    assert bs_formula(0.5, 0.9) == pytest.approx(0.5 * math.log(5) + 0.5 * math.log(5 / 9))
    assert bs_formula(0.5, 0.9) == pytest.approx(0.5108, abs=1e-4)
    assert bs_formula(5 / 9, 0.9) == pytest.approx(
        5 / 9 * math.log(5 / 9 / 0.1) + 4 / 9 * math.log(5 / 9 / 0.9))
    with pytest.raises(ValidationError):
        bs_formula(1.0, 0.5)


@given(st.floats(0.01, 0.99), st.floats(0.0, 3.0))
@settings(max_examples=50)
def test_cheeger_lower_properties(p, zeta):
    lo = cheeger_lower(p, zeta)
    assert 0.0 <= lo <= 0.5 * p + 1e-12
    assert cheeger_lower(p, zeta + 0.1) >= lo - 1e-6
    assert cheeger_lower(p, 0.0) == 0.0


def test_zeta_small(tree3):
    z = zeta_estimate(tree3, 0.3, n_samples=20_000, seed=2)
    ref = zeta_reference_slope(TreeModel(3, 0.3), z.size_grid)
    assert abs(z.zeta_hat - ref) < 0.15 * ref
    with pytest.raises(ValidationError):
        zeta_estimate(tree3, 1.0)


def test_zeta_bfs_agrees_with_gw(tree3):
    a = zeta_estimate(tree3, 0.3, [8, 16, 32], n_samples=3000, seed=2, engine="bfs")
    b = zeta_estimate(tree3, 0.3, [8, 16, 32], n_samples=3000, seed=2, engine="gw")
    assert abs(a.zeta_hat - b.zeta_hat) < 0.2 * b.zeta_hat


def test_hull_profile_and_bounds(tree3):
    prof = hull_ratio_profile(tree3, 0.6, [1, 2, 4], 2000, seed=3, R_inf=20)
    assert prof.n_survivors > 0
    assert all(0 < r <= 2 for r in prof.mean_ratio)
    rep = cheeger_bounds(0.6, 0.1, prof)
    assert rep.cheeger_upper_proxy == min(prof.mean_ratio)
    assert rep.cheeger_lower == cheeger_lower(0.6, 0.1)


def test_hull_profile_engines_agree(tree3):
    a = hull_ratio_profile(tree3, 0.6, [2], 1500, seed=4, R_inf=12, engine="gw")
    b = hull_ratio_profile(tree3, 0.6, [2], 1500, seed=4, R_inf=12, engine="bfs")
    se = math.hypot(a.se_ratio[0], b.se_ratio[0])
    assert abs(a.mean_ratio[0] - b.mean_ratio[0]) < 4 * se


# --- variance and triangle -------------------------------------------------------

def test_variance_subcritical_zero(tree3):
    v = variance_bound_check(tree3, 0.3, 3, 200, seed=0)
    assert v.variance == 0.0 and v.bound == 0.0 and v.holds


def test_variance_theta(tree3):
    v = variance_bound_check(tree3, 0.6, 2, 3000, seed=1, R_inf=30)
    theta = extinction_fixed_point(TreeModel(3, 0.6))[1]
    assert v.theta_hat == pytest.approx(theta, abs=0.03)
    assert v.holds and v.norm_used <= v.norm_exact


def test_triangle_wrapper():
    vals = triangle_diagnostic(RegularTree(3), 0.5, [0, 1, 2], 60)
    assert strictly_decreasing([v for _, v, _ in vals])
    assert not strictly_decreasing([1.0, 1.0])
    with pytest.raises(ValidationError):
        triangle_diagnostic(TreeCrossZ(3), 0.5, [0], 10)


def test_conditional_shape_slope_of_exact_means():
    # the pooled conditional regression applied to exact conditional means
    # (no sampling) lands near 1.3 on p in {0.52, 0.55}
    entries = []
    for p in (0.52, 0.55):
        eps = p - 0.5
        r = np.arange(int(4 / eps + 1e-9) + 1)
        z = np.zeros(r.size)
        cond = conditional_ball_means(TreeModel(3, p), int(r[-1]))
        entries.append((GrowthTable(p, r, z, z, cond, z, z, z, 1), math.log(2 * p), eps))
    slope, _, _ = shape_regression(entries, conditional=True)
    assert slope == pytest.approx(1.305, abs=0.005)
