import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from percolab import ValidationError
from percolab.fixtures import ORACLE_FILE, load_fixture
from percolab.graphs import RegularTree, TreeCrossZ
from percolab.gw import sample_spheres_gw
from percolab.oracles.tree import (TreeModel, alpha_p, brute_force_ball_expectation,
                                   conditional_ball_means, conditional_sphere_mean,
                                   extinction_fixed_point, finite_tail_log, genfun_blowup_limit,
                                   horizon_survival, oracle_report, susceptibility,
                                   tauberian_bound, total_progeny_pmf,
                                   total_progeny_pmf_convolution, tree_ball_mean,
                                   tree_ball_mean_exact, tree_gamma, tree_genfun,
                                   tree_genfun_derivative, tree_sphere_mean, zeta_asymptotic,
                                   zeta_reference_slope)

P, X = sp.symbols("p x")


def test_extinction_sympy():
    # q = (1 - p + p q)^2 at p = 3/5: roots 1 and 4/9
    q = sp.symbols("q")
    roots = sp.solve(sp.Eq(q, (1 - sp.Rational(3, 5) + sp.Rational(3, 5) * q) ** 2), q)
    q_small = min(roots)
    assert q_small == sp.Rational(4, 9)
    theta = 1 - (sp.Rational(2, 5) + sp.Rational(3, 5) * q_small) ** 3
    assert theta == sp.Rational(19, 27)
    q_num, theta_num = extinction_fixed_point(TreeModel(3, 0.6))
    assert q_num == pytest.approx(4 / 9, abs=1e-13)
    assert theta_num == pytest.approx(19 / 27, abs=1e-13)


@pytest.mark.parametrize("p", [0.2, 0.5])
def test_no_survival_at_or_below_pc(p):
    assert extinction_fixed_point(TreeModel(3, p)) == (1.0, 0.0)
    assert tree_gamma(TreeModel(3, p)) == 0.0


def test_sphere_and_gamma():
    m = TreeModel(4, 0.5)
    assert tree_sphere_mean(m, 0) == 1
    assert tree_sphere_mean(m, 3) == pytest.approx(4 * 0.5 * 1.5 ** 2)
    assert tree_gamma(m) == pytest.approx(math.log(1.5))
    assert tree_ball_mean(m, 2) == pytest.approx(1 + 2 + 3)


def test_genfun_series():
    a = sp.symbols("a")
    d, p = 3, sp.Rational(3, 5)
    model = TreeModel(3, 0.6)
    for alpha in (0.1, 0.5, 0.8):
        partial = 1.0 + sum(1.5 * (1.2 * alpha) ** r for r in range(1, 3000))
        assert tree_genfun(model, alpha) == pytest.approx(partial, rel=1e-12)
        deriv = float(sp.diff(1 + d * p * a / (1 - (d - 1) * p * a), a).subs(a, alpha))
        assert tree_genfun_derivative(model, alpha) == pytest.approx(deriv, rel=1e-12)
    assert tree_genfun(model, alpha_p(model)) == math.inf
    assert alpha_p(model) == pytest.approx(1 / 1.2)
    # (alpha_p - alpha) G(alpha) -> d alpha_p / (d - 1)
    eps = 1e-9
    assert (eps * tree_genfun(model, alpha_p(model) - eps)) == \
        pytest.approx(genfun_blowup_limit(model), rel=1e-6)


def test_conditional_mean_sympy():
    p, q = sp.Rational(3, 5), sp.Rational(4, 9)
    theta = sp.Rational(19, 27)
    joint = sum(sp.binomial(3, k) * p ** k * (1 - p) ** (3 - k) * k * (1 - q ** k)
                for k in range(4))
    assert conditional_sphere_mean(TreeModel(3, 0.6), 1) == pytest.approx(float(joint / theta))
    with pytest.raises(ValidationError):
        conditional_sphere_mean(TreeModel(3, 0.4), 1)


def test_conditional_mean_finite_horizon_mc(tree3):
    model = TreeModel(3, 0.6)
    R = 10
    s = sample_spheres_gw(tree3, 0.6, R, 40_000, seed=21, R_inf=R)
    sub = s.spheres[s.survived]
    for r in (2, 5, 8):
        se = sub[:, r].std(ddof=1) / math.sqrt(len(sub))
        assert abs(sub[:, r].mean() - conditional_sphere_mean(model, r, R)) < 4 * se
    assert s.survived.mean() == pytest.approx(horizon_survival(model, R), abs=0.02)
    assert conditional_ball_means(model, 3)[0] == 1.0


def _series_pmf(d, p, n_max):
    # exact rational pmf from the implicit pgf u = x (1 - p + p u)^(d - 1)
    u = sp.Integer(0)
    for _ in range(n_max):
        u = sp.expand(X * (1 - p + p * u) ** (d - 1))
        u = sum(u.coeff(X, k) * X ** k for k in range(n_max + 1))
    g = sp.expand(X * (1 - p + p * u) ** d)
    return [g.coeff(X, n) for n in range(n_max + 1)]


def test_progeny_pmf_sympy():
    exact = _series_pmf(3, sp.Rational(2, 5), 7)
    pmf, underflow = total_progeny_pmf(TreeModel(3, 0.4), 7)
    assert not underflow
    assert np.allclose(pmf, [float(v) for v in exact], rtol=1e-12, atol=0)


@pytest.mark.parametrize("p", [0.2, 0.45, 0.6, 0.85])
def test_progeny_closed_form_vs_convolution(p):
    m = TreeModel(3, p)
    a, _ = total_progeny_pmf(m, 300)
    b = total_progeny_pmf_convolution(m, 300)
    assert np.allclose(a, b, rtol=1e-10, atol=1e-300)


@pytest.mark.parametrize("p", [0.3, 0.6])
def test_progeny_mass(p):
    m = TreeModel(3, p)
    pmf, _ = total_progeny_pmf(m, 20_000)
    assert pmf.sum() + extinction_fixed_point(m)[1] == pytest.approx(1.0, abs=1e-9)


def test_progeny_mean_subcritical():
    m = TreeModel(3, 0.3)
    pmf, _ = total_progeny_pmf(m, 5000)
    assert float(np.arange(pmf.size) @ pmf) == pytest.approx(susceptibility(m), rel=1e-9)


def test_zeta_reference():
    # the fitted slope over n in {64, 128, 256} sits above the exact rate by
    # the n^(-3/2) prefactor's contribution, 1.5 / n on average
    for p in (0.3, 0.9):
        m = TreeModel(3, p)
        ref = zeta_reference_slope(m, [16, 32, 64, 128, 256])
        assert ref == pytest.approx(zeta_asymptotic(m) + 1.5 / np.mean([64, 128, 256]), abs=2e-3)
    tail = finite_tail_log(TreeModel(3, 0.3), [1], n_max=5000)
    assert tail[0] == pytest.approx(0.0, abs=1e-12)


def test_brute_force_exact():
    tree = RegularTree(3)
    for p in ("1/2", "3/5", "0.3"):
        for r in range(4):
            assert brute_force_ball_expectation(tree, p, r) == tree_ball_mean_exact(3, p, r)
    assert tree_ball_mean_exact(3, "1/2", 3) == Fraction(11, 2)
    assert brute_force_ball_expectation(RegularTree(4), "1/3", 2) == \
        tree_ball_mean_exact(4, "1/3", 2)
    # T_3 x Z, one step: five neighbours
    assert brute_force_ball_expectation(TreeCrossZ(3), "1/2", 1) == Fraction(7, 2)
    with pytest.raises(ValidationError):
        brute_force_ball_expectation(tree, "1/2", 4)


@given(st.fractions(0, 1), st.integers(0, 3))
@settings(max_examples=15, deadline=None)
def test_brute_force_polynomial(p, r):
    exact = sp.Rational(p.numerator, p.denominator)
    poly = sp.Integer(1) + sum(3 * 2 ** (k - 1) * P ** k for k in range(1, r + 1))
    assert tree_ball_mean_exact(3, p, r) == Fraction(str(poly.subs(P, exact)))


def test_tauberian_bound_holds_on_tree():
    m = TreeModel(3, 0.6)
    a_p = alpha_p(m)
    for r in (4, 8, 16, 32):
        alpha = r * a_p / (r + 1)
        assert tree_ball_mean(m, r) <= tauberian_bound(m, r, alpha)


def test_oracle_report_json():
    rep = oracle_report(TreeModel(3, 0.6), n_max=5)
    assert rep.extinction_q == pytest.approx(4 / 9)
    assert '"chi": "inf"' in rep.to_json()
    assert len(rep.progeny_pmf) == 5


def test_shipped_oracle_fixture():
    fx = load_fixture(ORACLE_FILE)
    m = TreeModel(3, 0.6)
    assert fx["sphere_means"]["0.6"][12] == tree_sphere_mean(m, 12)
    assert fx["gamma"]["0.6"]["gamma"] == tree_gamma(m)
    for p, rows in fx["brute_force"].items():
        for r, row in rows.items():
            assert row["brute"] == row["closed_form"]
