import math

import numpy as np
import pytest

from percolab import ResourceError, ValidationError
from percolab.explore import hull_profile, sample_spheres_bfs
from percolab.graphs import RegularTree, TreeCrossZ
from percolab.gw import (BLOCK, closed_form_spheres, finite_horizon_extinction,
                         sample_cluster_sizes_gw, sample_hulls_gw, sample_spheres_gw)
from percolab.oracles.tree import (TreeModel, finite_horizon_q, horizon_survival,
                                   total_progeny_pmf, tree_sphere_mean)
from percolab.sampler import EdgeConfig


def _zscore(a, b):
    se = math.hypot(a.std(ddof=1) / math.sqrt(a.size), b.std(ddof=1) / math.sqrt(b.size))
    return abs(a.mean() - b.mean()) / se


def test_gw_means_match_oracle(tree3):
    s = sample_spheres_gw(tree3, 0.6, 10, 20_000, seed=1)
    model = TreeModel(3, 0.6)
    means = s.spheres.mean(axis=0)
    ses = s.spheres.std(axis=0, ddof=1) / math.sqrt(s.n_samples)
    z = np.abs(means[1:] - [tree_sphere_mean(model, r) for r in range(1, 11)]) / ses[1:]
    assert np.mean(z < 3) >= 0.9


def test_gw_matches_bfs_in_law(tree3):
    gw = sample_spheres_gw(tree3, 0.55, 6, 4000, seed=2, R_inf=15)
    bfs = sample_spheres_bfs(tree3, 0.55, 6, 4000, seed=2, R_inf=15)
    for r in (3, 6):
        assert _zscore(gw.spheres[:, r].astype(float), bfs.spheres[:, r].astype(float)) < 4
    assert _zscore(gw.survived.astype(float), bfs.survived.astype(float)) < 4


def test_gw_thread_independence(tree3):
    n = 3 * BLOCK + 17
    a = sample_spheres_gw(tree3, 0.6, 8, n, seed=9)
    b = sample_spheres_gw(tree3, 0.6, 8, n, seed=9, threads=3)
    assert np.array_equal(a.spheres, b.spheres)
    # the first blocks do not depend on n
    c = sample_spheres_gw(tree3, 0.6, 8, BLOCK, seed=9)
    assert np.array_equal(a.spheres[:BLOCK], c.spheres)


def test_closed_form(tree3):
    z = closed_form_spheres(tree3, 1.0, 4, 2)
    assert z.tolist() == [[1, 3, 6, 12, 24]] * 2
    assert closed_form_spheres(tree3, 0.0, 3, 1).tolist() == [[1, 0, 0, 0]]
    with pytest.raises(ResourceError):
        closed_form_spheres(tree3, 1.0, 80, 1)


def test_overflow_guard(tree3):
    with pytest.raises(ResourceError):
        sample_spheres_gw(tree3, 0.99, 200, 10, seed=0)


def test_non_tree_rejected():
    with pytest.raises(ValidationError):
        sample_spheres_gw(TreeCrossZ(3), 0.5, 3, 10, seed=0)


def test_cluster_sizes_match_pmf(tree3):
    p = 0.4
    sizes, n_open, n_closed, censored = sample_cluster_sizes_gw(tree3, p, 50_000, 200, seed=3)
    pmf, _ = total_progeny_pmf(TreeModel(3, p), 10)
    for n in (1, 2, 3, 5):
        freq = np.mean(sizes == n)
        assert abs(freq - pmf[n]) < 5 * math.sqrt(pmf[n] * (1 - pmf[n]) / sizes.size)
    assert np.array_equal(n_open, sizes - 1)
    assert np.array_equal(n_closed, 3 + sizes - 1)
    assert np.all(sizes[censored] == 200)


def test_finite_horizon_extinction_agrees():
    model = TreeModel(3, 0.6)
    assert np.allclose(finite_horizon_extinction(3, 0.6, 30), finite_horizon_q(model, 30))


def test_hulls_structure(tree3):
    R = 12
    res = sample_hulls_gw(tree3, 0.6, R, 3000, seed=4)
    surv = res["survived"]
    assert abs(surv.mean() - horizon_survival(TreeModel(3, 0.6), R)) < 4 * math.sqrt(0.25 / 3000)
    balls = np.cumsum(res["spheres"], axis=1)
    h, b = res["hull_sizes"][surv], res["open_boundary"][surv]
    assert np.all(h >= balls[surv][:, : h.shape[1]])
    assert np.all(np.diff(h, axis=1) >= 0)
    assert np.all(b >= 1)
    assert np.all(b <= res["spheres"][surv][:, 1: h.shape[1] + 1])


def test_hulls_match_bfs_in_law(tree3):
    R, i = 10, 3
    gw = sample_hulls_gw(tree3, 0.6, R, 4000, seed=5, i_max=i)
    ratio_gw = (gw["open_boundary"][:, i] / gw["hull_sizes"][:, i])[gw["survived"]]
    vals = []
    for k in range(2000):
        cfg = EdgeConfig.make(5, k, 0.6)
        hres = hull_profile(tree3, cfg, tree3.root(), [i], R)[0]
        if hres.survived:
            vals.append(hres.open_boundary / hres.hull_size)
    assert _zscore(ratio_gw, np.array(vals)) < 4
