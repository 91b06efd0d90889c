"""Shipped reference data: hash test vectors and oracle values on the acceptance grid.

Both files are produced by :func:`write_fixtures` and checked into
``percolab/data/``. Regenerating them (``percolab fixtures``) must give the
same bytes; the test-suite compares the two.
"""
from __future__ import annotations

import json
from pathlib import Path

from .graphs import RegularTree
from .oracles.spectral import norm_blowup_onset, tree_norm_exact, triangle_value
from .oracles.tree import (TreeModel, alpha_p, brute_force_ball_expectation, extinction_fixed_point,
                           genfun_blowup_limit, tree_ball_mean_exact, tree_gamma, tree_genfun,
                           tree_sphere_mean, zeta_reference_slope)
from .sampler import ConfigSeed, hash64, uniform_variate

FIXTURE_DIR = Path(__file__).parent / "data"
HASH_FILE = "hash_vectors.json"
ORACLE_FILE = "oracle_fixtures.json"

_HASH_SEEDS = [(0, 0), (0, 1), (7, 3), (12345, 678), (2**64 - 1, 2**64 - 1)]
_HASH_WORDS = [("", "a"), ("", "b"), ("a", "ab"), ("abc", "abca"), ("cbab", "cbabc")]


def hash_vectors() -> dict:
    tree = RegularTree(3)
    vectors = []
    for master, idx in _HASH_SEEDS:
        seed = ConfigSeed(master, idx)
        for a, b in _HASH_WORDS:
            e = tree.edge_string(a, b)
            vectors.append({"master_seed": master, "sample_index": idx, "edge": e,
                            "hash64": hash64(seed, e), "uniform": uniform_variate(seed, e)})
    # a product-graph edge string, to pin its serialization too
    seed = ConfigSeed(1, 2)
    vectors.append({"master_seed": 1, "sample_index": 2, "edge": "a|0~a|1",
                    "hash64": hash64(seed, "a|0~a|1"), "uniform": uniform_variate(seed, "a|0~a|1")})
    return {"hash": "blake2b-64", "message": "le64(master_seed) le64(sample_index) utf8(edge)",
            "uniform": "(hash64 >> 11) * 2**-53", "vectors": vectors}


def oracle_values() -> dict:
    d = 3
    out = {"d": d, "sphere_means": {}, "gamma": {}, "genfun": {}, "brute_force": {}}
    for p in (0.3, 0.5, 0.6):
        m = TreeModel(d, p)
        out["sphere_means"][repr(p)] = [tree_sphere_mean(m, r) for r in range(13)]
    for p in (0.5, 0.51, 0.52, 0.54, 0.55, 0.56, 0.58, 0.6, 0.65):
        m = TreeModel(d, p)
        q, theta = extinction_fixed_point(m)
        out["gamma"][repr(p)] = {"gamma": tree_gamma(m), "alpha_p": alpha_p(m),
                                 "extinction_q": q, "theta": theta}
    m = TreeModel(d, 0.6)
    ap = alpha_p(m)
    out["genfun"] = {"p": 0.6, "alpha_p": ap, "blowup_limit": genfun_blowup_limit(m),
                     "values": {repr(f): tree_genfun(m, f * ap)
                                for f in (0.5, 0.7, 0.8, 0.9, 0.95)}}
    grid = [16, 32, 64, 128, 256]
    out["zeta_reference"] = {repr(p): zeta_reference_slope(TreeModel(d, p), grid)
                             for p in (0.3, 0.9)}
    tree = RegularTree(d)
    for p in ("1/2", "3/5"):
        out["brute_force"][p] = {
            str(r): {"brute": str(brute_force_ball_expectation(tree, p, r)),
                     "closed_form": str(tree_ball_mean_exact(d, p, r))} for r in range(4)}
    out["spectral"] = {"norm_blowup_onset_L40": norm_blowup_onset(d, 40),
                       "tree_norm_exact": {repr(p): tree_norm_exact(d, p) for p in (0.3, 0.5, 0.6)},
                       "triangle_p0.6_L120": {str(k): triangle_value(d, 0.6, k, 120)
                                              for k in (0, 2, 4, 8)}}
    return out


def _dump(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def write_fixtures(out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, obj in ((HASH_FILE, hash_vectors()), (ORACLE_FILE, oracle_values())):
        path = out_dir / name
        path.write_text(_dump(obj), encoding="utf-8")
        paths.append(path)
    return paths


def load_fixture(name: str) -> dict:
    return json.loads((FIXTURE_DIR / name).read_text(encoding="utf-8"))
