import hashlib
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from percolab import ValidationError
from percolab.fixtures import HASH_FILE, hash_vectors, load_fixture
from percolab.graphs import RegularTree
from percolab.sampler import (ConfigSeed, EdgeConfig, edge_state, empirical_density, hash64,
                              uniform_variate)

u64 = st.integers(0, 2**64 - 1)


def reference_hash(master, idx, edge):
    # written out from the documented byte layout, independent of sampler.py
    msg = master.to_bytes(8, "little") + idx.to_bytes(8, "little") + edge.encode()
    return int.from_bytes(hashlib.blake2b(msg, digest_size=8).digest(), "little")


def test_shipped_vectors():
    shipped = load_fixture(HASH_FILE)
    assert shipped == hash_vectors()
    for v in shipped["vectors"]:
        assert v["hash64"] == reference_hash(v["master_seed"], v["sample_index"], v["edge"])
        assert v["uniform"] == (v["hash64"] >> 11) / 2**53


@given(u64, u64, st.text(min_size=1, max_size=20))
def test_hash_matches_reference(master, idx, edge):
    seed = ConfigSeed(master, idx)
    assert hash64(seed, edge) == reference_hash(master, idx, edge)
    u = uniform_variate(seed, edge)
    assert 0.0 <= u < 1.0
    assert EdgeConfig(seed, 0.5).variate_fn()(edge) == u


@given(u64, st.integers(0, 1000), st.floats(0, 1), st.floats(0, 1))
def test_monotone_coupling(master, idx, p1, p2):
    lo, hi = sorted((p1, p2))
    for e in ("~a", "a~ab", "ab~abc"):
        if edge_state(EdgeConfig.make(master, idx, lo), e):
            assert edge_state(EdgeConfig.make(master, idx, hi), e)


def test_extreme_p():
    assert not EdgeConfig.make(0, 0, 0.0).is_open_fn()("~a")
    assert EdgeConfig.make(0, 0, 1.0).is_open_fn()("~a")


def test_empirical_density(tree3):
    edges = [tree3.edge_key(u, v) for u in tree3.ball_enumerate(tree3.root(), 7)
             for v in tree3.neighbors(u) if u < v]
    n = len(edges)
    for p in (0.1, 0.5, 0.9):
        dens = empirical_density(EdgeConfig.make(3, 0, p), edges)
        assert abs(dens - p) < 5 * math.sqrt(p * (1 - p) / n)


def test_streams_differ():
    a = uniform_variate(ConfigSeed(1, 0), "~a")
    assert a != uniform_variate(ConfigSeed(1, 1), "~a")
    assert a != uniform_variate(ConfigSeed(2, 0), "~a")


def test_validation():
    for bad in (-1, 2**64, 1.5):
        with pytest.raises(ValidationError):
            ConfigSeed(bad, 0)
    with pytest.raises(ValidationError):
        EdgeConfig.make(0, 0, 1.2)
    with pytest.raises(ValidationError):
        empirical_density(EdgeConfig.make(0, 0, 0.5), [])
