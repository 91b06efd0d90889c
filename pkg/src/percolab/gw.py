"""Generation-count sampler for percolation clusters on the d-regular tree.

On a tree every vertex is joined to the centre by a unique path, so the
intrinsic spheres of the cluster form a Galton-Watson process: the centre has
Binomial(d, p) children and everyone else Binomial(d - 1, p). Sampling the
counts directly is exact in law and costs O(r_max) draws per sample instead of
O(|B_int|) hash evaluations, which is what makes radii of several hundred
reachable near p_c.

These samples do not read :mod:`percolab.sampler`; determinism comes from
numpy ``Generator`` streams keyed by ``(stream, seed, block)`` where a block is
``BLOCK`` consecutive sample indices. Splitting work across processes by whole
blocks therefore never changes the output.
"""
from __future__ import annotations

import math
from functools import partial

import numpy as np

from . import ResourceError, ValidationError
from .explore import ClusterSample, map_samples
from .graphs import GraphFamily, RegularTree

BLOCK = 1024
COUNT_LIMIT = 2**61

_STREAM_SPHERES = 1
_STREAM_PROGENY = 2
_STREAM_HULL = 3
_STREAM_SUBTREE = 4


def block_rng(stream: int, seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng([stream, seed, block])


def _blocks(n_samples: int):
    return [(b, min(BLOCK, n_samples - b * BLOCK)) for b in range(math.ceil(n_samples / BLOCK))]


def _require_tree(family: GraphFamily) -> int:
    if not isinstance(family, RegularTree):
        raise ValidationError("the generation-count engine only applies to regular trees")
    return family.d


def _guard(z: np.ndarray, depth: int):
    if z.size and z.max() > COUNT_LIMIT:
        raise ResourceError(f"sphere count exceeds {COUNT_LIMIT} at radius {depth}",
                            attained=depth - 1)


# --- plain generation counts -------------------------------------------------

def _sphere_block(d, p, horizon, seed, block_size):
    block, size = block_size
    rng = block_rng(_STREAM_SPHERES, seed, block)
    z = np.zeros((size, horizon + 1), dtype=np.int64)
    z[:, 0] = 1
    if horizon >= 1:
        z[:, 1] = rng.binomial(d, p, size)
    for r in range(2, horizon + 1):
        prev = z[:, r - 1]
        if not prev.any():
            break
        _guard(prev, r - 1)
        z[:, r] = rng.binomial(prev * (d - 1), p)
    return z


def closed_form_spheres(family: GraphFamily, p: float, horizon: int, n: int) -> np.ndarray:
    """Sphere arrays for p in {0, 1}, where no sampling is needed."""
    z = np.zeros((n, horizon + 1), dtype=np.int64)
    z[:, 0] = 1
    if p >= 1.0:
        if not isinstance(family, RegularTree):
            raise ValidationError("closed-form p=1 spheres only for regular trees")
        for r in range(1, horizon + 1):
            s = family.sphere_size(r)
            if s > COUNT_LIMIT:
                raise ResourceError(f"sphere count exceeds {COUNT_LIMIT} at radius {r}",
                                    attained=r - 1)
            z[:, r] = s
    return z


def sample_spheres_gw(family: GraphFamily, p: float, r_max: int, n_samples: int, seed: int,
                      R_inf: int | None = None, threads: int = 1) -> ClusterSample:
    d = _require_tree(family)
    horizon = r_max if R_inf is None else max(r_max, R_inf)
    if p <= 0.0 or p >= 1.0:
        z = closed_form_spheres(family, p, horizon, n_samples)
    else:
        parts = map_samples(partial(_sphere_block, d, p, horizon, seed), _blocks(n_samples),
                            threads)
        z = np.concatenate(parts, axis=0) if parts else np.zeros((0, horizon + 1), np.int64)
    survived = None if R_inf is None else z[:, R_inf] > 0
    return ClusterSample(family, p, seed, z[:, : r_max + 1].copy(), survived,
                         np.zeros(n_samples, dtype=bool), R_inf, "gw")


# --- total progeny ------------------------------------------------------------

def _progeny_block(d, p, cap, seed, block_size):
    block, size = block_size
    rng = block_rng(_STREAM_PROGENY, seed, block)
    z = rng.binomial(d, p, size).astype(np.int64)
    total = 1 + z
    active = (z > 0) & (total < cap)
    while active.any():
        z_new = np.zeros_like(z)
        z_new[active] = rng.binomial(z[active] * (d - 1), p)
        z = z_new
        total[active] += z[active]
        active &= (z > 0) & (total < cap)
    censored = total >= cap
    return np.where(censored, cap, total), censored


def sample_cluster_sizes_gw(family: GraphFamily, p: float, n_samples: int, cap: int,
                            seed: int, threads: int = 1):
    """Cluster sizes ``|K_v|``; sizes reaching ``cap`` are censored.

    Returns ``(sizes, n_open, n_closed, censored)``. On a tree the edge
    transcript of a finite cluster of n vertices has n - 1 open edges and
    ``d + (d - 2)(n - 1)`` closed ones.
    """
    d = _require_tree(family)
    if cap < 1:
        raise ValidationError("cap must be at least 1")
    parts = map_samples(partial(_progeny_block, d, p, cap, seed), _blocks(n_samples), threads)
    sizes = np.concatenate([a for a, _ in parts]) if parts else np.zeros(0, np.int64)
    censored = np.concatenate([c for _, c in parts]) if parts else np.zeros(0, bool)
    n_open = sizes - 1
    n_closed = d + (d - 2) * (sizes - 1)
    return sizes, n_open, n_closed, censored


# --- hulls: two-type decomposition -------------------------------------------

def finite_horizon_extinction(d: int, p: float, horizon: int) -> np.ndarray:
    """``q[m]``: probability a non-root vertex has no descendant m levels down."""
    q = np.zeros(horizon + 1)
    for m in range(1, horizon + 1):
        q[m] = (1.0 - p + p * q[m - 1]) ** (d - 1)
    return q


def _slot_categories(slots, p, qc):
    """Outcomes (n_surviving >= 1, n_dying) for a surviving vertex's child slots."""
    cats, probs = [], []
    for a in range(1, slots + 1):
        for b in range(0, slots - a + 1):
            c = slots - a - b
            coef = math.factorial(slots) // (math.factorial(a) * math.factorial(b) * math.factorial(c))
            cats.append((a, b))
            probs.append(coef * (p * (1 - qc)) ** a * (p * qc) ** b * (1 - p) ** c)
    probs = np.array(probs)
    tot = probs.sum()
    probs = probs / tot if tot > 0 else np.full(len(probs), 1.0 / len(probs))
    a = np.array([c[0] for c in cats])
    b = np.array([c[1] for c in cats])
    return a, b, probs


def _hull_block(d, p, R, i_max, seed, block_size):
    block, n = block_size
    rng = block_rng(_STREAM_HULL, seed, block)
    q = finite_horizon_extinction(d, p, R)
    z = np.zeros((n, R + 1), dtype=np.int64)
    s = np.zeros((n, R + 1), dtype=np.int64)
    z[:, 0] = 1
    # dying vertices of the current generation, by depth of their lowest surviving ancestor
    dying = np.zeros((n, R + 1), dtype=np.int64)
    extra = np.zeros((n, i_max + 1), dtype=np.int64)
    hq = q[R - 1]
    root = rng.multinomial(d, [1 - p, p * (1 - hq), p * hq], size=n)
    s[:, 1] = root[:, 1]
    dying[:, 0] = root[:, 2]
    z[:, 1] = root[:, 1] + root[:, 2]
    if i_max >= 0:
        extra[:, : min(1, i_max + 1)] += dying[:, :1]
    for k in range(1, R):
        qc = q[R - k - 1]
        p_tilde = p * qc / (1 - p + p * qc) if qc > 0 else 0.0
        _guard(z[:, k], k)
        new_dying = np.zeros_like(dying)
        new_dying[:, :k] = rng.binomial((d - 1) * dying[:, :k], p_tilde)
        a, b, probs = _slot_categories(d - 1, p, qc)
        outcomes = rng.multinomial(s[:, k], probs)
        s[:, k + 1] = outcomes @ a
        new_dying[:, k] = outcomes @ b
        dying = new_dying
        z[:, k + 1] = s[:, k + 1] + dying[:, : k + 1].sum(axis=1)
        # a dying vertex at depth k+1 lies in Hull(i) for origin <= i < k+1
        top = min(k + 1, i_max + 1)
        if top > 0:
            extra[:, :top] += np.cumsum(dying[:, :top], axis=1)
    return z, s, extra


def sample_hulls_gw(family: GraphFamily, p: float, R_inf: int, n_samples: int, seed: int,
                    i_max: int | None = None, threads: int = 1) -> dict:
    """Hull statistics for radii ``0..i_max`` with survival meaning "reaches R_inf".

    A child is *surviving* if it has a descendant at depth ``R_inf``; the hull
    of radius i is the ball plus every dying vertex whose lowest surviving
    ancestor sits at depth <= i, and its open boundary is the number of
    surviving vertices at depth i + 1. Returns a dict of arrays: ``spheres``,
    ``surviving`` (per depth), ``hull_sizes`` and ``open_boundary`` (per i),
    and ``survived``.
    """
    d = _require_tree(family)
    if R_inf < 2:
        raise ValidationError("R_inf must be at least 2 for hull sampling")
    i_max = R_inf - 2 if i_max is None else i_max
    if not 0 <= i_max <= R_inf - 2:
        raise ValidationError("i_max must lie in [0, R_inf - 2]")
    if not 0.0 < p < 1.0:
        raise ValidationError("hull sampling needs 0 < p < 1")
    parts = map_samples(partial(_hull_block, d, p, R_inf, i_max, seed), _blocks(n_samples),
                        threads)
    z = np.concatenate([x[0] for x in parts])
    s = np.concatenate([x[1] for x in parts])
    extra = np.concatenate([x[2] for x in parts])
    balls = np.cumsum(z, axis=1)
    survived = z[:, R_inf] > 0
    hull = balls[:, : i_max + 1] + extra
    boundary = s[:, 1: i_max + 2]
    # a cluster that dies is its own hull with no open boundary
    total = balls[:, -1]
    hull = np.where(survived[:, None], hull, total[:, None])
    boundary = np.where(survived[:, None], boundary, 0)
    return {"spheres": z, "surviving": s, "hull_sizes": hull, "open_boundary": boundary,
            "survived": survived}


# --- independent subtrees ------------------------------------------------------

def subtree_survival(d: int, p: float, n_subtrees: int, horizon: int,
                     rng: np.random.Generator) -> np.ndarray:
    """Whether each of ``n_subtrees`` independent non-root subtrees reaches depth ``horizon``."""
    z = np.ones(n_subtrees, dtype=np.int64)
    for depth in range(1, horizon + 1):
        alive = z > 0
        if not alive.any():
            break
        _guard(z, depth)
        z = np.where(alive, rng.binomial(z * (d - 1), p), 0)
    return z > 0
