"""Breadth-first exploration of percolation clusters in the intrinsic metric.

All explorations read edges through :class:`~percolab.sampler.EdgeConfig`, so
memory is proportional to the explored region. Vertices are handled as their
serialized strings; the visited set is a plain ``set`` of those strings.

Sphere convention: ``sphere_sizes[0] == 1`` counts the centre and
``ball_sizes[r] == sum(sphere_sizes[:r + 1])``.
"""
from __future__ import annotations

import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import ValidationError
from .graphs import GraphFamily, VertexCode
from .sampler import EdgeConfig

DEFAULT_VERTEX_CAP = 1_000_000


@dataclass
class BallRecord:
    center: VertexCode
    p: float
    r_max: int
    sphere_sizes: list[int]
    ball_sizes: list[int]
    exhausted: bool
    truncated: bool = False
    hull_open_boundary: list[int] | None = None
    hull_sizes: list[int] | None = None
    master_seed: int | None = None
    sample_index: int | None = None

    CSV_HEADER = ("seed", "sample", "p", "r", "sphere", "ball", "exhausted", "truncated")

    def csv_rows(self):
        for r, (s, b) in enumerate(zip(self.sphere_sizes, self.ball_sizes)):
            yield (self.master_seed, self.sample_index, self.p, r, s, b,
                   int(self.exhausted), int(self.truncated))


@dataclass(frozen=True)
class SurvivalVerdict:
    survives_to: int
    verdict: str
    proxy_radius: int
    capped: bool = False

    @property
    def survived(self) -> bool:
        return self.verdict == "survived"


@dataclass(frozen=True)
class HullResult:
    hull_size: int
    open_boundary: int
    survived: bool
    truncated: bool = False


def _grow(family, is_open, frontier, seen, cap):
    """One BFS layer over open edges. Returns (next_frontier, hit_cap)."""
    nbrs = family.neighbor_keys
    estr = family.edge_string
    nxt = []
    for x in frontier:
        for y in nbrs(x):
            if y in seen:
                continue
            if is_open(estr(x, y)):
                seen.add(y)
                nxt.append(y)
                if len(seen) >= cap:
                    return nxt, True
    return nxt, False


def explore_ball(family: GraphFamily, cfg: EdgeConfig, v: VertexCode, r_max: int,
                 vertex_cap: int = DEFAULT_VERTEX_CAP) -> BallRecord:
    record, _ = explore(family, cfg, v, r_max, None, vertex_cap)
    return record


def survival_proxy(family: GraphFamily, cfg: EdgeConfig, v: VertexCode, R_inf: int,
                   vertex_cap: int = DEFAULT_VERTEX_CAP) -> SurvivalVerdict:
    if R_inf < 1:
        raise ValidationError("R_inf must be at least 1")
    _, verdict = explore(family, cfg, v, 0, R_inf, vertex_cap)
    return verdict


def explore(family: GraphFamily, cfg: EdgeConfig, v: VertexCode, r_max: int,
            R_inf: int | None = None, vertex_cap: int = DEFAULT_VERTEX_CAP):
    """Explore to ``r_max`` recording spheres, then on to ``R_inf`` for survival.

    Hitting ``vertex_cap`` before ``r_max`` flags the record as truncated.
    Hitting it before ``R_inf`` with a live frontier counts as survival.
    """
    if r_max < 0:
        raise ValidationError("r_max must be non-negative")
    if vertex_cap < 1:
        raise ValidationError("vertex_cap must be at least 1")
    family.validate(v)
    is_open = cfg.is_open_fn()
    start = v.serialize()
    seen = {start}
    frontier = [start]
    spheres = [1]
    capped = False
    depth = last_alive = 0
    horizon = r_max if R_inf is None else max(r_max, R_inf)
    while depth < horizon and frontier:
        frontier, capped = _grow(family, is_open, frontier, seen, vertex_cap)
        depth += 1
        if frontier:
            last_alive = depth
        if depth <= r_max:
            spheres.append(len(frontier))
        if capped:
            break
    truncated = capped and depth <= r_max
    spheres.extend([0] * (r_max + 1 - len(spheres)))
    record = BallRecord(v, cfg.p, r_max, spheres, np.cumsum(spheres).tolist(),
                        0 in spheres, truncated,
                        master_seed=cfg.seed.master_seed,
                        sample_index=cfg.seed.sample_index)
    verdict = None
    if R_inf is not None:
        if capped and frontier and last_alive < R_inf:
            verdict = SurvivalVerdict(last_alive, "survived", R_inf, capped=True)
        else:
            ok = last_alive >= R_inf
            verdict = SurvivalVerdict(last_alive, "survived" if ok else "died", R_inf)
    return record, verdict


def finite_cluster_size(family: GraphFamily, cfg: EdgeConfig, v: VertexCode,
                        cap: int) -> int | None:
    """``|K_v|`` if it is below ``cap``, else ``None`` (censored)."""
    size, _, _, censored = cluster_transcript(family, cfg, v, cap)
    return None if censored else size


def cluster_transcript(family: GraphFamily, cfg: EdgeConfig, v: VertexCode, cap: int):
    """Explore ``K_v`` fully (up to ``cap`` vertices).

    Returns ``(size, n_open, n_closed, censored)`` where the edge counts cover
    every edge state the exploration read; these are what an importance
    weight ``(p/p')**n_open * ((1-p)/(1-p'))**n_closed`` needs.
    """
    if cap < 1:
        raise ValidationError("cap must be at least 1")
    family.validate(v)
    variate = cfg.variate_fn()
    p = cfg.p
    nbrs = family.neighbor_keys
    estr = family.edge_string
    start = v.serialize()
    seen = {start}
    frontier = [start]
    n_open = n_closed = 0
    while frontier:
        nxt = []
        for x in frontier:
            for y in nbrs(x):
                if y in seen:
                    continue
                if variate(estr(x, y)) < p:
                    n_open += 1
                    seen.add(y)
                    nxt.append(y)
                    if len(seen) >= cap:
                        return len(seen), n_open, n_closed, True
                else:
                    n_closed += 1
        frontier = nxt
    return len(seen), n_open, n_closed, False


def _explore_with_adjacency(family, cfg, v, R_inf, vertex_cap):
    """BFS to intrinsic radius R_inf reading every edge at radius < R_inf.

    Returns (dist, adjacency, truncated); vertices at distance R_inf are the
    frontier and their outward edges are not read.
    """
    is_open = cfg.is_open_fn()
    nbrs = family.neighbor_keys
    estr = family.edge_string
    start = v.serialize()
    dist = {start: 0}
    adj = {start: []}
    frontier = [start]
    level = 0
    while frontier and level < R_inf:
        nxt = []
        for x in frontier:
            for y in nbrs(x):
                dy = dist.get(y)
                if dy is not None and (dy < level or (dy == level and y < x)):
                    continue  # edge already read from the other side
                if not is_open(estr(x, y)):
                    continue
                if dy is None:
                    if len(dist) >= vertex_cap:
                        return dist, adj, True
                    dist[y] = level + 1
                    adj[y] = []
                    nxt.append(y)
                adj[x].append(y)
                adj[y].append(x)
        frontier = nxt
        level += 1
    return dist, adj, False


def hull_profile(family: GraphFamily, cfg: EdgeConfig, v: VertexCode, i_list, R_inf: int,
                 vertex_cap: int = DEFAULT_VERTEX_CAP) -> list[HullResult]:
    """Hull size and open edge boundary for every radius in ``i_list``.

    The hull of radius i is the intrinsic ball plus every explored cluster
    vertex from which every open path to the radius-``R_inf`` frontier meets
    the ball. A cluster that dies before ``R_inf`` is its own hull.
    """
    i_list = list(i_list)
    if any(i < 0 or i >= R_inf for i in i_list):
        raise ValidationError("hull radii must satisfy 0 <= i < R_inf")
    family.validate(v)
    dist, adj, truncated = _explore_with_adjacency(family, cfg, v, R_inf, vertex_cap)
    frontier = [u for u, d in dist.items() if d == R_inf]
    if not frontier:
        return [HullResult(len(dist), 0, False, truncated) for _ in i_list]
    out = []
    for i in i_list:
        outside = set(frontier)
        stack = list(frontier)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in outside and dist[y] > i:
                    outside.add(y)
                    stack.append(y)
        hull_size = len(dist) - len(outside)
        boundary = sum(1 for x in outside for y in adj[x] if y not in outside)
        out.append(HullResult(hull_size, boundary, True, truncated))
    return out


def explore_hull(family: GraphFamily, cfg: EdgeConfig, v: VertexCode, i: int, R_inf: int,
                 vertex_cap: int = DEFAULT_VERTEX_CAP) -> tuple[int, int]:
    res = hull_profile(family, cfg, v, [i], R_inf, vertex_cap)[0]
    return res.hull_size, res.open_boundary


# --- batched sampling -------------------------------------------------------

def map_samples(func, indices, threads: int = 1):
    """``[func(i) for i in indices]`` with an optional process pool.

    Results always come back in index order, so reductions over them do
    not depend on the number of workers.
    """
    indices = list(indices)
    if threads <= 1 or len(indices) < 2:
        return [func(i) for i in indices]
    n_chunks = min(len(indices), threads * 4)
    bounds = np.linspace(0, len(indices), n_chunks + 1).astype(int)
    chunks = [indices[a:b] for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=threads, mp_context=ctx) as pool:
        parts = pool.map(partial(_run_chunk, func), chunks)
        return [r for part in parts for r in part]


def _run_chunk(func, chunk):
    return [func(i) for i in chunk]


@dataclass
class ClusterSample:
    """Sphere sizes of ``n`` independent explorations from one vertex.

    ``spheres[k, r]`` is the size of the intrinsic sphere of radius r in
    sample k; ``survived`` is the survival-proxy verdict (``None`` if not
    requested); ``truncated`` marks samples that hit the vertex cap before
    ``r_max`` and must be left out of unbiased means.
    """

    family: GraphFamily
    p: float
    seed: int
    spheres: np.ndarray
    survived: np.ndarray | None
    truncated: np.ndarray
    R_inf: int | None
    engine: str
    vertex_cap: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return self.spheres.shape[0]

    @property
    def r_max(self) -> int:
        return self.spheres.shape[1] - 1

    @property
    def valid(self) -> np.ndarray:
        return ~self.truncated

    def balls(self) -> np.ndarray:
        return np.cumsum(self.spheres, axis=1)


def _bfs_sample(family, p, r_max, R_inf, cap, seed, center_key, i):
    cfg = EdgeConfig.make(seed, i, p)
    v = family.code(center_key)
    rec, verdict = explore(family, cfg, v, r_max, R_inf, cap)
    return rec.sphere_sizes, (verdict.survived if verdict is not None else False), rec.truncated


def sample_spheres_bfs(family: GraphFamily, p: float, r_max: int, n_samples: int, seed: int,
                       R_inf: int | None = None, vertex_cap: int = DEFAULT_VERTEX_CAP,
                       threads: int = 1, center: VertexCode | None = None,
                       first_index: int = 0) -> ClusterSample:
    """Hash-sampled BFS explorations for sample indices ``first_index + k``."""
    center = family.root() if center is None else center
    func = partial(_bfs_sample, family, p, r_max, R_inf, vertex_cap, seed, center.serialize())
    results = map_samples(func, range(first_index, first_index + n_samples), threads)
    spheres = np.array([r[0] for r in results], dtype=np.int64).reshape(n_samples, r_max + 1)
    survived = np.array([r[1] for r in results], dtype=bool) if R_inf is not None else None
    truncated = np.array([r[2] for r in results], dtype=bool)
    return ClusterSample(family, p, seed, spheres, survived, truncated, R_inf, "bfs", vertex_cap)
