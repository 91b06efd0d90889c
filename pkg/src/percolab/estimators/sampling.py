"""Engine dispatch: hash-sampled BFS on any family, generation counts on trees."""
from __future__ import annotations

import numpy as np

from .. import ValidationError
from ..explore import DEFAULT_VERTEX_CAP, ClusterSample, sample_spheres_bfs
from ..graphs import GraphFamily, RegularTree
from ..gw import closed_form_spheres, sample_spheres_gw

ENGINES = ("auto", "bfs", "gw")


def resolve_engine(family: GraphFamily, engine: str) -> str:
    if engine not in ENGINES:
        raise ValidationError(f"unknown engine {engine!r}; choose from {ENGINES}")
    if engine == "auto":
        return "gw" if isinstance(family, RegularTree) else "bfs"
    if engine == "gw" and not isinstance(family, RegularTree):
        raise ValidationError("the gw engine needs a regular tree")
    return engine


def default_R_inf(family: GraphFamily, p: float) -> int:
    """``max(60, 6 / (p - p_c))`` above p_c, else 60."""
    pc = family.pc
    if pc is None or p <= pc:
        return 60
    return max(60, int(np.ceil(6.0 / (p - pc))))


def sample_clusters(family: GraphFamily, p: float, r_max: int, n_samples: int, seed: int,
                    R_inf: int | None = None, engine: str = "auto", threads: int = 1,
                    vertex_cap: int = DEFAULT_VERTEX_CAP) -> ClusterSample:
    """Sphere-size samples from the requested engine.

    p = 0 and (on trees) p = 1 skip sampling and use the deterministic answer.
    """
    if r_max < 0:
        raise ValidationError("r_max must be non-negative")
    if n_samples < 1:
        raise ValidationError("n_samples must be positive")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p must lie in [0, 1], got {p!r}")
    engine = resolve_engine(family, engine)
    if p == 0.0 or (p == 1.0 and isinstance(family, RegularTree)):
        horizon = r_max if R_inf is None else max(r_max, R_inf)
        z = closed_form_spheres(family, p, horizon, n_samples)
        survived = None if R_inf is None else z[:, R_inf] > 0
        return ClusterSample(family, p, seed, z[:, : r_max + 1].copy(), survived,
                             np.zeros(n_samples, dtype=bool), R_inf, "closed-form")
    if engine == "gw":
        return sample_spheres_gw(family, p, r_max, n_samples, seed, R_inf, threads)
    return sample_spheres_bfs(family, p, r_max, n_samples, seed, R_inf, vertex_cap, threads)
