"""Variance of the number of vertices of a ball lying in infinite clusters."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .. import ValidationError
from ..explore import map_samples
from ..graphs import GraphFamily, RegularTree
from ..gw import _STREAM_SUBTREE, block_rng, subtree_survival
from ..oracles.spectral import operator_norm, tree_norm_exact
from ..sampler import EdgeConfig
from .sampling import default_R_inf

NORM_RADIUS = 60


@dataclass
class VarianceCheck:
    p: float
    L: int
    ball_size: int
    n_samples: int
    R_inf: int
    mean: float
    variance: float
    theta_hat: float
    norm_used: float
    norm_exact: float
    bound: float
    holds: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


class _Ball:
    """Index structure for B(root, L) on a tree: vertices, inner edges, and
    the number of outward edges leaving each depth-L vertex."""

    def __init__(self, family: RegularTree, L: int):
        verts = [v.serialize() for v in family.ball_enumerate(family.root(), L)]
        self.index = {k: i for i, k in enumerate(verts)}
        self.keys = verts
        self.edges = []
        self.outward = []  # (vertex index, edge string) for edges crossing the sphere
        for k in verts:
            for c in family.child_keys(k):
                e = family.edge_string(k, c)
                if c in self.index:
                    self.edges.append((self.index[k], self.index[c], e))
                else:
                    self.outward.append((self.index[k], e))


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def _infinite_count(family, ball, p, R_inf, seed, i):
    """``|A_inf|`` for sample i: edges inside the ball come from the hash
    sampler; beyond each open outward edge an independent subtree is grown by
    generation counts to decide whether it reaches R_inf further levels."""
    cfg = EdgeConfig.make(seed, i, p)
    is_open = cfg.is_open_fn()
    n = len(ball.keys)
    parent = list(range(n))
    for a, b, e in ball.edges:
        if is_open(e):
            ra, rb = _find(parent, a), _find(parent, b)
            if ra != rb:
                parent[ra] = rb
    crossing = [v for v, e in ball.outward if is_open(e)]
    rng = block_rng(_STREAM_SUBTREE, seed, i)
    alive = subtree_survival(family.d, p, len(crossing), R_inf, rng)
    good = {_find(parent, v) for v, ok in zip(crossing, alive) if ok}
    return sum(1 for x in range(n) if _find(parent, x) in good)


def variance_bound_check(family: GraphFamily, p: float, L: int, n_samples: int, seed: int,
                         R_inf: int | None = None, threads: int = 1,
                         norm_radius: int = NORM_RADIUS) -> VarianceCheck:
    """Empirical ``Var|A_inf|`` for ``A = B(v, L)`` against ``theta * ||T_p||^2 |A|``.

    ``||T_p||`` is the power-iteration value on ``B(v, norm_radius)``, a lower
    bound on the true norm, so the evaluated bound is never larger than the
    one with the exact norm (also reported). ``theta`` is estimated as
    ``E|A_inf| / |A|``.
    """
    if not isinstance(family, RegularTree):
        raise ValidationError("the variance check is implemented on regular trees")
    if L < 0:
        raise ValidationError("L must be non-negative")
    if n_samples < 2:
        raise ValidationError("need at least two samples for a variance")
    R_inf = default_R_inf(family, p) if R_inf is None else R_inf
    ball = _Ball(family, L)
    if p == 0.0:
        counts = np.zeros(n_samples)
    else:
        func = partial(_infinite_count, family, ball, p, R_inf, seed)
        counts = np.array(map_samples(func, range(n_samples), threads), dtype=float)
    size = len(ball.keys)
    mean = float(counts.mean())
    var = float(counts.var(ddof=1))
    theta = mean / size
    norm = operator_norm(family, p, norm_radius)[0] if p > 0 else 1.0
    exact = tree_norm_exact(family.d, p)
    bound = theta * norm ** 2 * size
    holds = var <= bound if bound > 0 else var == 0.0
    return VarianceCheck(p, L, size, n_samples, R_inf, mean, var, theta, norm,
                         exact if math.isfinite(exact) else math.inf, bound, bool(holds))
