"""Edge-isoperimetric ratio of small rooted connected sets, by exhaustive search."""
from __future__ import annotations

import math

from .. import ValidationError
from ..graphs import GraphFamily

MAX_EDGES_LIMIT = 12


def enumerate_rooted_sets(family: GraphFamily, max_edges: int):
    """Yield ``(n_vertices, n_induced_edges)`` for every connected vertex set
    containing the root whose induced subgraph has at most ``max_edges`` edges.

    Include/exclude branching over a candidate frontier visits each set once.
    """
    nbrs = family.neighbor_keys
    root = family.root().serialize()

    def rec(sub, n_edges, ext, excl):
        yield len(sub), n_edges
        ext = list(ext)
        excl = set(excl)
        while ext:
            w = ext.pop()
            nw = nbrs(w)
            add = sum(1 for u in nw if u in sub)
            if n_edges + add <= max_edges:
                sub.add(w)
                new_ext = ext + [u for u in nw if u not in sub and u not in excl
                                 and u not in ext]
                yield from rec(sub, n_edges + add, new_ext, excl)
                sub.discard(w)
            excl.add(w)

    yield from rec({root}, 0, nbrs(root), set())


def cheeger_profile(family: GraphFamily, max_edges: int) -> dict[int, float]:
    """Smallest ``|dE W| / |E(W)|`` for each induced edge count ``1..max_edges``."""
    if not 1 <= max_edges <= MAX_EDGES_LIMIT:
        raise ValidationError(f"max_edges must lie in [1, {MAX_EDGES_LIMIT}]")
    deg = family.degree
    best = {}
    for n_v, n_e in enumerate_rooted_sets(family, max_edges):
        if n_e == 0:
            continue
        ratio = (deg * n_v - 2 * n_e) / n_e
        if ratio < best.get(n_e, math.inf):
            best[n_e] = ratio
    return dict(sorted(best.items()))


def cheeger_constant_bruteforce(family: GraphFamily, max_edges: int = MAX_EDGES_LIMIT) -> float:
    """Upper bound on the edge Cheeger ratio ``inf |dE W| / |E(W)|``.

    The minimum runs over rooted connected sets with at most ``max_edges``
    induced edges, so it can only decrease as ``max_edges`` grows.
    """
    return min(cheeger_profile(family, max_edges).values())


def boundary_fraction(phi_edge: float) -> float:
    """Closed share of the edges a set touches, ``phi / (1 + phi)``."""
    return phi_edge / (1.0 + phi_edge)
