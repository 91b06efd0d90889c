"""Triangle-diagram diagnostic on trees."""
from __future__ import annotations

from .. import ValidationError
from ..graphs import GraphFamily, RegularTree
from ..oracles.spectral import triangle_diagnostic_values


def triangle_diagnostic(family: GraphFamily, p: float, k_list, L: int):
    """``[(k, (T_p^2 P^k T_p)(v, v), tail_estimate)]`` on B(v, L).

    Every vertex of a transitive tree gives the same diagonal entry, so the
    supremum over v is the value at the root. Raises PrecisionError if the
    truncation tail exceeds 10% of a value.
    """
    if not isinstance(family, RegularTree):
        raise ValidationError("the triangle diagnostic is exact only on regular trees")
    return triangle_diagnostic_values(family.d, p, list(k_list), L)


def strictly_decreasing(values) -> bool:
    return all(b < a for a, b in zip(values, values[1:]))
