"""Exact ground truth: tree closed forms, spectral reductions, brute force."""
from .cheeger import cheeger_constant_bruteforce, cheeger_profile
from .spectral import (norm_blowup_onset, operator_norm, tree_norm_exact,
                       triangle_diagnostic_values)
from .tree import (OracleReport, TreeModel, alpha_p, brute_force_ball_expectation,
                   conditional_sphere_mean, extinction_fixed_point, oracle_report,
                   total_progeny_pmf, tree_genfun, tree_sphere_mean)

__all__ = [
    "OracleReport", "TreeModel", "alpha_p", "brute_force_ball_expectation",
    "cheeger_constant_bruteforce", "cheeger_profile", "conditional_sphere_mean",
    "extinction_fixed_point", "norm_blowup_onset", "operator_norm", "oracle_report",
    "total_progeny_pmf", "tree_genfun", "tree_norm_exact", "tree_sphere_mean",
    "triangle_diagnostic_values",
]
