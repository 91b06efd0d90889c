"""Monte Carlo estimators with standard errors and fitted exponents."""
from .genfun import (differential_inequality_check, genfun_blowup_experiment, genfun_eval,
                     tauberian_bound_check)
from .growth import (GrowthTable, RateFit, growth_table, kesten_stigum_experiment,
                     rate_fit, rate_scaling_experiment)
from .isoperimetry import (IsoperimetryReport, bs_formula, cheeger_bounds, cheeger_lower,
                           hull_ratio_profile, zeta_estimate)
from .sampling import sample_clusters
from .spectral import triangle_diagnostic
from .variance import variance_bound_check

__all__ = [
    "GrowthTable", "IsoperimetryReport", "RateFit", "bs_formula", "cheeger_bounds",
    "cheeger_lower", "differential_inequality_check", "genfun_blowup_experiment",
    "genfun_eval", "growth_table", "hull_ratio_profile", "kesten_stigum_experiment",
    "rate_fit", "rate_scaling_experiment", "sample_clusters", "tauberian_bound_check",
    "triangle_diagnostic", "variance_bound_check", "zeta_estimate",
]
