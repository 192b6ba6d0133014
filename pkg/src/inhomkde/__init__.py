"""Kernel density estimation with spatially variable bandwidths.

Densities with isolated irregularities (jumps, kinks, blowing-up derivatives)
are estimated with a bandwidth that depends on the evaluation point, either
from the known smoothness class (:mod:`inhomkde.oracle`) or fully
data-driven (:mod:`inhomkde.lepski`).
"""

__version__ = "0.1.0"

from .kernel import (  # noqa: E402
    EPANECHNIKOV, GAUSSIAN, ORDER4, RECTANGULAR, Kernel, KernelNorms, compute_norms,
    diff_variance_bound, eval_scaled, get_kernel, polynomial_kernel, variance_bound, verify_order,
)
from .estimator import (  # noqa: E402
    EvaluationGrid, Sample, convolve_density, estimate_many, fixed_estimate, load_sample,
    variable_estimate,
)
from .oracle import (  # noqa: E402
    SmoothnessSpec, check_bias_dominated, h0_piecewise_holder, h0_pw_diff, h0_unbounded, kappa,
    oracle_bandwidth,
)
from .lepski import (  # noqa: E402
    BandwidthGrid, SelectorConfig, adaptive_estimate, build_grid, estimate_sup_norm, lam, psi,
    pseudo_oracle, select_bandwidth,
)
from .models import MODEL_NAMES, DensityModel, make_model, pdf_l2sq, sample  # noqa: E402
from .bench import BenchConfig, RiskReport, lp_risk, rate_slope, run_benchmark, scott_bandwidth  # noqa: E402

__all__ = [
    "EPANECHNIKOV", "GAUSSIAN", "ORDER4", "RECTANGULAR", "Kernel", "KernelNorms", "compute_norms",
    "diff_variance_bound", "eval_scaled", "get_kernel", "polynomial_kernel", "variance_bound", "verify_order",
    "EvaluationGrid", "Sample", "convolve_density", "estimate_many", "fixed_estimate", "load_sample",
    "variable_estimate",
    "SmoothnessSpec", "check_bias_dominated", "h0_piecewise_holder", "h0_pw_diff", "h0_unbounded", "kappa",
    "oracle_bandwidth",
    "BandwidthGrid", "SelectorConfig", "adaptive_estimate", "build_grid", "estimate_sup_norm", "lam", "psi",
    "pseudo_oracle", "select_bandwidth",
    "MODEL_NAMES", "DensityModel", "make_model", "pdf_l2sq", "sample",
    "BenchConfig", "RiskReport", "lp_risk", "rate_slope", "run_benchmark", "scott_bandwidth",
]
