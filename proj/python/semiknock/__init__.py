"""Semi-knockoff conditional independence testing."""

from ._semiknock import (
    benjamini_hochberg,
    fit_ridge,
    generate,
    inject_correlated_null,
    knockoff_threshold,
    run_semi_knockoffs,
    sign_test,
    wasserstein_1d,
    wilcoxon_signed_rank,
)

__all__ = [
    "benjamini_hochberg",
    "fit_ridge",
    "generate",
    "inject_correlated_null",
    "knockoff_threshold",
    "run_semi_knockoffs",
    "sign_test",
    "wasserstein_1d",
    "wilcoxon_signed_rank",
]
