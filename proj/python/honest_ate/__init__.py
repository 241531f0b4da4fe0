"""Minimax-linear treatment-effect estimation with bias-aware honest CIs.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface. Installed wheels ship the extension inside the package;
in a plain CMake build tree it sits on sys.path instead.
"""

try:
    from . import _core
except ImportError:  # build-tree layout
    import _core

__all__ = [
    "HonestAteError",
    "LinearEstimate",
    "LipschitzSpec",
    "NormSpec",
    "Sample",
    "SolutionPath",
    "TargetWeights",
    "critical_value",
    "difference_in_means",
    "efficiency_bounds",
    "feasible_pipeline",
    "lindeberg_ratio",
    "matching_weights",
    "nn_variance",
    "normal_quantile",
    "robust_se",
    "solve_modulus_qp",
    "target_weights",
    "trace_path",
    "tune",
    "weights_at",
    "worst_case_bias",
]

for _name in __all__:
    globals()[_name] = getattr(_core, _name)
del _name
