"""Finite-dimensional models of isometric and unitary semigroups, with tools
for quantized/periodic approximation, stability diagnostics, and operator
metrics.
"""

from .hilbert import (
    DenseSequence,
    GridMismatchError,
    HVector,
    SumSpace,
    WeightedGrid,
    align,
    difference_norm,
    direct_sum_embed,
    inner_product,
    inner_product_aligned,
    pad_to_grid,
)
from .semigroups import (
    ConjugatedGroup,
    DirectSumSemigroup,
    InadmissibleTimeError,
    MultiplicationGroup,
    PeriodicShiftGroup,
    SemigroupModel,
    ShiftSemigroup,
    check_isometry,
    check_semigroup_law,
    check_unitarity,
    model_from_dict,
    model_to_dict,
    one_step_matrix,
    shift_grid,
)
from .constructions import (
    InflationResult,
    NotIsometricError,
    NotPeriodicError,
    QuantizationResult,
    WoldResult,
    approximate_isometry_by_aws,
    approximate_isometry_by_periodic,
    distinct_frequency_certificate,
    inflate_and_perturb,
    near_identity_aws,
    periodization_error_identity,
    periodize_shift,
    quantization_distance,
    quantize_symbol,
    wandering_subspace,
    wold_decompose,
    wold_decompose_matrix,
)
from .diagnostics import (
    ClassifyParams,
    CorrelationTrace,
    StabilityReport,
    VERDICTS,
    cesaro_mean_abs2,
    classify,
    correlation,
    density_estimate,
    detect_atoms,
    jgl_split,
    mt_membership,
    wiener_limit,
    wjkt_membership,
)
from .metrics import (
    MetricConfig,
    MetricValue,
    metric_contractive,
    metric_isometric,
    metric_unitary,
)

__version__ = "0.1.0"

__all__ = [
    "ClassifyParams",
    "ConjugatedGroup",
    "CorrelationTrace",
    "DenseSequence",
    "DirectSumSemigroup",
    "GridMismatchError",
    "HVector",
    "InadmissibleTimeError",
    "InflationResult",
    "MetricConfig",
    "MetricValue",
    "MultiplicationGroup",
    "NotIsometricError",
    "NotPeriodicError",
    "PeriodicShiftGroup",
    "QuantizationResult",
    "SemigroupModel",
    "ShiftSemigroup",
    "StabilityReport",
    "SumSpace",
    "VERDICTS",
    "WeightedGrid",
    "WoldResult",
    "align",
    "approximate_isometry_by_aws",
    "approximate_isometry_by_periodic",
    "cesaro_mean_abs2",
    "check_isometry",
    "check_semigroup_law",
    "check_unitarity",
    "classify",
    "correlation",
    "density_estimate",
    "detect_atoms",
    "difference_norm",
    "direct_sum_embed",
    "distinct_frequency_certificate",
    "inflate_and_perturb",
    "inner_product",
    "inner_product_aligned",
    "jgl_split",
    "metric_contractive",
    "metric_isometric",
    "metric_unitary",
    "model_from_dict",
    "model_to_dict",
    "mt_membership",
    "near_identity_aws",
    "one_step_matrix",
    "pad_to_grid",
    "periodization_error_identity",
    "periodize_shift",
    "quantization_distance",
    "quantize_symbol",
    "shift_grid",
    "wandering_subspace",
    "wiener_limit",
    "wjkt_membership",
    "wold_decompose",
    "wold_decompose_matrix",
]
