"""Rate-accuracy bounds for discrete analysis tasks.

Compute how few bits any compression scheme needs to support a target
accuracy on a classification-style task, construct concrete coding schemes
that approach the bound, and quantify how far published systems sit from it.
"""

from .blahut_arimoto import (
    BaConvergenceWarning,
    BaSolution,
    DistortionSpec,
    ba_curve,
    ba_point,
    d_max,
    entropy,
    hamming_matrix,
    sweep_solutions,
)
from .coding import (
    AchievablePoint,
    Codebook,
    block_fixed_rate,
    block_huffman_rate,
    classify_then_code_point,
    fixed_length_rate,
    huffman_code,
    shortened_fixed_code,
)
from .detection import (
    DetectionModel,
    bits_per_pixel,
    detection_config_count,
    log2_of_count,
    sci_notation,
)
from .dms import (
    Pmf,
    RaCurve,
    RaPoint,
    RateSaturationWarning,
    accuracy_at_rate,
    accuracy_slope_approx,
    binary_entropy,
    closed_form_curve,
    closed_form_rate,
    linear_rate_approx,
)
from .harness import (
    AccuracyClampWarning,
    GapEntry,
    GapReport,
    SotaSeries,
    UndefinedGapWarning,
    convert_series_unit,
    emit_curve,
    gap_factor,
    gap_report,
    interpolate_bound_rate,
    load_pmf,
    load_sota,
    read_curve_csv,
    to_bits_per_image,
)

__version__ = "0.1.0"

__all__ = [
    "Pmf",
    "RaPoint",
    "RaCurve",
    "RateSaturationWarning",
    "binary_entropy",
    "closed_form_rate",
    "closed_form_curve",
    "accuracy_at_rate",
    "accuracy_slope_approx",
    "linear_rate_approx",
    "DistortionSpec",
    "BaSolution",
    "BaConvergenceWarning",
    "hamming_matrix",
    "ba_point",
    "ba_curve",
    "sweep_solutions",
    "entropy",
    "d_max",
    "Codebook",
    "AchievablePoint",
    "fixed_length_rate",
    "huffman_code",
    "shortened_fixed_code",
    "block_fixed_rate",
    "block_huffman_rate",
    "classify_then_code_point",
    "DetectionModel",
    "detection_config_count",
    "log2_of_count",
    "sci_notation",
    "bits_per_pixel",
    "SotaSeries",
    "GapEntry",
    "GapReport",
    "UndefinedGapWarning",
    "AccuracyClampWarning",
    "load_pmf",
    "load_sota",
    "to_bits_per_image",
    "convert_series_unit",
    "interpolate_bound_rate",
    "gap_factor",
    "gap_report",
    "emit_curve",
    "read_curve_csv",
]
