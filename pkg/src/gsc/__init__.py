"""Significance and confidence estimation for paired genomic feature
tracks under a piecewise-stationary model: dyadic segmentation,
segmented block subsampling, paired-block null sampling, and a double
bootstrap, with cluster-process simulators for validation."""

__version__ = "0.1.0"

from .errors import (
    DegenerateDenominatorError,
    FeasibilityError,
    GscError,
    InputError,
    ParameterError,
)
from .segmentation import (
    Segmentation,
    SegmentationParams,
    dyadic_segment,
    glr_profile,
    merge_segmentations,
    segment_pair,
    subsample_variance_profile,
)
from .stats import (
    OverlapStatistic,
    StatValue,
    WindowMeanStatistic,
    bp_overlap_fraction,
    delta_variance_bp,
    mean_overlap,
    region_overlap,
    window_mean,
)
from .subsampling import (
    ConfidenceInterval,
    ReplicateDistribution,
    SubsampleParams,
    ci_gaussian,
    ci_percentile,
    draw_stationary,
    draw_stratified,
    normality_diagnostic,
    select_block_size,
    subsample_replicates,
    subsample_variance,
)
from .testing import (
    TestParams,
    TestResult,
    conditional_center,
    double_bootstrap_region_overlap,
    null_replicate_bp,
    shuffle_baseline,
    test_bp_overlap,
)
from .simulate import (
    DerivedFeatureRule,
    MarkovParams,
    NeymanScottParams,
    NeymanScottRegion,
    derive_features,
    simulate_markov,
    simulate_neyman_scott,
    simulate_piecewise_pair,
)
from .tracks import (
    CoordinateSpace,
    FeatureTrack,
    TrackPair,
    indicator_sum,
    instances,
    load_bed,
)
