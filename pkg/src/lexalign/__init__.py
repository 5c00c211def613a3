"""lexalign: embedding-space analytics for word-category learnability."""

from .alignment import (
    AlignmentResult,
    SimilarityMatrix,
    align,
    alignment_strength,
    compare_true_vs_permuted,
    permutation_distribution,
    prototype_matrix,
    relative_alignment,
    rowwise_alignment,
    similarity_matrix,
)
from .aoa import (
    FeatureTable,
    assemble_features,
    load_aoa,
    load_frequency,
    run_regression,
)
from .data_model import (
    LexAlignError,
    LexicalSystem,
    LoadError,
    SubsampleError,
    SystemView,
    ValidationReport,
    WordEntry,
    full_view,
    load_system,
    save_system,
    subsample,
    validate,
)
from .explain import (
    ShapExplanation,
    brute_force_shap,
    global_importance,
    tree_shap,
)
from .gbt import BoostedModel, BoosterParams, RegressionTree, load_model, predict, save_model, train
from .metrics import (
    MetricsReport,
    category_discriminability,
    category_variability,
    centroid,
    system_metrics,
)
from .simulation import (
    AggregationCurve,
    AggregationGrid,
    aggregate_curve,
    aggregate_grid,
    gradient_field,
)
from .stats import (
    DegenerateDataError,
    TTestResult,
    percentile_ci,
    pooled_t_test,
    spearman,
)

__version__ = "0.1.0"
