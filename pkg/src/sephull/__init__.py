"""Separability-entanglement classification for bipartite quantum states:
random-state generation and PPT labeling, convex-hull membership scores via
linear programming, imbalance-aware tree ensembles, and experiment tooling.
"""

from .states import (
    BipartiteDims,
    DensityMatrix,
    FeatureVector,
    GellMannBasis,
    GroundTruthLabel,
    LabelSource,
    PptExactLabeler,
    density_matrix,
    derive_rng,
    dirichlet_simplex,
    from_feature,
    gell_mann_basis,
    haar_unitary,
    is_ppt,
    label_state,
    partial_transpose,
    random_density_matrix,
    random_pure_product,
    to_feature,
)
from .lp import LinearProgram, LpSolution, UnboundedProgramError, lp_maximize
from .hull import (
    ChaApproxLabeler,
    ChaScore,
    HullModel,
    SmallHullWarning,
    alpha_max,
    alpha_scores,
    cha_classify,
    load_hull,
    sample_hull,
    save_hull,
)
from .tree import DecisionTree, TreeParams, tree_predict
from .ensembles import (
    Aggregation,
    EnsembleKind,
    EnsembleModel,
    TrainingSet,
    ensemble_predict,
    load_model,
    predict_batch,
    random_undersample,
    save_model,
    smote,
    train_adaboost,
    train_bagging,
    train_rusboost,
    train_tree,
)
from .metrics import ConfusionMatrix, MetricsReport, compute_metrics, confusion, prevalence_difference
from .data import (
    LabeledDataset,
    attach_alpha,
    carve_prevalence_subset,
    generate_dataset,
    load_csv,
    save_csv,
    split_train_test,
)
from .experiments import (
    ExperimentConfig,
    ResultRow,
    desk_config,
    paper_config,
    run_baseline,
    run_experiment1,
    run_experiment2,
    run_experiment3,
    save_results,
)

__version__ = "0.1.0"
