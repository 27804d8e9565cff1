"""Ensemble trainers over binary-labeled feature rows: bagging, AdaBoost,
and RUSBoost, plus the random under-sampling and SMOTE resamplers they use.

Labels are {0, 1} at every interface; boosting maps them to {-1, +1}
internally for margins. Tie rules, recorded for reproducibility: vote ties
predict 0 (entangled), split-threshold ties route left.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .tree import DecisionTree, TreeParams, fit_tree, predict_label, tree_predict

WEIGHT_SUM_TOL = 1e-9
ZERO_ERROR_TOL = 1e-10

__all__ = [
    "TrainingSet",
    "EnsembleKind",
    "Aggregation",
    "EnsembleModel",
    "train_tree",
    "train_bagging",
    "train_adaboost",
    "train_rusboost",
    "random_undersample",
    "smote",
    "ensemble_predict",
    "predict_batch",
    "save_model",
    "load_model",
    "tree_predict",
    "TreeParams",
]


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Feature matrix with binary labels and a probability weight vector."""

    features: np.ndarray
    labels: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        n = self.features.shape[0]
        if self.features.ndim != 2 or n == 0:
            raise ValueError("features must be a nonempty 2-D matrix")
        if self.labels.shape != (n,) or self.weights.shape != (n,):
            raise ValueError("labels and weights must match the feature row count")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if (self.weights < 0).any() or abs(self.weights.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError("weights must be nonnegative and sum to 1 within 1e-9")

    @classmethod
    def from_arrays(cls, features, labels, weights=None) -> "TrainingSet":
        """Build a training set; weights default to uniform."""
        features = np.asarray(features, dtype=float)
        labels = np.asarray(labels, dtype=np.int64)
        if weights is None:
            weights = np.full(features.shape[0], 1.0 / features.shape[0])
        else:
            weights = np.asarray(weights, dtype=float)
        return cls(features=features, labels=labels, weights=weights)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    def class_counts(self) -> tuple[int, int]:
        """(positives, negatives)."""
        pos = int(self.labels.sum())
        return pos, self.n - pos


class EnsembleKind(Enum):
    BAGGING = "bagging"
    BOOSTING = "boosting"
    RUSBOOST = "rusboost"


class Aggregation(Enum):
    MAJORITY_VOTE = "majority_vote"
    WEIGHTED_VOTE = "weighted_vote"


@dataclass(eq=False)
class EnsembleModel:
    """Trained ensemble: weighted trees plus an aggregation rule."""

    learners: list[DecisionTree]
    learner_weights: np.ndarray
    aggregation: Aggregation
    kind: EnsembleKind
    params: TreeParams
    fit_view_counts: list[tuple[int, int]] = field(default_factory=list)
    history: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if len(self.learners) != self.learner_weights.shape[0]:
            raise ValueError("learners and learner_weights must have equal length")
        if (self.learner_weights < 0).any():
            raise ValueError("learner weights must be nonnegative")
        expected = (
            Aggregation.MAJORITY_VOTE if self.kind is EnsembleKind.BAGGING else Aggregation.WEIGHTED_VOTE
        )
        if self.aggregation is not expected:
            raise ValueError(f"{self.kind.value} must aggregate by {expected.value}")


def train_tree(data: TrainingSet, params: TreeParams = TreeParams()) -> DecisionTree:
    """Weighted CART base learner (see :mod:`sephull.tree`)."""
    return fit_tree(data.features, data.labels, data.weights, params)


def train_bagging(
    data: TrainingSet,
    n_learners: int = 100,
    params: TreeParams = TreeParams(),
    rng: np.random.Generator | None = None,
) -> EnsembleModel:
    """Bootstrap-aggregated trees with majority voting.

    Each learner fits a with-replacement replicate of size n drawn with
    uniform probability; learner order never affects predictions.
    """
    if n_learners < 1:
        raise ValueError(f"n_learners must be >= 1, got {n_learners}")
    rng = rng if rng is not None else np.random.default_rng()
    learners = []
    uniform = np.full(data.n, 1.0 / data.n)
    for _ in range(n_learners):
        take = rng.integers(0, data.n, size=data.n)
        learners.append(fit_tree(data.features[take], data.labels[take], uniform, params))
    return EnsembleModel(
        learners=learners,
        learner_weights=np.ones(n_learners),
        aggregation=Aggregation.MAJORITY_VOTE,
        kind=EnsembleKind.BAGGING,
        params=params,
    )


def _boost_round_update(weights, labels, predicted, error):
    """AdaBoost reweighting; returns (new_weights, learner_weight).

    After the update the just-fitted learner has weighted error exactly 1/2:
    misclassified mass eps * e^w and correct mass (1-eps) * e^-w both scale
    to sqrt(eps(1-eps)).
    """
    w_t = 0.5 * np.log((1.0 - error) / error)
    signs = np.where(predicted == labels, -1.0, 1.0)
    new = weights * np.exp(w_t * signs)
    return new / new.sum(), w_t


def _boost_round(data, view, full_weights, params, rng):
    """One boosting round: fit on the view, score on the full data, update
    the full-data weight vector.

    Returns (tree, learner_weight, error, new_full_weights, stop).
    """
    tree = fit_tree(view.features, view.labels, view.weights, params)
    predicted = predict_label(tree, data.features)
    error = float(full_weights[predicted != data.labels].sum())

    if error >= 0.5:
        # Degenerate round: reset to uniform weights and refit on a bootstrap
        # resample to break the symmetry; a still-failing learner gets weight 0.
        full_weights = np.full(data.n, 1.0 / data.n)
        take = rng.integers(0, data.n, size=data.n)
        tree = fit_tree(data.features[take], data.labels[take], np.full(data.n, 1.0 / data.n), params)
        predicted = predict_label(tree, data.features)
        error = float(full_weights[predicted != data.labels].sum())
        if error >= 0.5:
            return tree, 0.0, error, full_weights, False

    if error <= ZERO_ERROR_TOL:
        return tree, float(np.log(1.0 / ZERO_ERROR_TOL)), error, full_weights, True

    new_weights, w_t = _boost_round_update(full_weights, data.labels, predicted, error)
    return tree, w_t, error, new_weights, False


def train_adaboost(
    data: TrainingSet,
    n_rounds: int = 100,
    params: TreeParams = TreeParams(),
    rng: np.random.Generator | None = None,
    record_history: bool = False,
) -> EnsembleModel:
    """AdaBoost with CART weak learners and weighted voting.

    Misclassified samples gain weight exp(+w_t), correct ones lose exp(-w_t),
    with w_t = 0.5 ln((1-eps)/eps). A zero-error round terminates boosting
    early with that learner weighted ln(1/1e-10); a round with eps >= 0.5
    resets the weights and refits on a bootstrap resample.
    """
    if n_rounds < 1:
        raise ValueError(f"n_rounds must be >= 1, got {n_rounds}")
    rng = rng if rng is not None else np.random.default_rng()
    learners: list[DecisionTree] = []
    learner_weights: list[float] = []
    history: list[dict] = []
    weights = data.weights.copy()
    for _ in range(n_rounds):
        view = TrainingSet(data.features, data.labels, weights)
        tree, w_t, error, weights, stop = _boost_round(data, view, weights, params, rng)
        learners.append(tree)
        learner_weights.append(w_t)
        if record_history:
            history.append({"error": error, "learner_weight": w_t, "weights": weights.copy()})
        if stop:
            break
    return EnsembleModel(
        learners=learners,
        learner_weights=np.asarray(learner_weights),
        aggregation=Aggregation.WEIGHTED_VOTE,
        kind=EnsembleKind.BOOSTING,
        params=params,
        history=history,
    )


def random_undersample(data: TrainingSet, rng: np.random.Generator) -> TrainingSet:
    """Drop majority-class rows uniformly at random until the classes are
    exactly balanced (50:50); minority rows are never touched. Weights of the
    retained rows are renormalized.
    """
    pos, neg = data.class_counts()
    if pos == 0 or neg == 0:
        raise ValueError("undersampling needs both classes present")
    if pos == neg:
        return data
    majority_label = 1 if pos > neg else 0
    maj_idx = np.nonzero(data.labels == majority_label)[0]
    keep_count = min(pos, neg)
    kept_maj = rng.choice(maj_idx, size=keep_count, replace=False)
    keep = np.sort(np.concatenate([np.nonzero(data.labels != majority_label)[0], kept_maj]))
    w = data.weights[keep]
    return TrainingSet(data.features[keep], data.labels[keep], w / w.sum())


def smote(
    data: TrainingSet,
    k_neighbors: int = 5,
    n_synthetic: int = 0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Synthetic minority rows by interpolating nearest minority neighbors.

    Each synthetic point is ``x_i + u (x_nn - x_i)`` for a random minority
    sample, one of its k nearest minority neighbors (Euclidean) and
    u ~ U[0, 1]. Returns an (n_synthetic, k) array of feature rows.
    """
    pos, neg = data.class_counts()
    minority_label = 0 if neg < pos else 1  # count tie treats the positive class as minority
    minority = data.features[data.labels == minority_label]
    if minority.shape[0] < 2:
        raise ValueError("SMOTE needs at least 2 minority samples")
    if k_neighbors < 1:
        raise ValueError(f"k_neighbors must be >= 1, got {k_neighbors}")
    if n_synthetic == 0:
        return np.empty((0, data.features.shape[1]))
    rng = rng if rng is not None else np.random.default_rng()
    k = min(k_neighbors, minority.shape[0] - 1)
    diff = minority[:, None, :] - minority[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    neighbors = np.argsort(dist, axis=1, kind="stable")[:, :k]
    base = rng.integers(0, minority.shape[0], size=n_synthetic)
    pick = rng.integers(0, k, size=n_synthetic)
    u = rng.random(n_synthetic)
    nn = neighbors[base, pick]
    return minority[base] + u[:, None] * (minority[nn] - minority[base])


def _balanced_view(data: TrainingSet, weights, rng, use_smote, k_neighbors, smote_synthetics):
    """Per-round RUSBoost fitting view: optional SMOTE synthetics (inheriting
    the average minority weight), then random undersampling to exact balance."""
    pool = TrainingSet(data.features, data.labels, weights)
    if use_smote:
        pos, neg = pool.class_counts()
        minority_label = 0 if neg < pos else 1
        n_min = min(pos, neg)
        n_syn = smote_synthetics if smote_synthetics is not None else n_min
        if n_syn > 0:
            synth = smote(pool, k_neighbors=k_neighbors, n_synthetic=n_syn, rng=rng)
            syn_w = np.full(n_syn, weights[data.labels == minority_label].mean())
            all_w = np.concatenate([weights, syn_w])
            pool = TrainingSet(
                np.vstack([data.features, synth]),
                np.concatenate([data.labels, np.full(n_syn, minority_label, dtype=np.int64)]),
                all_w / all_w.sum(),
            )
    view = random_undersample(pool, rng)
    return TrainingSet(view.features, view.labels, view.weights / view.weights.sum())


def train_rusboost(
    data: TrainingSet,
    n_rounds: int = 100,
    params: TreeParams = TreeParams(),
    rng: np.random.Generator | None = None,
    use_smote: bool = False,
    k_neighbors: int = 5,
    smote_synthetics: int | None = None,
    record_history: bool = False,
) -> EnsembleModel:
    """AdaBoost whose per-round learner fits a class-balanced view of the data.

    Each round the current weighted sample is undersampled to exact balance
    (optionally padded first with SMOTE synthetics carrying the average
    minority weight); the weight update always runs on the full original
    data, never on the view.
    """
    if n_rounds < 1:
        raise ValueError(f"n_rounds must be >= 1, got {n_rounds}")
    pos, neg = data.class_counts()
    if pos == 0 or neg == 0:
        raise ValueError("RUSBoost needs both classes present")
    rng = rng if rng is not None else np.random.default_rng()
    learners: list[DecisionTree] = []
    learner_weights: list[float] = []
    history: list[dict] = []
    fit_view_counts: list[tuple[int, int]] = []
    weights = data.weights.copy()
    for _ in range(n_rounds):
        view = _balanced_view(data, weights, rng, use_smote, k_neighbors, smote_synthetics)
        fit_view_counts.append(view.class_counts())
        tree, w_t, error, weights, stop = _boost_round(data, view, weights, params, rng)
        learners.append(tree)
        learner_weights.append(w_t)
        if record_history:
            history.append({"error": error, "learner_weight": w_t, "weights": weights.copy()})
        if stop:
            break
    return EnsembleModel(
        learners=learners,
        learner_weights=np.asarray(learner_weights),
        aggregation=Aggregation.WEIGHTED_VOTE,
        kind=EnsembleKind.RUSBOOST,
        params=params,
        fit_view_counts=fit_view_counts,
        history=history,
    )


def predict_batch(model: EnsembleModel, x: np.ndarray) -> np.ndarray:
    """Aggregated binary predictions for every row of x."""
    x = np.asarray(x, dtype=float)
    votes = np.stack([predict_label(t, x) for t in model.learners])  # (T, n)
    if model.aggregation is Aggregation.MAJORITY_VOTE:
        pos_votes = votes.sum(axis=0)
        return (2 * pos_votes > len(model.learners)).astype(np.int64)  # exact tie -> 0
    margins = (model.learner_weights[:, None] * (2 * votes - 1)).sum(axis=0)
    return (margins > 0).astype(np.int64)  # zero-sum tie -> 0


def ensemble_predict(model: EnsembleModel, row: np.ndarray) -> int:
    """Aggregated binary prediction for a single feature row."""
    return int(predict_batch(model, np.asarray(row, dtype=float).reshape(1, -1))[0])


MODEL_MAGIC = "# sephull ensemble model v1"


def save_model(model: EnsembleModel, path) -> None:
    """Persist an ensemble as flat text.

    Layout: magic line; ``key=value`` header lines (kind, aggregation,
    n_learners, max_depth, min_leaf, learner_weights); then per learner a
    ``tree <i> n_features=<k> n_nodes=<N>`` line followed by one node line
    ``feature threshold left right p_pos`` per node (feature -1 for leaves).
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(MODEL_MAGIC + "\n")
        fh.write(f"kind={model.kind.value}\n")
        fh.write(f"aggregation={model.aggregation.value}\n")
        fh.write(f"n_learners={len(model.learners)}\n")
        fh.write(f"max_depth={model.params.max_depth}\n")
        fh.write(f"min_leaf={model.params.min_leaf}\n")
        fh.write("learner_weights=" + ",".join(repr(float(w)) for w in model.learner_weights) + "\n")
        for i, tree in enumerate(model.learners):
            fh.write(f"tree {i} n_features={tree.n_features} n_nodes={tree.n_nodes}\n")
            for j in range(tree.n_nodes):
                fh.write(
                    f"{tree.feature[j]} {repr(float(tree.threshold[j]))} "
                    f"{tree.left[j]} {tree.right[j]} {repr(float(tree.p_pos[j]))}\n"
                )


def load_model(path) -> EnsembleModel:
    """Read a model written by :func:`save_model`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MODEL_MAGIC:
        raise ValueError(f"{path}: not a sephull model file")
    header = {}
    pos = 1
    while pos < len(lines) and "=" in lines[pos] and not lines[pos].startswith("tree "):
        key, value = lines[pos].split("=", 1)
        header[key] = value
        pos += 1
    params = TreeParams(max_depth=int(header["max_depth"]), min_leaf=int(header["min_leaf"]))
    weights = np.array([float(v) for v in header["learner_weights"].split(",")]) if header[
        "learner_weights"
    ] else np.empty(0)
    learners = []
    for _ in range(int(header["n_learners"])):
        head = lines[pos].split()
        if head[0] != "tree":
            raise ValueError(f"{path}: line {pos + 1}: expected a tree header")
        n_features = int(head[2].split("=")[1])
        n_nodes = int(head[3].split("=")[1])
        pos += 1
        feature, threshold, left, right, p_pos = [], [], [], [], []
        for j in range(n_nodes):
            cells = lines[pos + j].split()
            feature.append(int(cells[0]))
            threshold.append(float(cells[1]))
            left.append(int(cells[2]))
            right.append(int(cells[3]))
            p_pos.append(float(cells[4]))
        pos += n_nodes
        learners.append(
            DecisionTree(
                n_features=n_features,
                feature=np.asarray(feature, dtype=np.int32),
                threshold=np.asarray(threshold),
                left=np.asarray(left, dtype=np.int32),
                right=np.asarray(right, dtype=np.int32),
                p_pos=np.asarray(p_pos),
            )
        )
    return EnsembleModel(
        learners=learners,
        learner_weights=weights,
        aggregation=Aggregation(header["aggregation"]),
        kind=EnsembleKind(header["kind"]),
        params=params,
    )
