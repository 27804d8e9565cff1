"""Experiment runners: baseline ensembles on raw features, hull-size sweep,
training-fraction sweep, and prevalence-difference sweep, with repetition
averaging and deterministic CSV emission.

Every run is a pure function of its config: per-repetition streams derive
from (master seed, experiment code, repetition, role), so sweep points inside
a repetition share their split (paired comparisons) and re-runs are
byte-identical. Rows are sorted before writing, making output independent of
execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import (
    LabeledDataset,
    attach_alpha,
    carve_prevalence_subset,
    generate_dataset,
    split_train_test,
)
from .ensembles import TrainingSet, train_adaboost, train_bagging, train_rusboost, predict_batch
from .hull import ChaApproxLabeler, HullModel, sample_hull
from .metrics import CSV_HEADER, compute_metrics, confusion
from .states import BipartiteDims, PptExactLabeler, derive_rng
from .tree import TreeParams

EXPERIMENT_CODES = {"baseline": 0, "exp1": 1, "exp2": 2, "exp3": 3}
_ROLE_SPLIT, _ROLE_CARVE, _ROLE_TRAIN = 0, 1, 2
_SEED_DATA, _SEED_HULL, _SEED_LABEL_HULL = 100, 101, 102

BASELINE_CLASSIFIERS = ("bagging", "boosting")
CHA_CLASSIFIERS = ("cha", "bcha", "rusbcha")

# Prevalence ladders from the reference tables (per-class sample counts).
TABLE_IV_LADDER = (
    (1800, 37186), (2814, 33000), (2814, 18000), (2814, 14000), (2814, 10000),
    (2814, 8000), (2814, 5500), (2814, 4500), (2814, 3500), (2814, 3000),
)
TABLE_V_LADDER = (
    (600, 13249), (1380, 13249), (2200, 13249), (3200, 13249), (4200, 13249),
    (5500, 13249), (6751, 13000), (6751, 10500), (6751, 8500), (6751, 7000),
)
# Desk-scale ladders follow the same prevalence-difference profile but are
# sized for the regenerated pools (see desk_config).
DESK_LADDER_2X2 = (
    (240, 4980), (376, 4410), (376, 2405), (376, 1871), (376, 1336),
    (376, 1069), (376, 735), (376, 601), (376, 468), (376, 401),
)
DESK_LADDER_3X3 = (
    (12, 260), (12, 120), (12, 80), (14, 60), (16, 52),
    (20, 48), (24, 46), (24, 37), (24, 30), (24, 25),
)


@dataclass(frozen=True)
class ExperimentConfig:
    dims: BipartiteDims
    classifiers: tuple[str, ...]
    n: int
    repetitions: int
    master_seed: int = 0
    theta: float = 0.5
    m: int = 1000
    m_grid: tuple[int, ...] = ()
    fractions: tuple[float, ...] = ()
    ladder: tuple[tuple[int, int], ...] = ()
    train_fraction: float = 0.5
    n_learners: int = 50
    max_depth: int = 8
    min_leaf: int = 5
    use_smote: bool = False
    alpha_cap: float = 100.0
    label_hull_m: int = 2000
    preset: str = "custom"

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.n < 2:
            raise ValueError("dataset size must be >= 2")
        if self.m < 1 or any(m < 1 for m in self.m_grid):
            raise ValueError("every hull size must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if any(not 0.0 < f < 1.0 for f in self.fractions):
            raise ValueError("every training fraction must lie in (0, 1)")
        if not self.classifiers:
            raise ValueError("at least one classifier is required")

    @property
    def tree_params(self) -> TreeParams:
        return TreeParams(max_depth=self.max_depth, min_leaf=self.min_leaf)

    def header_items(self) -> list[tuple[str, str]]:
        return [
            ("alpha_cap", repr(float(self.alpha_cap))),
            ("classifiers", "+".join(self.classifiers)),
            ("dims", str(self.dims)),
            ("fractions", "+".join(repr(float(f)) for f in self.fractions)),
            ("label_hull_m", str(self.label_hull_m)),
            ("ladder", "+".join(f"{s}:{e}" for s, e in self.ladder)),
            ("m", str(self.m)),
            ("m_grid", "+".join(str(m) for m in self.m_grid)),
            ("master_seed", str(self.master_seed)),
            ("max_depth", str(self.max_depth)),
            ("min_leaf", str(self.min_leaf)),
            ("n", str(self.n)),
            ("n_learners", str(self.n_learners)),
            ("preset", self.preset),
            ("repetitions", str(self.repetitions)),
            ("theta", repr(float(self.theta))),
            ("train_fraction", repr(float(self.train_fraction))),
            ("use_smote", str(int(self.use_smote))),
        ]


def desk_config(dims: BipartiteDims, experiment: str, master_seed: int = 0) -> ExperimentConfig:
    """Desk-scale preset: minutes, not hours, at reduced n/m/repetitions."""
    _check_experiment(experiment)
    two_qubit = dims.d <= 6
    base = ExperimentConfig(
        dims=dims,
        classifiers=BASELINE_CLASSIFIERS if experiment == "baseline" else
        (CHA_CLASSIFIERS if experiment == "exp1" else ("bcha", "rusbcha")),
        n=8000 if two_qubit else (6000 if experiment == "exp3" else 3000),
        repetitions=10 if two_qubit else 5,
        master_seed=master_seed,
        m=1000,
        m_grid=(250, 500, 1000, 2000) if two_qubit else (250, 500, 1000),
        fractions=(0.1, 0.2, 0.3, 0.4, 0.5),
        ladder=DESK_LADDER_2X2 if two_qubit else DESK_LADDER_3X3,
        n_learners=50,
        label_hull_m=2000,
        preset="desk",
    )
    return base


def paper_config(dims: BipartiteDims, experiment: str, master_seed: int = 0) -> ExperimentConfig:
    """Full-scale preset mirroring the reference setup (hours for two-qutrit
    sweeps; the two-qutrit ladder may exceed regenerated class pools, which
    raises the documented config error)."""
    _check_experiment(experiment)
    two_qubit = dims.d <= 6
    return ExperimentConfig(
        dims=dims,
        classifiers=BASELINE_CLASSIFIERS if experiment == "baseline" else
        (CHA_CLASSIFIERS if experiment == "exp1" else ("bcha", "rusbcha")),
        n=40000 if two_qubit else 20000,
        repetitions=30,
        master_seed=master_seed,
        m=2000 if two_qubit else 20000,
        m_grid=tuple(range(1000, 10001, 1000)) if two_qubit else tuple(range(10000, 100001, 10000)),
        fractions=(0.1, 0.2, 0.3, 0.4, 0.5),
        ladder=TABLE_IV_LADDER if two_qubit else TABLE_V_LADDER,
        n_learners=100,
        label_hull_m=20000,
        preset="paper",
    )


def _check_experiment(experiment: str) -> None:
    if experiment not in EXPERIMENT_CODES:
        raise ValueError(f"unknown experiment {experiment!r}; expected one of {sorted(EXPERIMENT_CODES)}")


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    classifier: str
    param: float
    rep: str  # repetition index as text, or "mean"
    values: tuple[float, ...]  # matches metrics.CSV_HEADER order

    def csv_line(self) -> str:
        cells = [self.experiment, self.classifier, repr(float(self.param)), self.rep]
        cells += [repr(float(v)) for v in self.values]
        return ",".join(cells)


def _metric_values(predictions, truths) -> tuple[float, ...]:
    r = compute_metrics(confusion(predictions, truths))
    return (r.oa, r.oe, r.aa, r.ae, r.sensitivity, r.specificity, r.precision, r.f_measure, r.g_mean)


def _derived_seed(*keys: int) -> int:
    state = np.random.SeedSequence(keys).generate_state(2)
    return int(state[0]) | (int(state[1]) << 32)


def make_labeler(cfg: ExperimentConfig):
    """Exact PPT labeling where sufficient (d <= 6), otherwise the hull-based
    approximation against a dedicated reference hull (separate seed lineage
    from any feature hull, to avoid label leakage)."""
    if cfg.dims.d <= 6:
        return PptExactLabeler()
    reference = sample_hull(cfg.dims, cfg.label_hull_m, _derived_seed(cfg.master_seed, _SEED_LABEL_HULL))
    return ChaApproxLabeler(reference, alpha_cap=cfg.alpha_cap)


def base_dataset(cfg: ExperimentConfig) -> LabeledDataset:
    """The experiment's generated dataset (raw features, no alpha)."""
    return generate_dataset(
        cfg.n, cfg.dims, cfg.theta, make_labeler(cfg), _derived_seed(cfg.master_seed, _SEED_DATA)
    )


def feature_hull(cfg: ExperimentConfig, m: int | None = None) -> HullModel:
    return sample_hull(cfg.dims, m if m is not None else cfg.m, _derived_seed(cfg.master_seed, _SEED_HULL))


def _train_classifier(name, x_train, y_train, cfg, rng):
    data = TrainingSet.from_arrays(x_train, y_train)
    if name in ("bagging", "bcha"):
        return train_bagging(data, cfg.n_learners, cfg.tree_params, rng)
    if name in ("boosting",):
        return train_adaboost(data, cfg.n_learners, cfg.tree_params, rng)
    if name in ("rusbcha",):
        return train_rusboost(data, cfg.n_learners, cfg.tree_params, rng, use_smote=cfg.use_smote)
    raise ValueError(f"classifier {name!r} is not trainable")


def _evaluate(name, cfg, param, rep, train, test, rng, rows, experiment):
    if name == "cha":
        predictions = (test.alpha >= 1.0).astype(np.int64)
    else:
        model = _train_classifier(name, train.design_matrix(), train.labels, cfg, rng)
        predictions = predict_batch(model, test.design_matrix())
    rows.append(
        ResultRow(
            experiment=experiment,
            classifier=name,
            param=param,
            rep=str(rep),
            values=_metric_values(predictions, test.labels),
        )
    )


def append_mean_rows(rows: list[ResultRow]) -> list[ResultRow]:
    """One mean row per (classifier, param): arithmetic mean over repetitions."""
    groups: dict[tuple[str, str, float], list[ResultRow]] = {}
    for row in rows:
        groups.setdefault((row.experiment, row.classifier, row.param), []).append(row)
    means = []
    for (experiment, classifier, param), members in groups.items():
        stacked = np.array([m.values for m in members])
        means.append(
            ResultRow(
                experiment=experiment,
                classifier=classifier,
                param=param,
                rep="mean",
                values=tuple(float(v) for v in stacked.mean(axis=0)),
            )
        )
    return rows + means


def _sorted_rows(rows: list[ResultRow]) -> list[ResultRow]:
    def key(row: ResultRow):
        rep_key = (1, 0) if row.rep == "mean" else (0, int(row.rep))
        return (row.experiment, row.classifier, row.param, rep_key)

    return sorted(rows, key=key)


def save_results(rows: list[ResultRow], cfg: ExperimentConfig, experiment: str, path) -> None:
    """Deterministic results CSV: config comment header, column line, sorted rows."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# experiment={experiment}\n")
        for key, value in cfg.header_items():
            fh.write(f"# {key}={value}\n")
        fh.write("experiment,classifier,param,rep," + CSV_HEADER + "\n")
        for row in _sorted_rows(rows):
            fh.write(row.csv_line() + "\n")


def run_baseline(cfg: ExperimentConfig) -> list[ResultRow]:
    """Bagging vs boosting on raw d**2-1 features at the configured split."""
    bad = set(cfg.classifiers) - set(BASELINE_CLASSIFIERS)
    if bad:
        raise ValueError(f"baseline accepts only {BASELINE_CLASSIFIERS}, got {sorted(bad)}")
    ds = base_dataset(cfg)
    rows: list[ResultRow] = []
    code = EXPERIMENT_CODES["baseline"]
    for rep in range(cfg.repetitions):
        split_rng = derive_rng(cfg.master_seed, code, rep, _ROLE_SPLIT)
        train, test = _split(ds, cfg.train_fraction, split_rng)
        for ci, name in enumerate(cfg.classifiers):
            rng = derive_rng(cfg.master_seed, code, rep, _ROLE_TRAIN, 0, ci)
            _evaluate(name, cfg, 0.0, rep, train, test, rng, rows, "baseline")
    return append_mean_rows(rows)


def run_experiment1(cfg: ExperimentConfig) -> list[ResultRow]:
    """Classifier comparison over the hull-size grid.

    Hulls across the grid are nested (each larger hull extends the previous
    one), so per-sample alpha is non-decreasing in m up to LP tolerance.
    """
    _require_cha(cfg)
    if not cfg.m_grid:
        raise ValueError("experiment 1 needs a nonempty m grid")
    grid = tuple(sorted(set(cfg.m_grid)))
    ds = base_dataset(cfg)
    full_hull = feature_hull(cfg, max(grid))
    scored = {m: attach_alpha(ds, full_hull.prefix(m), alpha_cap=cfg.alpha_cap) for m in grid}
    rows: list[ResultRow] = []
    code = EXPERIMENT_CODES["exp1"]
    for rep in range(cfg.repetitions):
        perm = derive_rng(cfg.master_seed, code, rep, _ROLE_SPLIT).permutation(ds.n)
        n_train = int(round(ds.n * cfg.train_fraction))
        train_idx, test_idx = np.sort(perm[:n_train]), np.sort(perm[n_train:])
        for mi, m in enumerate(grid):
            train = scored[m].subset(train_idx)
            test = scored[m].subset(test_idx)
            for ci, name in enumerate(cfg.classifiers):
                rng = derive_rng(cfg.master_seed, code, rep, _ROLE_TRAIN, mi, ci)
                _evaluate(name, cfg, float(m), rep, train, test, rng, rows, "exp1")
    return append_mean_rows(rows)


def run_experiment2(cfg: ExperimentConfig) -> list[ResultRow]:
    """Classifier comparison over the training-fraction grid at fixed m.

    Within a repetition all fractions share one permutation (the train side
    is its prefix), pairing the comparison across sweep points.
    """
    _require_cha(cfg)
    if not cfg.fractions:
        raise ValueError("experiment 2 needs a nonempty fraction grid")
    fractions = tuple(sorted(set(cfg.fractions)))
    ds = attach_alpha(base_dataset(cfg), feature_hull(cfg), alpha_cap=cfg.alpha_cap)
    rows: list[ResultRow] = []
    code = EXPERIMENT_CODES["exp2"]
    for rep in range(cfg.repetitions):
        perm = derive_rng(cfg.master_seed, code, rep, _ROLE_SPLIT).permutation(ds.n)
        for fi, fraction in enumerate(fractions):
            n_train = int(round(ds.n * fraction))
            if n_train == 0 or n_train == ds.n:
                raise ValueError(f"fraction {fraction} leaves an empty side for n={ds.n}")
            train = ds.subset(np.sort(perm[:n_train]))
            test = ds.subset(np.sort(perm[n_train:]))
            for ci, name in enumerate(cfg.classifiers):
                rng = derive_rng(cfg.master_seed, code, rep, _ROLE_TRAIN, fi, ci)
                _evaluate(name, cfg, float(fraction), rep, train, test, rng, rows, "exp2")
    return append_mean_rows(rows)


def run_experiment3(cfg: ExperimentConfig) -> list[ResultRow]:
    """Classifier comparison over the prevalence-difference ladder at fixed m.

    Every (repetition, ladder entry) carves a fresh per-class subset, then
    trains and tests on a 50% (configurable) split of that subset.
    """
    _require_cha(cfg)
    if not cfg.ladder:
        raise ValueError("experiment 3 needs a nonempty prevalence ladder")
    ds = attach_alpha(base_dataset(cfg), feature_hull(cfg), alpha_cap=cfg.alpha_cap)
    pos, neg = ds.class_counts()
    for n_sep, n_ent in cfg.ladder:
        if n_sep > pos or n_ent > neg:
            raise ValueError(
                f"ladder entry ({n_sep}, {n_ent}) exceeds available class counts ({pos}, {neg})"
            )
    rows: list[ResultRow] = []
    code = EXPERIMENT_CODES["exp3"]
    for rep in range(cfg.repetitions):
        for ei, (n_sep, n_ent) in enumerate(cfg.ladder):
            carve_rng = derive_rng(cfg.master_seed, code, rep, _ROLE_CARVE, ei)
            subset = carve_prevalence_subset(ds, n_sep, n_ent, carve_rng)
            split_rng = derive_rng(cfg.master_seed, code, rep, _ROLE_SPLIT, ei)
            train, test = _split(subset, cfg.train_fraction, split_rng)
            prevalence = abs(n_sep - n_ent) / (n_sep + n_ent)
            for ci, name in enumerate(cfg.classifiers):
                rng = derive_rng(cfg.master_seed, code, rep, _ROLE_TRAIN, ei, ci)
                _evaluate(name, cfg, prevalence, rep, train, test, rng, rows, "exp3")
    return append_mean_rows(rows)


def _require_cha(cfg: ExperimentConfig) -> None:
    bad = set(cfg.classifiers) - set(CHA_CLASSIFIERS)
    if bad:
        raise ValueError(f"hull experiments accept only {CHA_CLASSIFIERS}, got {sorted(bad)}")


def _split(ds: LabeledDataset, fraction: float, rng: np.random.Generator):
    return split_train_test(ds, fraction, rng)


RUNNERS = {
    "baseline": run_baseline,
    "exp1": run_experiment1,
    "exp2": run_experiment2,
    "exp3": run_experiment3,
}
