"""Labeled datasets of random states: generation, hull-score attachment,
train/test splitting, prevalence-controlled subsets, and CSV persistence.

CSV schema: ``# key=value`` comment lines carrying the metadata, a header
``f0,...,f{k-1},alpha,label`` (alpha cells empty when no score is attached),
then one row per sample in full-precision decimal so round trips are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hull import HullModel, alpha_scores, DEFAULT_ALPHA_CAP
from .lp import DEFAULT_LP_TOL
from .states import BipartiteDims, derive_rng, feature_coords, random_density_matrix


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature rows with binary labels and an optional hull-score column.

    ``features`` has shape (n, d**2 - 1); ``alpha`` is None until
    :func:`attach_alpha` widens the effective feature space to d**2.
    """

    dims: BipartiteDims
    features: np.ndarray
    labels: np.ndarray
    alpha: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.features.shape[0]
        if self.features.ndim != 2 or self.features.shape[1] != self.dims.feature_dim:
            raise ValueError(
                f"features for dims {self.dims} need width {self.dims.feature_dim}, "
                f"got shape {self.features.shape}"
            )
        if self.labels.shape != (n,):
            raise ValueError("labels must match the feature row count")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if self.alpha is not None and self.alpha.shape != (n,):
            raise ValueError("alpha column must match the feature row count")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def has_alpha(self) -> bool:
        return self.alpha is not None

    def design_matrix(self) -> np.ndarray:
        """Features as fed to classifiers: width d**2 - 1, or d**2 with alpha."""
        if self.alpha is None:
            return self.features
        return np.hstack([self.features, self.alpha[:, None]])

    def class_counts(self) -> tuple[int, int]:
        """(separable, entangled) counts."""
        pos = int(self.labels.sum())
        return pos, self.n - pos

    def subset(self, idx: np.ndarray, extra_metadata: dict | None = None) -> "LabeledDataset":
        meta = dict(self.metadata)
        if extra_metadata:
            meta.update(extra_metadata)
        return LabeledDataset(
            dims=self.dims,
            features=self.features[idx],
            labels=self.labels[idx],
            alpha=None if self.alpha is None else self.alpha[idx],
            metadata=meta,
        )


def generate_dataset(n: int, dims: BipartiteDims, theta: float, labeler, seed: int) -> LabeledDataset:
    """n random states with ground-truth labels.

    Sample i is drawn from the substream (seed, i), so generation is
    order-independent and reproducible. States the labeler marks entangled
    (including NPT states under the approximate hull labeler) are kept.
    """
    if n < 1:
        raise ValueError(f"dataset size must be >= 1, got {n}")
    features = np.empty((n, dims.feature_dim))
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        rho = random_density_matrix(dims, theta, derive_rng(seed, i))
        features[i] = feature_coords(rho.entries, dims.d)
        labels[i] = labeler.label(rho).y
    metadata = {
        "dims": str(dims),
        "n": str(n),
        "theta": repr(float(theta)),
        "seed": str(seed),
        "labeler": labeler.describe(),
    }
    return LabeledDataset(dims=dims, features=features, labels=labels, metadata=metadata)


def attach_alpha(
    ds: LabeledDataset,
    hull: HullModel,
    alpha_cap: float = DEFAULT_ALPHA_CAP,
    tol: float = DEFAULT_LP_TOL,
) -> LabeledDataset:
    """Score every row against the hull and attach alpha as an extra feature.

    Row order, labels and base features are preserved exactly; the hull
    identity is recorded in the metadata.
    """
    if ds.has_alpha:
        raise ValueError("dataset already has an alpha column")
    if ds.dims != hull.dims:
        raise ValueError(f"dataset dims {ds.dims} do not match hull dims {hull.dims}")
    alpha = alpha_scores(ds.features, hull, alpha_cap=alpha_cap, tol=tol)
    meta = dict(ds.metadata)
    meta["alpha_hull"] = f"m={hull.m},seed={hull.seed}"
    meta["alpha_cap"] = repr(float(alpha_cap))
    return LabeledDataset(
        dims=ds.dims, features=ds.features, labels=ds.labels, alpha=alpha, metadata=meta
    )


def split_train_test(
    ds: LabeledDataset, train_fraction: float, rng: np.random.Generator
) -> tuple[LabeledDataset, LabeledDataset]:
    """Uniform random partition without replacement (not stratified, matching
    the unequal per-class train/test counts such sampling produces)."""
    n_train = int(round(ds.n * train_fraction))
    if not 0.0 < train_fraction < 1.0 or n_train == 0 or n_train == ds.n:
        raise ValueError(
            f"train fraction {train_fraction} leaves an empty side for n={ds.n}"
        )
    perm = rng.permutation(ds.n)
    return (
        ds.subset(np.sort(perm[:n_train]), {"split": "train"}),
        ds.subset(np.sort(perm[n_train:]), {"split": "test"}),
    )


def carve_prevalence_subset(
    ds: LabeledDataset, n_separable: int, n_entangled: int, rng: np.random.Generator
) -> LabeledDataset:
    """Per-class uniform subsample without replacement, giving prevalence
    difference |n_sep - n_ent| / (n_sep + n_ent)."""
    pos_idx = np.nonzero(ds.labels == 1)[0]
    neg_idx = np.nonzero(ds.labels == 0)[0]
    if n_separable > pos_idx.size or n_entangled > neg_idx.size:
        raise ValueError(
            f"requested ({n_separable}, {n_entangled}) per-class samples but dataset "
            f"has ({pos_idx.size}, {neg_idx.size})"
        )
    if n_separable < 1 or n_entangled < 1:
        raise ValueError("per-class counts must be >= 1")
    take = np.concatenate(
        [
            rng.choice(pos_idx, size=n_separable, replace=False),
            rng.choice(neg_idx, size=n_entangled, replace=False),
        ]
    )
    return ds.subset(np.sort(take), {"carve": f"{n_separable}:{n_entangled}"})


def save_csv(ds: LabeledDataset, path) -> None:
    """Write the dataset in the documented CSV schema (lossless round trip)."""
    k = ds.dims.feature_dim
    with open(path, "w", encoding="utf-8") as fh:
        for key in sorted(ds.metadata):
            fh.write(f"# {key}={ds.metadata[key]}\n")
        fh.write(",".join(f"f{i}" for i in range(k)) + ",alpha,label\n")
        for i in range(ds.n):
            cells = [repr(float(v)) for v in ds.features[i]]
            cells.append("" if ds.alpha is None else repr(float(ds.alpha[i])))
            cells.append(str(int(ds.labels[i])))
            fh.write(",".join(cells) + "\n")


def load_csv(path) -> LabeledDataset:
    """Read a dataset written by :func:`save_csv`.

    A file whose alpha column is entirely empty loads as an alpha-absent
    dataset. Malformed rows raise with their line number.
    """
    metadata: dict = {}
    features: list[list[float]] = []
    alphas: list[str] = []
    labels: list[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        lineno = 0
        header = None
        for line in fh:
            lineno += 1
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    metadata[key] = value
                continue
            if header is None:
                header = line.split(",")
                if len(header) < 3 or header[-2:] != ["alpha", "label"] or header[0] != "f0":
                    raise ValueError(f"{path}: line {lineno}: malformed header {line!r}")
                continue
            cells = line.split(",")
            if len(cells) != len(header):
                raise ValueError(
                    f"{path}: line {lineno}: expected {len(header)} columns, got {len(cells)}"
                )
            try:
                features.append([float(c) for c in cells[:-2]])
                alphas.append(cells[-2])
                labels.append(int(cells[-1]))
            except ValueError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from None
    if header is None or not features:
        raise ValueError(f"{path}: no data rows")
    k = len(header) - 2
    dims = BipartiteDims.parse(metadata["dims"]) if "dims" in metadata else _infer_dims(k)
    if dims.feature_dim != k:
        raise ValueError(f"{path}: header width {k} does not match dims {dims}")
    has_alpha = any(a != "" for a in alphas)
    if has_alpha and any(a == "" for a in alphas):
        raise ValueError(f"{path}: alpha column is only partially filled")
    return LabeledDataset(
        dims=dims,
        features=np.asarray(features),
        labels=np.asarray(labels, dtype=np.int64),
        alpha=np.asarray([float(a) for a in alphas]) if has_alpha else None,
        metadata=metadata,
    )


def _infer_dims(feature_dim: int) -> BipartiteDims:
    # square bipartite systems only; non-square files must carry dims metadata
    d = int(round(np.sqrt(feature_dim + 1)))
    root = int(round(np.sqrt(d)))
    if d * d - 1 != feature_dim or root * root != d:
        raise ValueError(f"cannot infer dims from feature width {feature_dim}")
    return BipartiteDims(root, root)
