"""Convex hull approximation of the separable set and the hull score alpha.

The separable set is inner-approximated by the convex hull of m random pure
product states (in feature coordinates). For a feature vector x, the score
``alpha_max`` is the largest alpha with ``alpha x`` still inside the hull:

    max alpha  s.t.  alpha x = sum_i lambda_i c_i,  lambda >= 0,  sum lambda = 1

with alpha capped (the program is otherwise unbounded at x = 0) and the
equality relaxed per coordinate by eps = 1e-7 through one bounded slack each,
since exact equality against finitely many random vertices is numerically
fragile. ``alpha >= 1`` certifies hull membership, hence separability.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .lp import DEFAULT_LP_TOL, LinearProgram, lp_maximize
from .states import (
    BipartiteDims,
    DensityMatrix,
    GroundTruthLabel,
    LabelSource,
    derive_rng,
    feature_coords,
    FeatureVector,
    is_ppt,
    random_pure_product,
)

DEFAULT_ALPHA_CAP = 100.0
COORD_RELAX = 1e-7


class SmallHullWarning(UserWarning):
    """Hull has fewer vertices than the ambient dimension + 1 requires."""


@dataclass(frozen=True, eq=False)
class HullModel:
    """m pure-product-state feature vectors spanning the approximation.

    ``vertices`` has shape (m, d**2 - 1), one feature vector per row.
    """

    dims: BipartiteDims
    vertices: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        if self.vertices.ndim != 2 or self.vertices.shape[1] != self.dims.feature_dim:
            raise ValueError(
                f"hull vertices for dims {self.dims} need width {self.dims.feature_dim}, "
                f"got shape {self.vertices.shape}"
            )
        if self.m < self.dims.d ** 2:
            warnings.warn(
                f"hull has only m={self.m} vertices for dims {self.dims}; "
                f"a full-dimensional hull needs at least d^2 = {self.dims.d ** 2}",
                SmallHullWarning,
                stacklevel=2,
            )

    @property
    def m(self) -> int:
        return self.vertices.shape[0]

    def prefix(self, m: int) -> "HullModel":
        """Nested sub-hull of the first m vertices (same seed lineage)."""
        if not 1 <= m <= self.m:
            raise ValueError(f"prefix size {m} outside [1, {self.m}]")
        return HullModel(dims=self.dims, vertices=self.vertices[:m], seed=self.seed)


def sample_hull(dims: BipartiteDims, m: int, seed: int) -> HullModel:
    """Hull of m independent random pure product states.

    Vertex i is drawn from the substream (seed, i), so hulls with the same
    seed are nested across m: a larger hull extends a smaller one.
    """
    if m < 1:
        raise ValueError(f"hull size must be >= 1, got {m}")
    vertices = np.empty((m, dims.feature_dim))
    for i in range(m):
        rho = random_pure_product(dims, derive_rng(seed, i))
        vertices[i] = feature_coords(rho.entries, dims.d)
    vertices.setflags(write=False)
    return HullModel(dims=dims, vertices=vertices, seed=seed)


@dataclass(frozen=True, eq=False)
class ChaScore:
    """Hull score for one feature vector.

    ``capped`` marks solutions pinned at the alpha cap; ``feasible`` is False
    when the LP had no solution at all (x not representable in the hull's
    span), in which case alpha is 0 and the state is classified entangled.
    """

    alpha: float
    capped: bool
    feasible: bool = True
    weights: np.ndarray | None = None


def membership_program(
    x: np.ndarray, vertices: np.ndarray, alpha_cap: float, relax: float = COORD_RELAX
) -> LinearProgram:
    """LP for the hull score: variables (lambda_1..m, alpha, u_1..K) with
    C^T lambda - alpha x - u = -relax (u in [0, 2 relax]) and sum lambda = 1.
    """
    m, k = vertices.shape
    n = m + 1 + k
    a = np.zeros((k + 1, n))
    a[:k, :m] = vertices.T
    a[:k, m] = -x
    a[:k, m + 1 :] = -np.eye(k)
    a[k, :m] = 1.0
    b = np.concatenate([np.full(k, -relax), [1.0]])
    objective = np.zeros(n)
    objective[m] = 1.0
    lower = np.zeros(n)
    upper = np.concatenate([np.full(m, np.inf), [alpha_cap], np.full(k, 2.0 * relax)])
    return LinearProgram(objective=objective, a_eq=a, b_eq=b, lower=lower, upper=upper)


def alpha_max(
    x: FeatureVector | np.ndarray,
    hull: HullModel,
    alpha_cap: float = DEFAULT_ALPHA_CAP,
    tol: float = DEFAULT_LP_TOL,
    keep_witness: bool = False,
) -> ChaScore:
    """Largest alpha with ``alpha x`` inside the hull, capped at alpha_cap.

    Infeasible programs return alpha = 0 with ``feasible=False`` rather than
    raising: not representable in the hull means not certified separable.
    With ``keep_witness`` the convex weights lambda are attached to the score.
    """
    if isinstance(x, FeatureVector):
        if x.dims != hull.dims:
            raise ValueError(f"feature dims {x.dims} do not match hull dims {hull.dims}")
        coords = x.coords
    else:
        coords = np.asarray(x, dtype=float)
        if coords.shape != (hull.dims.feature_dim,):
            raise ValueError(
                f"feature vector of length {coords.shape} does not match hull dims {hull.dims}"
            )
    if alpha_cap <= 1.0:
        raise ValueError(f"alpha_cap must exceed 1, got {alpha_cap}")
    solution = lp_maximize(membership_program(coords, hull.vertices, alpha_cap), tol=tol)
    if not solution.optimal:
        return ChaScore(alpha=0.0, capped=False, feasible=False)
    alpha = solution.x[hull.m]
    capped = alpha >= alpha_cap - tol
    weights = solution.x[: hull.m].copy() if keep_witness else None
    return ChaScore(alpha=float(alpha), capped=bool(capped), weights=weights)


def alpha_scores(
    features: np.ndarray,
    hull: HullModel,
    alpha_cap: float = DEFAULT_ALPHA_CAP,
    tol: float = DEFAULT_LP_TOL,
) -> np.ndarray:
    """alpha_max for every row of a feature matrix."""
    features = np.asarray(features, dtype=float)
    return np.array([alpha_max(row, hull, alpha_cap, tol).alpha for row in features])


def cha_classify(score: ChaScore) -> int:
    """1 (separable) iff alpha >= 1, boundary inclusive."""
    return int(score.alpha >= 1.0)


class ChaApproxLabeler:
    """Approximate labeling for dimensions where PPT is not sufficient.

    NPT states are entangled outright; PPT states count as separable iff
    their score against a dedicated reference hull reaches the threshold.
    The reference hull should be large and kept separate from any hull used
    to build classifier features, to avoid label leakage.
    """

    def __init__(
        self,
        reference_hull: HullModel,
        threshold: float = 1.0,
        alpha_cap: float = DEFAULT_ALPHA_CAP,
        tol: float = DEFAULT_LP_TOL,
    ):
        self.reference_hull = reference_hull
        self.threshold = threshold
        self.alpha_cap = alpha_cap
        self.tol = tol

    def label(self, rho: DensityMatrix) -> GroundTruthLabel:
        if rho.dims != self.reference_hull.dims:
            raise ValueError(
                f"state dims {rho.dims} do not match reference hull dims {self.reference_hull.dims}"
            )
        if not is_ppt(rho):
            return GroundTruthLabel(y=0, source=LabelSource.CHA_APPROX)
        score = alpha_max(
            feature_coords(rho.entries, rho.dims.d), self.reference_hull, self.alpha_cap, self.tol
        )
        return GroundTruthLabel(y=int(score.alpha >= self.threshold), source=LabelSource.CHA_APPROX)

    def describe(self) -> str:
        h = self.reference_hull
        return f"cha_approx(m={h.m},seed={h.seed},threshold={self.threshold})"


def save_hull(hull: HullModel, path) -> None:
    """Write a hull as flat CSV: one header comment with dims/m/seed, a
    column line f0..f{k-1}, then one vertex per row in full precision."""
    k = hull.dims.feature_dim
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# dims={hull.dims} m={hull.m} seed={'' if hull.seed is None else hull.seed}\n")
        fh.write(",".join(f"f{i}" for i in range(k)) + "\n")
        for row in hull.vertices:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_hull(path) -> HullModel:
    """Read a hull written by :func:`save_hull`."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("# "):
            raise ValueError(f"{path}: line 1: expected '# dims=... m=... seed=...' header")
        meta = dict(item.split("=", 1) for item in header[2:].split())
        dims = BipartiteDims.parse(meta["dims"])
        seed = int(meta["seed"]) if meta.get("seed") else None
        columns = fh.readline().strip().split(",")
        if columns != [f"f{i}" for i in range(dims.feature_dim)]:
            raise ValueError(f"{path}: line 2: column header does not match dims {dims}")
        rows = []
        for lineno, line in enumerate(fh, start=3):
            if not line.strip():
                continue
            cells = line.strip().split(",")
            if len(cells) != dims.feature_dim:
                raise ValueError(
                    f"{path}: line {lineno}: expected {dims.feature_dim} columns, got {len(cells)}"
                )
            rows.append([float(c) for c in cells])
    vertices = np.asarray(rows)
    if vertices.shape[0] != int(meta["m"]):
        raise ValueError(f"{path}: header claims m={meta['m']} but file has {vertices.shape[0]} rows")
    return HullModel(dims=dims, vertices=vertices, seed=seed)
