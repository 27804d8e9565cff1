"""Random bipartite quantum states: sampling, Bloch-style feature vectors,
partial transposition and PPT-based labeling.

Conventions
-----------
* Density matrices are ``d x d`` complex arrays with ``d = d_a * d_b``,
  subsystem A indexing the slower (row-major) tensor factor.
* Feature vectors are the ``d**2 - 1`` real coordinates
  ``x_i = sqrt(d / (2 (d - 1))) * Tr[rho sigma_i]`` in the generalized
  Gell-Mann basis returned by :func:`gell_mann_basis`; the zero vector is
  the maximally mixed state.
* Label convention: 1 = separable (positive class), 0 = entangled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10


def derive_rng(*keys: int) -> np.random.Generator:
    """Independent random stream deterministically derived from integer keys.

    Used to give every sample in a batch its own substream from
    (master seed, sample index), so batch generation is order-independent
    and a longer run extends a shorter one with the same seed.
    """
    return np.random.default_rng(np.random.SeedSequence(keys))


@dataclass(frozen=True)
class BipartiteDims:
    """Subsystem dimensions of a bipartite system."""

    d_a: int
    d_b: int

    def __post_init__(self):
        if self.d_a < 2 or self.d_b < 2:
            raise ValueError(
                f"invalid dimensions {self.d_a}x{self.d_b}: both subsystems need dimension >= 2"
            )

    @property
    def d(self) -> int:
        return self.d_a * self.d_b

    @property
    def feature_dim(self) -> int:
        return self.d * self.d - 1

    @classmethod
    def parse(cls, text: str) -> "BipartiteDims":
        """Parse a spec like ``"2x2"`` or ``"3x3"``."""
        parts = text.lower().split("x")
        if len(parts) != 2:
            raise ValueError(f"cannot parse dimensions from {text!r}; expected e.g. '2x2'")
        return cls(int(parts[0]), int(parts[1]))

    def __str__(self) -> str:
        return f"{self.d_a}x{self.d_b}"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, PSD matrix of a bipartite state.

    Construct through :func:`density_matrix`, which validates the invariants
    and symmetrizes away floating-point drift.
    """

    dims: BipartiteDims
    entries: np.ndarray


def density_matrix(dims: BipartiteDims, entries: np.ndarray, *, check_psd: bool = True) -> DensityMatrix:
    """Validate and wrap a raw matrix as a :class:`DensityMatrix`.

    Hermiticity and unit trace are always enforced (tolerance 1e-12); the PSD
    check (min eigenvalue >= -1e-10) can be skipped for deliberately
    non-physical matrices such as :func:`from_feature` output.
    """
    m = np.asarray(entries, dtype=complex)
    d = dims.d
    if m.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} matrix for dims {dims}, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T)) > HERMITICITY_TOL:
        raise ValueError("matrix is not Hermitian within 1e-12")
    if abs(np.trace(m).real - 1.0) > TRACE_TOL or abs(np.trace(m).imag) > TRACE_TOL:
        raise ValueError("matrix trace differs from 1 by more than 1e-12")
    m = 0.5 * (m + m.conj().T)  # kill residual drift
    if check_psd and np.linalg.eigvalsh(m)[0] < -PSD_TOL:
        raise ValueError("matrix has an eigenvalue below -1e-10; not positive semidefinite")
    m.setflags(write=False)
    return DensityMatrix(dims=dims, entries=m)


class LabelSource(Enum):
    PPT_EXACT = "ppt_exact"
    CHA_APPROX = "cha_approx"


@dataclass(frozen=True)
class GroundTruthLabel:
    """Binary class label: 1 = separable, 0 = entangled."""

    y: int
    source: LabelSource

    def __post_init__(self):
        if self.y not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.y}")


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``d x d`` unitary.

    QR decomposition of a complex standard-normal (Ginibre) matrix with the
    R-diagonal phases folded back into Q, which makes the distribution exactly
    Haar rather than merely orthogonalized Gaussian.
    """
    if d < 1:
        raise ValueError(f"invalid dimension {d}; need d >= 1")
    g = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(g)
    phases = np.diagonal(r).copy()
    phases /= np.abs(phases)
    return q * phases


def dirichlet_simplex(d: int, theta: float, rng: np.random.Generator) -> np.ndarray:
    """Point on the probability simplex with density proportional to
    ``prod_i l_i**(-theta)``, i.e. symmetric Dirichlet with concentration
    ``1 - theta``, sampled as normalized Gamma(1-theta, 1) draws.
    """
    if d < 1:
        raise ValueError(f"invalid dimension {d}; need d >= 1")
    if not 0.0 < theta < 1.0:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    if d == 1:
        return np.array([1.0])
    a = 1.0 - theta
    while True:
        g = rng.gamma(a, 1.0, size=d)
        total = g.sum()
        if total > 0.0:  # guards against all-underflow, astronomically rare
            return g / total


def random_density_matrix(dims: BipartiteDims, theta: float, rng: np.random.Generator) -> DensityMatrix:
    """Random full-support density matrix ``U diag(l) U^dag`` with Haar
    eigenvectors and Dirichlet-distributed spectrum (see
    :func:`dirichlet_simplex`).
    """
    d = dims.d
    u = haar_unitary(d, rng)
    ell = dirichlet_simplex(d, theta, rng)
    m = (u * ell) @ u.conj().T
    return density_matrix(dims, m)


def haar_state(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state vector (first column of a Haar unitary)."""
    return haar_unitary(d, rng)[:, 0]


def random_pure_product(dims: BipartiteDims, rng: np.random.Generator) -> DensityMatrix:
    """Random pure product state ``|a><a| (x) |b><b|`` with Haar-random
    ``|a>``, ``|b>``. Always PPT, purity 1.
    """
    a = haar_state(dims.d_a, rng)
    b = haar_state(dims.d_b, rng)
    v = np.kron(a, b)
    return density_matrix(dims, np.outer(v, v.conj()))


@dataclass(frozen=True, eq=False)
class GellMannBasis:
    """Ordered traceless Hermitian basis with Tr[s_i s_j] = 2 delta_ij."""

    d: int
    matrices: np.ndarray  # shape (d*d - 1, d, d)


@lru_cache(maxsize=None)
def _gell_mann_matrices(d: int) -> np.ndarray:
    mats = np.zeros((d * d - 1, d, d), dtype=complex)
    idx = 0
    # symmetric block, lexicographic (j, k) with j < k
    for j in range(d):
        for k in range(j + 1, d):
            mats[idx, j, k] = 1.0
            mats[idx, k, j] = 1.0
            idx += 1
    # antisymmetric block
    for j in range(d):
        for k in range(j + 1, d):
            mats[idx, j, k] = -1.0j
            mats[idx, k, j] = 1.0j
            idx += 1
    # diagonal block
    for l in range(1, d):
        scale = np.sqrt(2.0 / (l * (l + 1)))
        for i in range(l):
            mats[idx, i, i] = scale
        mats[idx, l, l] = -l * scale
        idx += 1
    mats.setflags(write=False)
    return mats


def gell_mann_basis(d: int) -> GellMannBasis:
    """Generalized Gell-Mann basis of SU(d): d(d-1)/2 symmetric, d(d-1)/2
    antisymmetric, then d-1 diagonal matrices, each block in lexicographic
    (j, k) order. For d=2 this is (sigma_x, sigma_y, sigma_z).
    """
    if d < 2:
        raise ValueError(f"invalid dimension {d}; need d >= 2")
    return GellMannBasis(d=d, matrices=_gell_mann_matrices(d))


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Real coordinates of a state in the generalized Gell-Mann basis."""

    dims: BipartiteDims
    coords: np.ndarray

    def __post_init__(self):
        if self.coords.shape != (self.dims.feature_dim,):
            raise ValueError(
                f"feature vector for dims {self.dims} must have length "
                f"{self.dims.feature_dim}, got shape {self.coords.shape}"
            )


def feature_coords(entries: np.ndarray, d: int) -> np.ndarray:
    """Feature coordinates of a raw d x d density-matrix array (no wrapping)."""
    basis = _gell_mann_matrices(d)
    # Tr[rho sigma_i] = sum_{ab} rho_ab sigma_i[b, a]
    traces = np.einsum("ab,nba->n", entries, basis)
    if np.max(np.abs(traces.imag)) > 1e-8:
        raise ValueError("corrupted input: Tr[rho sigma_i] has imaginary part above 1e-8")
    prefactor = np.sqrt(d / (2.0 * (d - 1.0)))
    return prefactor * traces.real


def to_feature(rho: DensityMatrix) -> FeatureVector:
    """Feature vector ``x_i = sqrt(d/(2(d-1))) Tr[rho sigma_i]``."""
    return FeatureVector(dims=rho.dims, coords=feature_coords(rho.entries, rho.dims.d))


def from_feature(x: FeatureVector) -> DensityMatrix:
    """State ``(1/d)(I + sqrt(d(d-1)/2) x . sigma)``.

    Hermitian with unit trace by construction; positivity is NOT guaranteed
    for arbitrary coordinates (vectors outside the state body give matrices
    with negative eigenvalues), so the PSD check is skipped here.
    """
    d = x.dims.d
    basis = _gell_mann_matrices(d)
    scale = np.sqrt(d * (d - 1.0) / 2.0)
    m = (np.eye(d, dtype=complex) + scale * np.tensordot(x.coords, basis, axes=1)) / d
    return density_matrix(x.dims, m, check_psd=False)


def partial_transpose(rho: DensityMatrix) -> np.ndarray:
    """Transpose over subsystem A: entry ((i,k),(j,l)) -> ((j,k),(i,l)).

    Hermitian and trace-preserving; applying it twice restores the input.
    """
    d_a, d_b = rho.dims.d_a, rho.dims.d_b
    d = rho.dims.d
    return np.ascontiguousarray(
        rho.entries.reshape(d_a, d_b, d_a, d_b).swapaxes(0, 2).reshape(d, d)
    )


def is_ppt(rho: DensityMatrix, tol: float = PSD_TOL) -> bool:
    """Positive-partial-transpose test: min eigenvalue of the partial
    transpose >= -tol. Necessary and sufficient for separability when
    ``d_a * d_b <= 6``.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    return bool(np.linalg.eigvalsh(partial_transpose(rho))[0] >= -tol)


class PptExactLabeler:
    """Exact PPT labeling, valid only for ``d_a * d_b <= 6`` where the PPT
    criterion is necessary and sufficient.
    """

    def __init__(self, tol: float = PSD_TOL):
        self.tol = tol

    def label(self, rho: DensityMatrix) -> GroundTruthLabel:
        if rho.dims.d > 6:
            raise ValueError(
                f"PPT labeling is only exact for d_a*d_b <= 6; got dims {rho.dims} (d={rho.dims.d})"
            )
        return GroundTruthLabel(y=int(is_ppt(rho, self.tol)), source=LabelSource.PPT_EXACT)

    def describe(self) -> str:
        return "ppt_exact"


def label_state(rho: DensityMatrix, labeler) -> GroundTruthLabel:
    """Apply a labeling policy (:class:`PptExactLabeler` or the hull-based
    approximate labeler from :mod:`sephull.hull`)."""
    return labeler.label(rho)
