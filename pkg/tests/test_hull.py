import numpy as np
import pytest

from sephull.hull import (
    COORD_RELAX,
    ChaApproxLabeler,
    ChaScore,
    HullModel,
    SmallHullWarning,
    alpha_max,
    alpha_scores,
    cha_classify,
    load_hull,
    membership_program,
    sample_hull,
    save_hull,
)
from sephull.lp import lp_maximize
from sephull.states import (
    BipartiteDims,
    density_matrix,
    derive_rng,
    random_density_matrix,
    to_feature,
)

DIMS22 = BipartiteDims(2, 2)
DIMS33 = BipartiteDims(3, 3)


@pytest.fixture(scope="module")
def hull500():
    return sample_hull(DIMS22, 500, seed=42)


def bell_feature():
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1.0 / np.sqrt(2.0)
    return to_feature(density_matrix(DIMS22, np.outer(v, v.conj()))).coords


class TestSampleHull:
    def test_shape_and_determinism(self):
        h1 = sample_hull(DIMS22, 40, seed=7)
        h2 = sample_hull(DIMS22, 40, seed=7)
        assert h1.vertices.shape == (40, 15)
        assert np.array_equal(h1.vertices, h2.vertices)

    def test_nested_prefix_property(self):
        small = sample_hull(DIMS22, 30, seed=7)
        large = sample_hull(DIMS22, 60, seed=7)
        assert np.array_equal(large.vertices[:30], small.vertices)
        assert np.array_equal(large.prefix(30).vertices, small.vertices)

    def test_small_m_warning(self):
        with pytest.warns(SmallHullWarning):
            sample_hull(DIMS33, 10, seed=0)

    def test_vertex_width_3x3(self):
        with pytest.warns(SmallHullWarning):
            h = sample_hull(DIMS33, 10, seed=1)
        assert h.vertices.shape == (10, 80)

    def test_vertices_are_normalized_product_states(self, hull500):
        # every vertex comes from a purity-1 PPT state; its feature norm is
        # the pure-state radius sqrt((d-1)/d) * sqrt(d/ (2(d-1))) * ... checked
        # indirectly: vertex self-score reaches 1 (tested below) and norms agree
        norms = np.linalg.norm(hull500.vertices, axis=1)
        assert np.allclose(norms, norms[0], atol=1e-8)

    def test_invalid_m(self):
        with pytest.raises(ValueError, match=">= 1"):
            sample_hull(DIMS22, 0, seed=0)


class TestAlphaMax:
    def test_vertex_membership(self, hull500):
        score = alpha_max(hull500.vertices[3], hull500)
        assert score.feasible
        assert score.alpha >= 1.0 - 1e-6

    def test_zero_vector_hits_cap(self, hull500):
        score = alpha_max(np.zeros(15), hull500)
        assert score.capped
        assert score.alpha == pytest.approx(100.0, abs=1e-6)
        assert cha_classify(score) == 1

    def test_bell_soundness(self, hull500):
        # alpha * x_bell is the Werner state with p = alpha, separable iff
        # alpha <= 1/3 (analytic PT eigenvalue (1 - 3 alpha)/4)
        score = alpha_max(bell_feature(), hull500)
        assert score.alpha <= 1.0 / 3.0 + 1e-6
        assert cha_classify(score) == 0

    def test_monotone_in_hull_size(self, hull500):
        x = bell_feature()
        alphas = [alpha_max(x, hull500.prefix(m)).alpha for m in (50, 150, 500)]
        assert alphas[0] <= alphas[1] + 1e-6
        assert alphas[1] <= alphas[2] + 1e-6

    def test_scale_covariance(self, hull500):
        x = to_feature(random_density_matrix(DIMS22, 0.5, derive_rng(21))).coords
        base = alpha_max(x, hull500).alpha
        for k in (0.5, 2.0, 7.0):
            scaled = alpha_max(k * x, hull500).alpha
            assert scaled == pytest.approx(base / k, rel=1e-6)

    def test_witness_validity(self, hull500):
        x = to_feature(random_density_matrix(DIMS22, 0.5, derive_rng(22))).coords
        score = alpha_max(x, hull500, keep_witness=True)
        assert score.weights is not None
        assert abs(score.weights.sum() - 1.0) <= 1e-9 + 1e-12
        residual = hull500.vertices.T @ score.weights - score.alpha * x
        assert np.max(np.abs(residual)) <= COORD_RELAX + 1e-9

    def test_infeasible_returns_zero(self):
        with pytest.warns(SmallHullWarning):
            tiny = sample_hull(DIMS22, 3, seed=3)
        x = to_feature(random_density_matrix(DIMS22, 0.5, derive_rng(23))).coords
        score = alpha_max(x, tiny)
        assert (score.alpha, score.capped, score.feasible) == (0.0, False, False)
        assert cha_classify(score) == 0

    def test_determinism(self, hull500):
        x = bell_feature()
        assert alpha_max(x, hull500).alpha == alpha_max(x, hull500).alpha

    def test_dims_mismatch(self, hull500):
        with pytest.raises(ValueError, match="match"):
            alpha_max(np.zeros(80), hull500)

    def test_cap_validation(self, hull500):
        with pytest.raises(ValueError, match="alpha_cap"):
            alpha_max(np.zeros(15), hull500, alpha_cap=1.0)

    def test_batch_scores(self, hull500):
        rows = np.vstack([np.zeros(15), hull500.vertices[0]])
        scores = alpha_scores(rows, hull500)
        assert scores.shape == (2,)
        assert scores[0] == pytest.approx(100.0, abs=1e-6)
        assert scores[1] >= 1.0 - 1e-6


class TestChaClassify:
    @pytest.mark.parametrize(
        "alpha,expected", [(1.0, 1), (0.33, 0), (100.0, 1)]
    )
    def test_threshold(self, alpha, expected):
        assert cha_classify(ChaScore(alpha=alpha, capped=alpha >= 100.0)) == expected


class TestMembershipProgram:
    def test_relaxation_structure(self, hull500):
        lp = membership_program(bell_feature(), hull500.vertices[:50], 100.0)
        # 15 relaxed coordinates + 1 simplex row; 50 lambdas + alpha + 15 slacks
        assert lp.a_eq.shape == (16, 66)
        sol = lp_maximize(lp)
        assert sol.optimal


class TestChaApproxLabeler:
    def test_npt_is_entangled_regardless_of_hull(self):
        with pytest.warns(SmallHullWarning):
            tiny = sample_hull(DIMS33, 5, seed=11)
        labeler = ChaApproxLabeler(tiny)
        psi = np.zeros(9, dtype=complex)
        psi[[0, 4, 8]] = 1.0 / np.sqrt(3.0)  # maximally entangled two-qutrit
        rho = density_matrix(DIMS33, np.outer(psi, psi.conj()))
        assert labeler.label(rho).y == 0

    def test_maximally_mixed_is_separable(self, hull500):
        labeler = ChaApproxLabeler(hull500)
        rho = density_matrix(DIMS22, np.eye(4) / 4.0)
        label = labeler.label(rho)
        assert label.y == 1
        assert label.source.value == "cha_approx"

    def test_dims_mismatch(self, hull500):
        labeler = ChaApproxLabeler(hull500)
        rho = random_density_matrix(DIMS33, 0.5, derive_rng(24))
        with pytest.raises(ValueError, match="dims"):
            labeler.label(rho)


class TestHullPersistence:
    def test_round_trip(self, tmp_path, hull500):
        path = tmp_path / "hull.csv"
        save_hull(hull500, path)
        back = load_hull(path)
        assert back.dims == hull500.dims
        assert back.seed == hull500.seed
        assert np.array_equal(back.vertices, hull500.vertices)

    def test_malformed_row(self, tmp_path, hull500):
        path = tmp_path / "hull.csv"
        save_hull(hull500, path)
        lines = path.read_text().splitlines()
        lines[5] = lines[5] + ",0.5"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValueError, match="line 6"):
            load_hull(path)

    def test_header_mismatch(self, tmp_path):
        path = tmp_path / "hull.csv"
        path.write_text("not a header\nf0\n")
        with pytest.raises(ValueError, match="header"):
            load_hull(path)
