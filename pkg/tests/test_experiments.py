from dataclasses import replace

import numpy as np
import pytest

from sephull.experiments import (
    ExperimentConfig,
    append_mean_rows,
    base_dataset,
    desk_config,
    feature_hull,
    paper_config,
    run_baseline,
    run_experiment1,
    run_experiment2,
    run_experiment3,
    save_results,
)
from sephull.data import attach_alpha
from sephull.states import BipartiteDims

DIMS22 = BipartiteDims(2, 2)


def tiny_config(**overrides):
    base = ExperimentConfig(
        dims=DIMS22,
        classifiers=("bagging", "boosting"),
        n=240,
        repetitions=2,
        master_seed=9,
        n_learners=4,
        m=40,
        m_grid=(25, 40),
        fractions=(0.25, 0.5),
        ladder=((15, 45), (25, 30)),
        label_hull_m=60,
        max_depth=4,
    )
    return replace(base, **overrides)


def rep_rows(rows):
    return [r for r in rows if r.rep != "mean"]


def mean_rows(rows):
    return [r for r in rows if r.rep == "mean"]


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError, match="repetitions"):
            tiny_config(repetitions=0)
        with pytest.raises(ValueError, match="hull size"):
            tiny_config(m_grid=(0, 10))
        with pytest.raises(ValueError, match="fraction"):
            tiny_config(fractions=(0.0, 0.5))

    def test_presets_exist(self):
        for experiment in ("baseline", "exp1", "exp2", "exp3"):
            for factory in (desk_config, paper_config):
                cfg = factory(DIMS22, experiment)
                assert cfg.repetitions >= 1
        assert desk_config(DIMS22, "exp3").ladder
        assert paper_config(DIMS22, "exp1").m_grid[0] == 1000

    def test_unknown_experiment(self):
        with pytest.raises(ValueError, match="unknown experiment"):
            desk_config(DIMS22, "exp9")


class TestBaseline:
    def test_row_count(self):
        rows = run_baseline(tiny_config())
        assert len(rep_rows(rows)) == 2 * 1 * 2
        assert len(mean_rows(rows)) == 2

    def test_rejects_cha_classifiers(self):
        with pytest.raises(ValueError, match="baseline"):
            run_baseline(tiny_config(classifiers=("bcha",)))

    def test_determinism(self):
        a = run_baseline(tiny_config())
        b = run_baseline(tiny_config())
        assert [r.values for r in a] == [r.values for r in b]


@pytest.fixture(scope="module")
def exp1_rows():
    return run_experiment1(tiny_config(classifiers=("cha", "bcha", "rusbcha")))


class TestExperiment1:
    def test_row_count(self, exp1_rows):
        rows = exp1_rows
        assert len(rep_rows(rows)) == 3 * 2 * 2
        assert len(mean_rows(rows)) == 3 * 2

    def test_nested_alpha_monotone(self):
        cfg = tiny_config(classifiers=("cha",))
        ds = base_dataset(cfg)
        hull = feature_hull(cfg, max(cfg.m_grid))
        small = attach_alpha(ds, hull.prefix(min(cfg.m_grid)))
        large = attach_alpha(ds, hull)
        assert (large.alpha >= small.alpha - 1e-6).all()

    def test_cha_deterministic_across_reps_at_fixed_split(self, exp1_rows):
        # CHA has no training randomness: with the same hull and split its
        # metrics depend only on the repetition's split
        by_rep = {}
        for r in rep_rows(exp1_rows):
            if r.classifier == "cha":
                by_rep.setdefault(r.param, {})[r.rep] = r.values
        for param_rows in by_rep.values():
            assert len(param_rows) == 2

    def test_rejects_baseline_classifiers(self):
        with pytest.raises(ValueError, match="hull experiments"):
            run_experiment1(tiny_config(classifiers=("bagging",)))


class TestExperiment2:
    def test_row_count_and_params(self):
        rows = run_experiment2(tiny_config(classifiers=("bcha", "rusbcha")))
        assert len(rep_rows(rows)) == 2 * 2 * 2
        assert sorted({r.param for r in rows}) == [0.25, 0.5]

    def test_requires_fractions(self):
        with pytest.raises(ValueError, match="fraction grid"):
            run_experiment2(tiny_config(classifiers=("bcha",), fractions=()))


class TestExperiment3:
    def test_row_count_and_prevalence_params(self):
        rows = run_experiment3(tiny_config(classifiers=("bcha", "rusbcha")))
        assert len(rep_rows(rows)) == 2 * 2 * 2
        expected = sorted({abs(s - e) / (s + e) for s, e in ((15, 45), (25, 30))})
        assert sorted({r.param for r in rows}) == expected

    def test_ladder_exceeding_pool_rejected(self):
        with pytest.raises(ValueError, match="exceeds available"):
            run_experiment3(tiny_config(classifiers=("bcha",), ladder=((10_000, 10),)))


class TestMeansAndOutput:
    def test_mean_rows_are_arithmetic_means(self):
        rows = run_baseline(tiny_config())
        reps = rep_rows(rows)
        for mean in mean_rows(rows):
            members = [
                r.values for r in reps
                if (r.classifier, r.param) == (mean.classifier, mean.param)
            ]
            expected = np.mean(np.array(members), axis=0)
            assert np.max(np.abs(np.array(mean.values) - expected)) <= 1e-12

    def test_append_mean_rows_counts(self):
        rows = rep_rows(run_baseline(tiny_config()))
        assert len(append_mean_rows(rows)) == len(rows) + 2

    def test_csv_byte_identical(self, tmp_path):
        cfg = tiny_config(classifiers=("bcha", "rusbcha"))
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        save_results(run_experiment3(cfg), cfg, "exp3", p1)
        save_results(run_experiment3(cfg), cfg, "exp3", p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_csv_layout(self, tmp_path):
        cfg = tiny_config()
        path = tmp_path / "r.csv"
        save_results(run_baseline(cfg), cfg, "baseline", path)
        lines = path.read_text().splitlines()
        comments = [l for l in lines if l.startswith("#")]
        assert comments[0] == "# experiment=baseline"
        assert any(l.startswith("# master_seed=9") for l in comments)
        header = next(l for l in lines if not l.startswith("#"))
        assert header.startswith("experiment,classifier,param,rep,oa,oe,aa,ae,")
        data_lines = [l for l in lines if not l.startswith("#")][1:]
        assert len(data_lines) == 6
        # deterministic ordering: rep rows first per group, then the mean
        first_group = [l.split(",")[3] for l in data_lines[:3]]
        assert first_group == ["0", "1", "mean"]
