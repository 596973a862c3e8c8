import numpy as np
import pytest
from scipy import stats

from activeseq.data import (
    DiscreteFeatureScenario,
    GaussianScenario,
    IngestionError,
    MixtureScenario,
    gaussian_cell_priors,
    gen_discrete_pool,
    gen_mixture_pool,
    load_csv_pool,
    write_csv_pool,
)
from activeseq.engine import RunConfig, run_batch

N = 100_000


class TestGaussian:
    def test_null_has_matching_class_means(self):
        pool = GaussianScenario(delta=0.0, pool_size=N).generate(np.random.default_rng(0))
        x, z = pool.features[:, 0], pool.hidden_labels
        assert stats.ttest_ind(x[z == 0], x[z == 1]).pvalue > 1e-3

    def test_shifted_class_mean(self):
        pool = GaussianScenario(delta=0.5, pool_size=N).generate(np.random.default_rng(1))
        x, z = pool.features, pool.hidden_labels
        assert abs(x[z == 1, 0].mean() - 0.5) < 0.01
        assert abs(x[z == 0, 0].mean() + 0.5) < 0.01
        # only coordinate 0 carries signal
        assert abs(x[z == 1, 1].mean()) < 0.01

    def test_prior(self):
        pool = GaussianScenario(prior0=0.8, pool_size=N).generate(np.random.default_rng(2))
        assert abs(np.mean(pool.hidden_labels == 0) - 0.8) < 0.004

    def test_deterministic(self):
        scen = GaussianScenario(delta=0.2, pool_size=50, dim=3)
        a = scen.generate(np.random.default_rng(9))
        b = scen.generate(np.random.default_rng(9))
        assert a.features.shape == (50, 3)
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.hidden_labels, b.hidden_labels)

    def test_validation(self):
        for kw in (dict(delta=-1.0), dict(prior0=1.0), dict(dim=0)):
            with pytest.raises(ValueError):
                GaussianScenario(**kw)

    def test_exact_cell_priors_match_sample(self):
        scen = GaussianScenario(delta=0.4, prior0=0.6, pool_size=N)
        exact = gaussian_cell_priors(scen, [-1.0, 1.0])
        pool = scen.generate(np.random.default_rng(4))
        cell = np.digitize(pool.features[:, 0], [-1.0, 1.0])
        for c, p in enumerate(exact):
            assert abs(np.mean(pool.hidden_labels[cell == c] == 0) - p) < 0.015
        assert gaussian_cell_priors(GaussianScenario(prior0=0.3), [0.0]) == \
            pytest.approx([0.3, 0.3])


class TestMixture:
    def test_null_ratio(self):
        scen = MixtureScenario(mixture_ratio=1.0)
        assert scen.is_null
        pool, from_b = gen_mixture_pool(scen, np.random.default_rng(0), return_components=True)
        assert not from_b.any()

    def test_contamination_fraction(self):
        scen = MixtureScenario(mixture_ratio=0.7, pool_size=N)
        pool, from_b = gen_mixture_pool(scen, np.random.default_rng(1), return_components=True)
        ones = pool.hidden_labels == 1
        assert abs(from_b[ones].mean() - 0.3) < 0.01
        assert not from_b[~ones].any()

    def test_validation(self):
        with pytest.raises(ValueError):
            MixtureScenario(means=((0.0, 0.0),))
        with pytest.raises(ValueError):
            MixtureScenario(means=((0.0, 0.0), (1.0,)))
        with pytest.raises(ValueError):
            MixtureScenario(mixture_ratio=1.5)

    def test_far_component_is_always_detected(self):
        scen = MixtureScenario(means=((0.0, 0.0), (3.0, 0.0)), mixture_ratio=0.7, pool_size=1200)
        recs = run_batch(RunConfig(budget=1000), scen, 5, base_seed=8)
        assert all(r.rejected for r in recs)


class TestDiscrete:
    def test_support_frequencies(self):
        scen = DiscreteFeatureScenario((0.9, 0.1, 0.5), (0.2, 0.3, 0.5), pool_size=N)
        pool, point = gen_discrete_pool(scen, np.random.default_rng(0), return_support=True)
        for i, (post, w) in enumerate(zip(scen.posteriors, scen.weights)):
            assert abs(np.mean(point == i) - w) < 0.005
            assert abs(np.mean(pool.hidden_labels[point == i] == 0) - post) < 0.01
        assert set(np.unique(pool.features)) == {0.0, 1.0, 2.0}

    def test_null(self):
        assert DiscreteFeatureScenario((0.3, 0.3), (0.5, 0.5)).is_null
        with pytest.raises(ValueError):
            DiscreteFeatureScenario((0.3, 0.3), (0.5, 0.6))


class TestCSV:
    def test_small_file(self, tmp_path):
        p = tmp_path / "pool.csv"
        p.write_text("a,b,z\n0.5,1.0,0\n-1,2,1\n3,4e-1,1\n")
        pool = load_csv_pool(p)
        assert len(pool) == 3 and pool.dim == 2
        assert pool.hidden_labels.tolist() == [0, 1, 1]
        assert pool.features[2].tolist() == [3.0, 0.4]

    def test_label_column_anywhere(self, tmp_path):
        p = tmp_path / "pool.csv"
        p.write_text("y,x\n1,0.25\n0,0.5\n")
        pool = load_csv_pool(p, label_column="y")
        assert pool.features[:, 0].tolist() == [0.25, 0.5]

    @pytest.mark.parametrize("body, match", [
        ("a,z\n1,0\n2,2\n", "row 3"),
        ("a,z\n1,0\nx,1\n", "row 3"),
        ("a,z\n1,0,5\n", "row 2"),
        ("a,b\n1,0\n", "label column"),
        ("", "empty"),
        ("a,z\n", "no data"),
    ])
    def test_errors(self, tmp_path, body, match):
        p = tmp_path / "bad.csv"
        p.write_text(body)
        with pytest.raises(IngestionError, match=match):
            load_csv_pool(p)

    def test_round_trip_is_exact(self, tmp_path):
        pool = GaussianScenario(delta=0.3, pool_size=500, dim=3).generate(
            np.random.default_rng(12))
        write_csv_pool(pool, tmp_path / "p.csv")
        back = load_csv_pool(tmp_path / "p.csv")
        assert back.features.tobytes() == pool.features.tobytes()
        assert np.array_equal(back.hidden_labels, pool.hidden_labels)
