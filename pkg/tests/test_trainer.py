import math

import numpy as np
import pytest

from poibinglm import glm, poibin, trainer
from poibinglm.dataset import Dataset, Precinct, SyntheticSpec, generate_synthetic
from poibinglm.errors import InputError, NumericError
from poibinglm.trainer import FitConfig, clip_or_skip, dataset_loss, fit, init_params


@pytest.fixture(scope="module")
def small_synth():
    spec = SyntheticSpec(n_precincts=300, voters_per_precinct=100)
    return generate_synthetic(spec, seed=11)


def tiny_dataset(rng, n_precincts=6, max_voters=12, d=2):
    precincts = []
    for k in range(n_precincts):
        n = int(rng.integers(2, max_voters + 1))
        precincts.append(Precinct("C", f"P{k}", rng.normal(size=(n, d)),
                                  int(rng.integers(0, n + 1)), n))
    return Dataset(tuple(precincts), tuple(f"x{j}" for j in range(d)))


class TestFitConfig:
    def test_defaults(self):
        cfg = FitConfig()
        assert cfg.learning_rate == 1e-4 and cfg.anneal_exponent == 0.5
        assert cfg.hidden_size == 10 and cfg.update_mode == "per_precinct"

    @pytest.mark.parametrize("kwargs", [
        {"learning_rate": 0}, {"epochs": -1}, {"clip_norm": 1e-9}, {"hidden_size": 0},
        {"l2_lambda": -1}, {"update_mode": "adam"},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InputError):
            FitConfig(**kwargs)

    def test_annealing_contract(self):
        cfg = FitConfig()
        rates = [cfg.learning_rate_at(e) for e in range(1, 50)]
        assert rates[0] == cfg.learning_rate
        assert all(a >= b for a, b in zip(rates, rates[1:]))
        assert rates[3] == pytest.approx(cfg.learning_rate / 2)


class TestInitParams:
    def test_logistic_zeros(self):
        p = init_params("logistic", 5)
        np.testing.assert_array_equal(p.theta, np.zeros(6))

    @pytest.mark.parametrize("seed", [0, 1, 99])
    def test_neural_range(self, seed):
        p = init_params("neural", 4, FitConfig(seed=seed))
        assert p.w1.shape == (10, 4)
        assert np.all(np.abs(p.w1) <= 0.1) and np.all(np.abs(p.w2) <= 0.1)
        assert np.all(p.b1 == 0) and p.b2 == 0

    def test_seeded(self):
        a = init_params("neural", 3, FitConfig(seed=5, hidden_size=4))
        b = init_params("neural", 3, FitConfig(seed=5, hidden_size=4))
        np.testing.assert_array_equal(a.to_vector(), b.to_vector())

    def test_bad_kind(self):
        with pytest.raises(InputError):
            init_params("probit", 3)


class TestClipOrSkip:
    cfg = FitConfig(clip_norm=5.0, skip_norm=1e-8)

    def test_halves(self):
        g = glm.LogisticParams([6.0, 8.0])
        out, clipped = clip_or_skip(g, self.cfg)
        assert clipped
        np.testing.assert_allclose(out.theta, [3.0, 4.0])

    def test_unchanged(self):
        g = glm.LogisticParams([0.0, 3.0])
        out, clipped = clip_or_skip(g, self.cfg)
        assert not clipped and out is g

    def test_skip(self):
        out, clipped = clip_or_skip(glm.LogisticParams([1e-12, 0.0]), self.cfg)
        assert out is None and not clipped

    def test_neural_joint_norm(self):
        g = glm.NeuralParams(np.full((2, 2), 3.0), np.zeros(2), np.zeros(2), 4.0)
        out, clipped = clip_or_skip(g, self.cfg)
        # joint norm sqrt(4*9 + 16) = sqrt(52)
        factor = 5.0 / math.sqrt(52)
        assert clipped
        np.testing.assert_allclose(out.w1, 3.0 * factor)
        assert out.b2 == pytest.approx(4.0 * factor)

    def test_non_finite(self):
        with pytest.raises(NumericError):
            clip_or_skip(glm.LogisticParams([np.nan, 1.0]), self.cfg)


class TestDatasetLoss:
    def test_single_precinct(self):
        ds = Dataset((Precinct("C", "P", np.zeros((2, 1)), 1, 2),), ("x",))
        loss = dataset_loss(ds, glm.LogisticParams([0.0, 0.0]))
        assert loss == pytest.approx(math.log(math.sqrt(0.5)), abs=1e-15)

    def test_two_identical(self, rng):
        pr = Precinct("C", "P", rng.normal(size=(10, 2)), 4, 10)
        params = glm.LogisticParams(rng.normal(size=3))
        one = dataset_loss(Dataset((pr,), ("a", "b")), params)
        two = dataset_loss(Dataset((pr, pr), ("a", "b")), params)
        assert two == 2 * one

    def test_exact_matches_enumeration(self, rng):
        ds = tiny_dataset(rng)
        params = glm.LogisticParams(rng.normal(size=3))
        expected = -math.fsum(
            math.log(poibin.pmf_enumerate(glm.precinct_probs(params, p), p.D)) for p in ds)
        assert dataset_loss(ds, params, exact=True) == pytest.approx(expected, abs=1e-9)

    def test_additivity(self, rng):
        ds = tiny_dataset(rng, n_precincts=20)
        params = glm.LogisticParams(rng.normal(size=3))
        whole = dataset_loss(ds, params)
        parts = dataset_loss(ds.subset(range(0, 7)), params) + \
            dataset_loss(ds.subset(range(7, 20)), params)
        assert whole == pytest.approx(parts, abs=1e-9)

    def test_approx_matches_per_precinct(self, rng):
        ds = tiny_dataset(rng)
        params = glm.NeuralParams(rng.normal(size=(3, 2)), rng.normal(size=3),
                                  rng.normal(size=3), 0.1)
        expected = -math.fsum(glm.approx_loglik(params, p) for p in ds)
        assert dataset_loss(ds, params) == pytest.approx(expected, abs=1e-10)

    def test_degenerate_counted(self):
        ds = Dataset((Precinct("C", "P", np.zeros((2, 1)), 1, 2),
                      Precinct("C", "Q", np.zeros((3, 1)), 0, 0)), ("x",))
        loss, skipped = dataset_loss(ds, glm.LogisticParams([0.0, 0.0]), return_count=True)
        assert skipped == 1
        assert loss == pytest.approx(math.log(math.sqrt(0.5)))

    def test_exact_count_outside_support(self):
        ds = Dataset((Precinct("C", "P", np.zeros((2, 1)), 3, 4),), ("x",))
        loss, under = dataset_loss(ds, glm.LogisticParams([0.0, 0.0]), exact=True,
                                   return_count=True)
        assert under == 1 and loss == -poibin.UNDERFLOW_SENTINEL


class TestFit:
    def test_zero_epochs(self, rng):
        ds = tiny_dataset(rng)
        report = fit(ds, "logistic", FitConfig(epochs=0))
        np.testing.assert_array_equal(report.params.theta, np.zeros(3))
        assert report.approx_nll == [] and report.epochs_run == 0

    def test_empty_dataset(self):
        with pytest.raises(InputError):
            fit(Dataset((), ("x",)), "logistic")

    def test_progress(self, small_synth):
        ds, _ = small_synth
        report = fit(ds, "logistic", FitConfig(epochs=10))
        assert report.approx_nll[9] < report.approx_nll[0]
        assert len(report.approx_nll) == report.epochs_run == 10
        assert 0 <= report.clipped_count <= 10 * len(ds)

    def test_determinism(self, small_synth):
        ds, _ = small_synth
        cfg = FitConfig(epochs=3, hidden_size=3, seed=4)
        a = fit(ds, "neural", cfg)
        b = fit(ds, "neural", cfg)
        assert a.approx_nll == b.approx_nll
        assert a.params.to_vector().tobytes() == b.params.to_vector().tobytes()

    def test_exact_tracking(self, small_synth):
        ds, _ = small_synth
        report = fit(ds, "logistic", FitConfig(epochs=3, track_exact_loss=True, exact_subsample=20))
        assert len(report.exact_nll) == len(report.exact_scope_approx_nll) == 3
        full = fit(ds.subset(range(20)), "logistic", FitConfig(epochs=2, track_exact_loss=True))
        assert full.exact_scope_approx_nll is None and len(full.exact_nll) == 2

    def test_clipping_contract(self, small_synth, monkeypatch):
        ds, _ = small_synth
        seen = []
        real_grad = trainer.grad

        def spy(params, precinct):
            seen.append(params.to_vector())
            return real_grad(params, precinct)

        monkeypatch.setattr(trainer, "grad", spy)
        cfg = FitConfig(epochs=2, clip_norm=2.0)
        report = fit(ds.subset(range(50)), "logistic", cfg)
        seen.append(report.params.to_vector())
        steps = np.linalg.norm(np.diff(np.array(seen), axis=0), axis=1)
        assert np.all(steps[:50] <= cfg.learning_rate_at(1) * cfg.clip_norm * (1 + 1e-12))
        assert np.all(steps[50:] <= cfg.learning_rate_at(2) * cfg.clip_norm * (1 + 1e-12))

    def test_l2_shrinkage(self, small_synth):
        ds, _ = small_synth
        free = fit(ds, "logistic", FitConfig(epochs=5))
        shrunk = fit(ds, "logistic", FitConfig(epochs=5, l2_lambda=1e3))
        assert np.linalg.norm(shrunk.params.theta[1:]) < np.linalg.norm(free.params.theta[1:])

    def test_training_progress_one_percent(self, small_synth):
        ds, _ = small_synth
        report = fit(ds, "logistic", FitConfig(epochs=20))
        assert report.approx_nll[-1] < 0.99 * report.approx_nll[0]

    def test_neural_fit_reduces_loss(self, small_synth):
        ds, _ = small_synth
        report = fit(ds, "neural", FitConfig(epochs=5, hidden_size=4))
        assert report.approx_nll[-1] < report.approx_nll[0]

    @pytest.mark.parametrize("mode", ["batch", "stochastic"])
    def test_other_update_modes(self, small_synth, mode):
        ds, _ = small_synth
        report = fit(ds, "logistic", FitConfig(epochs=3, update_mode=mode))
        assert report.epochs_run == 3 and all(np.isfinite(report.approx_nll))

    def test_stochastic_order_is_seeded(self, small_synth):
        ds, _ = small_synth
        cfg = FitConfig(epochs=2, update_mode="stochastic", seed=3)
        assert fit(ds, "logistic", cfg).approx_nll == fit(ds, "logistic", cfg).approx_nll

    def test_degenerate_precincts_skipped(self):
        ds = Dataset((Precinct("C", "P", np.ones((4, 1)), 2, 4),
                      Precinct("C", "Q", np.ones((3, 1)), 0, 0)), ("x",))
        report = fit(ds, "logistic", FitConfig(epochs=2))
        assert report.degenerate_skips == 2

    def test_skip_small_gradients(self):
        ds = Dataset((Precinct("C", "P", np.zeros((4, 1)), 2, 4),), ("x",))
        report = fit(ds, "logistic", FitConfig(epochs=3))
        assert report.skipped_count == 3
        np.testing.assert_array_equal(report.params.theta, [0.0, 0.0])

    def test_report_json_fields(self, rng):
        report = fit(tiny_dataset(rng), "logistic", FitConfig(epochs=1))
        js = report.to_json()
        for key in ("approx_nll", "exact_nll", "epochs_run", "clipped_count", "skipped_count",
                    "degenerate_skips", "wall_time_s", "params"):
            assert key in js
        assert "wall_time_s" not in report.to_json(include_wall_time=False)
