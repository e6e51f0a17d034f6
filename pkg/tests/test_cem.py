import numpy as np
import pytest

from wmmd.cem import (TrainConfig, TrainState, c_step, e_step,
                      estimate_source_priors, evaluate, m_step, train)
from wmmd.data import Dataset, MixtureSpec, make_bias_pair
from wmmd.exceptions import DataError, DegenerateWeightsError, ParameterError
from wmmd.kernels import KernelSpec
from wmmd.mmd import AuxWeights
from wmmd.model import ModelConfig, ModelParams, forward


def small_pair(bias=0.8, n=80, seed=0, shift=0.5):
    mix = MixtureSpec(np.array([[0.0, 0.0], [4.0, 0.0]]), np.ones(2),
                      np.array([0.5, 0.5]), np.full((2, 2), shift))
    return make_bias_pair(mix, (bias, 1 - bias), n, n, seed)


class TestTrainConfig:
    def test_defaults_valid(self):
        TrainConfig()

    def test_rejects_odd_batch(self):
        with pytest.raises(ParameterError):
            TrainConfig(batch_size=5)

    def test_rejects_bad_momentum(self):
        with pytest.raises(ParameterError):
            TrainConfig(momentum=1.0)


class TestSourcePriors:
    def test_balanced(self):
        np.testing.assert_allclose(estimate_source_priors([0, 0, 1, 1]), [0.5, 0.5])

    def test_absent_class(self):
        np.testing.assert_allclose(estimate_source_priors([0, 0, 0, 1], class_count=3),
                                   [0.75, 0.25, 0.0])

    def test_sampling_consistency(self):
        rng = np.random.default_rng(0)
        labels = rng.choice(3, size=1000, p=[0.7, 0.2, 0.1])
        priors = estimate_source_priors(labels, class_count=3)
        np.testing.assert_allclose(priors, [0.7, 0.2, 0.1], atol=0.05)

    def test_empty(self):
        with pytest.raises(DataError):
            estimate_source_priors([])


class TestEStep:
    def test_zero_model_uniform(self):
        cfg = ModelConfig.default(2, 4, (6,))
        params = ModelParams.zeros(cfg)
        post = e_step(params, np.random.default_rng(1).normal(size=(7, 2)))
        np.testing.assert_allclose(post, 0.25, atol=1e-15)

    def test_rows_sum_to_one(self):
        cfg = ModelConfig.default(3, 3, (5,))
        params = ModelParams.init(cfg, 2)
        post = e_step(params, np.random.default_rng(3).normal(size=(11, 3)))
        np.testing.assert_allclose(post.sum(axis=1), 1.0, atol=1e-12)

    def test_matches_forward_probs(self):
        cfg = ModelConfig.default(3, 2, (5,))
        params = ModelParams.init(cfg, 4)
        x = np.random.default_rng(5).normal(size=(9, 3))
        np.testing.assert_array_equal(e_step(params, x), forward(params, x).probs)


class TestCStep:
    def test_perfect_posteriors_unit_alphas(self):
        post = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]])
        pseudo, weights = c_step(post, [0.5, 0.5])
        np.testing.assert_array_equal(pseudo, [0, 1, 0, 1])
        np.testing.assert_allclose(weights.alphas, [1.0, 1.0])

    def test_hand_worked_example(self):
        post = np.array([[0.6, 0.4], [0.9, 0.1], [0.2, 0.8], [0.5, 0.5]])
        pseudo, weights = c_step(post, [0.5, 0.5], smoothing=0.0)
        np.testing.assert_array_equal(pseudo, [0, 0, 1, 0])  # tie goes to class 0
        np.testing.assert_allclose(weights.target_priors, [0.75, 0.25])
        np.testing.assert_allclose(weights.alphas, [1.5, 0.5])

    def test_absent_class_smoothing(self):
        post = np.array([[0.9, 0.1], [0.8, 0.2]])
        _, hard = c_step(post, [0.5, 0.5], smoothing=0.0)
        assert hard.alphas[1] == 0.0
        _, soft = c_step(post, [0.5, 0.5], smoothing=0.01)
        assert 0.0 < soft.alphas[1] < 0.1

    def test_degenerate_source_priors(self):
        post = np.array([[0.9, 0.1]])
        with pytest.raises(DegenerateWeightsError):
            c_step(post, [0.0, 0.0])

    def test_pseudo_labels_independent_of_alpha_scale(self):
        # argmax depends only on posteriors; alphas never enter
        post = np.random.default_rng(6).dirichlet(np.ones(3), size=20)
        p1, _ = c_step(post, [0.3, 0.3, 0.4])
        p2, _ = c_step(post, [0.2, 0.2, 0.6])
        np.testing.assert_array_equal(p1, p2)


class TestMStep:
    def _state(self, params, n_tgt, pseudo=None, seed=0):
        priors = np.array([0.5, 0.5])
        return TrainState(
            params=params, weights=AuxWeights.unit(priors),
            pseudo_labels=pseudo if pseudo is not None else np.zeros(n_tgt, dtype=np.int64),
            epoch=0, velocity=params.zero_gradients(),
            rng_src=np.random.default_rng(seed),
            rng_tgt=np.random.default_rng(seed + 1))

    def test_zero_learning_rate_keeps_params(self):
        pair = small_pair(n=20)
        cfg = ModelConfig.default(2, 2, (4,))
        params = ModelParams.init(cfg, 0)
        before = [w.copy() for w in params.weights]
        state = self._state(params, 20)
        config = TrainConfig(learning_rate=0.0, epochs=1, batch_size=8)
        terms = m_step(state, pair.source, pair.target, config, KernelSpec([1.0]))
        assert np.isfinite(terms.total)
        for w, b in zip(params.weights, before):
            np.testing.assert_array_equal(w, b)

    def test_full_batch_descent(self):
        # fixed objective (lam=0 so batch pairing cannot change the loss),
        # exact gradients, no momentum: strict descent
        pair = small_pair(n=16)
        cfg = ModelConfig.default(2, 2, (6,))
        params = ModelParams.init(cfg, 1)
        state = self._state(params, 16)
        state.pseudo_labels = np.zeros(16, dtype=np.int64)
        config = TrainConfig(lam=0.0, gamma=0.3, learning_rate=0.02,
                             momentum=0.0, batch_size=16, epochs=1)
        losses = [m_step(state, pair.source, pair.target, config,
                         KernelSpec([1.0])).total for _ in range(6)]
        assert all(losses[i] > losses[i + 1] for i in range(5))

    def test_too_few_samples(self):
        cfg = ModelConfig.default(2, 2, (4,))
        params = ModelParams.init(cfg, 2)
        state = self._state(params, 1)
        src = Dataset(np.zeros((1, 2)), np.zeros(1, dtype=np.int64))
        with pytest.raises(DataError):
            m_step(state, src, np.zeros((1, 2)), TrainConfig(), KernelSpec([1.0]))


class TestTrain:
    def test_deterministic_given_seed(self):
        pair = small_pair(n=40)
        mc = ModelConfig.default(2, 2, (6, 4))
        tc = TrainConfig(epochs=4, seed=7)
        s1 = train(pair.source, pair.target, mc, tc)
        s2 = train(pair.source, pair.target, mc, tc)
        assert s1.loss_history == s2.loss_history
        for w1, w2 in zip(s1.params.weights, s2.params.weights):
            assert np.array_equal(w1, w2)

    def test_alpha_starts_at_one(self):
        pair = small_pair(n=40)
        mc = ModelConfig.default(2, 2, (6,))
        tc = TrainConfig(epochs=1, seed=0)
        state = train(pair.source, pair.target, mc, tc)
        np.testing.assert_array_equal(state.alpha_history[0], [1.0, 1.0])

    def test_alpha_updates_from_second_epoch(self):
        pair = small_pair(bias=0.9, n=100)
        mc = ModelConfig.default(2, 2, (8,))
        tc = TrainConfig(epochs=3, seed=1)
        state = train(pair.source, pair.target, mc, tc)
        assert not np.array_equal(state.alpha_history[1], [1.0, 1.0])

    def test_freeze_alpha_keeps_unit_weights(self):
        pair = small_pair(bias=0.9, n=60)
        mc = ModelConfig.default(2, 2, (6,))
        tc = TrainConfig(epochs=3, seed=2)
        state = train(pair.source, pair.target, mc, tc, freeze_alpha=True)
        for alphas in state.alpha_history:
            np.testing.assert_array_equal(alphas, [1.0, 1.0])

    def test_source_only_ignores_target_values(self):
        # lam = 0 and gamma = 0: target features must not influence training
        pair_a = small_pair(n=50, seed=3)
        pair_b = small_pair(n=50, seed=4)
        mc = ModelConfig.default(2, 2, (6,))
        tc = TrainConfig(lam=0.0, gamma=0.0, epochs=3, seed=5)
        s_a = train(pair_a.source, pair_a.target, mc, tc)
        s_b = train(pair_a.source, pair_b.target, mc, tc)
        for w1, w2 in zip(s_a.params.weights, s_b.params.weights):
            assert np.array_equal(w1, w2)
        assert s_a.loss_history == s_b.loss_history

    def test_loss_history_finite_across_lambda_grid(self):
        from wmmd.cem import LAMBDA_GRID
        pair = small_pair(bias=0.8, n=60)
        mc = ModelConfig.default(2, 2, (6,))
        for lam in LAMBDA_GRID:
            tc = TrainConfig(lam=lam, epochs=2, seed=0)
            state = train(pair.source, pair.target, mc, tc)
            assert all(np.isfinite(v) for v in state.loss_history)

    def test_alpha_recovery_on_shifted_prior_task(self):
        # known-ground-truth oracle: with adaptation on an easy task the
        # final alphas approach the true prior ratio for most seeds
        hits = 0
        seeds = 8
        true = np.array([0.8 / 0.5, 0.2 / 0.5])
        for seed in range(seeds):
            pair = small_pair(bias=0.8, n=200, seed=100 + seed)
            mc = ModelConfig.default(2, 2, (16, 8))
            tc = TrainConfig(lam=0.4, gamma=0.2, epochs=25, seed=seed)
            state = train(pair.source, pair.target, mc, tc)
            alphas = state.weights.alphas
            alphas = alphas / np.sum(np.array([0.5, 0.5]) * alphas)
            if np.all(np.abs(alphas - true) <= 0.15):
                hits += 1
        assert hits >= 0.8 * seeds

    def test_records_have_expected_fields(self):
        pair = small_pair(n=40)
        mc = ModelConfig.default(2, 2, (6,))
        tc = TrainConfig(epochs=2, seed=0)
        labels = pair.evaluation_target().labels
        state = train(pair.source, pair.target, mc, tc, eval_target_labels=labels)
        assert len(state.records) == 2
        rec = state.records[-1]
        assert rec.epoch == 2
        assert rec.loss == state.loss_history[-1]
        assert rec.target_accuracy is not None
        assert 0.0 <= rec.target_accuracy <= 1.0


class TestEvaluate:
    def test_perfect_predictions(self):
        cfg = ModelConfig(1, (), 2, (1,))
        # logits = [x, -x]: predicts class 0 for positive x
        params = ModelParams(cfg, [np.array([[1.0, -1.0]])], [np.zeros(2)])
        ds = Dataset(np.array([[1.0], [2.0], [-1.0]]), np.array([0, 0, 1]))
        result = evaluate(params, ds)
        assert result.accuracy == 1.0
        np.testing.assert_array_equal(result.confusion, [[2, 0], [0, 1]])

    def test_constant_predictor_on_balanced_data(self):
        cfg = ModelConfig(1, (), 2, (1,))
        params = ModelParams(cfg, [np.array([[0.0, 1.0]])], [np.array([0.0, 1.0])])
        ds = Dataset(np.ones((10, 1)), np.array([0] * 5 + [1] * 5))
        assert evaluate(params, ds).accuracy == 0.5

    def test_counting_oracle(self):
        cfg = ModelConfig(1, (), 2, (1,))
        params = ModelParams(cfg, [np.array([[1.0, -1.0]])], [np.zeros(2)])
        feats = np.array([[1.0]] * 7 + [[-1.0]] * 3)
        labels = np.array([0] * 7 + [0] * 3)  # 7 correct, 3 wrong
        assert evaluate(params, Dataset(feats, labels)).accuracy == 0.7

    def test_requires_labels(self):
        cfg = ModelConfig(1, (), 2, (1,))
        params = ModelParams.zeros(cfg)
        with pytest.raises(DataError):
            evaluate(params, Dataset(np.ones((3, 1))))
