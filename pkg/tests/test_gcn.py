import numpy as np
import pytest

from graphadv import (
    GcnParams,
    SparseMatrix,
    TrainConfig,
    gcn_forward,
    gcn_objective,
    glorot_init,
    init_params,
    load_checkpoint,
    normalize_adjacency,
    predict,
    save_checkpoint,
)
from graphadv import autodiff as ad
from graphadv.gcn import bind_params
from graphadv.rng import generator

from conftest import adjacency_from_edges


def identity_propagation(n):
    return normalize_adjacency(SparseMatrix.from_coo(n, n, [], [], []))


class TestGlorotInit:
    def test_bound_for_2x4(self):
        w = glorot_init(2, 4, seed=0)
        assert np.all(np.abs(w) <= 1.0)  # sqrt(6/6) = 1

    def test_same_seed_same_matrix(self):
        assert np.array_equal(glorot_init(5, 7, seed=3), glorot_init(5, 7, seed=3))

    def test_mean_within_three_sigma(self):
        n = 1000
        w = glorot_init(n, 1, seed=1).ravel()
        bound = np.sqrt(6.0 / (n + 1))
        sigma = (2 * bound) / np.sqrt(12)  # stdev of U(-bound, bound)
        assert abs(w.mean()) < 3 * sigma / np.sqrt(n)

    def test_rejects_bad_dims(self):
        with pytest.raises(ValueError):
            glorot_init(0, 3, seed=0)


class TestGcnForward:
    def test_edgeless_graph_is_per_node_mlp(self):
        rng = np.random.default_rng(0)
        n, f = 5, 4
        a_hat = identity_propagation(n)
        params = init_params(f, 3, 2, seed=1)
        x = rng.random((n, f))
        probs, _ = gcn_forward(a_hat, x, params)
        perm = rng.permutation(n)
        probs_perm, _ = gcn_forward(a_hat, x[perm], params)
        assert np.allclose(probs_perm.value, probs.value[perm], atol=1e-15)

    def test_identical_rows_identical_outputs(self):
        a_hat = identity_propagation(3)
        params = init_params(4, 3, 2, seed=2)
        row = np.random.default_rng(1).random(4)
        x = np.stack([row, row, row])
        probs, _ = gcn_forward(a_hat, x, params)
        assert np.array_equal(probs.value[0], probs.value[1])
        assert np.array_equal(probs.value[0], probs.value[2])

    def test_zero_output_layer_gives_uniform(self):
        a_hat = identity_propagation(4)
        params = init_params(3, 5, 7, seed=0)
        params.w2[:] = 0.0
        params.b2[:] = 0.0
        probs, _ = gcn_forward(a_hat, np.random.default_rng(0).random((4, 3)), params)
        assert np.allclose(probs.value, 1.0 / 7, atol=1e-15)

    def test_two_node_hand_computation(self):
        # one edge, 1-d feature/hidden/output weights chosen by hand
        a_hat = normalize_adjacency(adjacency_from_edges(2, [(0, 1)]))
        params = GcnParams(
            w1=np.array([[2.0]]), b1=np.array([0.5]),
            w2=np.array([[1.0, -1.0]]), b2=np.array([0.25, 0.0]),
        )
        x = np.array([[1.0], [3.0]])
        # every entry of a_hat is 0.5
        h_pre = 0.5 * (2 * x + 0.5) + 0.5 * (2 * x[::-1] + 0.5)
        h = np.maximum(h_pre, 0)
        z_pre = np.concatenate([h + 0.25, -h], axis=1)
        z = 0.5 * z_pre + 0.5 * z_pre[::-1]
        expected = np.exp(z - z.max(axis=1, keepdims=True))
        expected /= expected.sum(axis=1, keepdims=True)
        probs, _ = gcn_forward(a_hat, x, params)
        assert np.allclose(probs.value, expected, atol=1e-12)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(3)
        a_hat = normalize_adjacency(adjacency_from_edges(4, [(0, 1), (1, 2), (2, 3)]))
        params = init_params(6, 4, 3, seed=5)
        probs, _ = gcn_forward(a_hat, rng.random((4, 6)) * 100, params)
        assert np.allclose(probs.value.sum(axis=1), 1.0, atol=1e-9)

    def test_inference_is_deterministic_and_dropout_free(self):
        a_hat = identity_propagation(6)
        params = init_params(3, 4, 2, seed=0)
        x = np.random.default_rng(2).random((6, 3))
        p1 = predict(a_hat, x, params)
        p2 = predict(a_hat, x, params)
        assert np.array_equal(p1, p2)

    def test_dropout_changes_training_forward(self):
        a_hat = identity_propagation(6)
        params = init_params(3, 4, 2, seed=0)
        x = np.random.default_rng(2).random((6, 3))
        probs, _ = gcn_forward(
            a_hat, x, params, dropout_rate=0.5, training=True, rng=generator(0)
        )
        assert not np.allclose(probs.value, predict(a_hat, x, params))

    def test_dropout_requires_rng(self):
        a_hat = identity_propagation(2)
        params = init_params(3, 4, 2, seed=0)
        with pytest.raises(ValueError, match="rng"):
            gcn_forward(a_hat, np.ones((2, 3)), params, dropout_rate=0.5, training=True)

    def test_shape_mismatch_rejected(self):
        a_hat = identity_propagation(2)
        params = init_params(3, 4, 2, seed=0)
        with pytest.raises(ValueError, match="features"):
            gcn_forward(a_hat, np.ones((2, 5)), params)
        with pytest.raises(ValueError, match="adjacency"):
            gcn_forward(a_hat, np.ones((3, 3)), params)


class TestGcnObjective:
    def build(self, probs_value, labels, train_nodes, params, weight_decay):
        tape = ad.Tape()
        pn = bind_params(tape, params)
        # drive the recorded probs through softmax of log-probs so the node
        # is well-formed; value equals probs_value up to clamping
        logits = tape.leaf(np.log(np.clip(probs_value, 1e-300, None)))
        probs = ad.softmax_rows(logits)
        return gcn_objective(probs, labels, train_nodes, pn, weight_decay)

    def test_perfect_predictions_near_zero_loss(self):
        params = init_params(2, 2, 3, seed=0)
        probs = np.full((4, 3), 1e-15)
        labels = np.array([0, 1, 2, 0])
        probs[np.arange(4), labels] = 1.0
        loss = self.build(probs, labels, np.arange(4), params, 0.0)
        assert float(loss.value) < 1e-10

    def test_uniform_predictions_log_l(self):
        params = init_params(2, 2, 7, seed=0)
        probs = np.full((3, 7), 1.0 / 7)
        loss = self.build(probs, np.array([0, 3, 6]), np.arange(3), params, 0.0)
        assert float(loss.value) == pytest.approx(np.log(7), abs=1e-12)

    def test_weight_decay_isolated(self):
        params = init_params(3, 4, 2, seed=1)
        probs = np.full((2, 2), 1e-15)
        labels = np.array([0, 1])
        probs[np.arange(2), labels] = 1.0
        loss = self.build(probs, labels, np.arange(2), params, 1.0)
        expected = (params.w1**2).sum() + (params.w2**2).sum()
        assert float(loss.value) == pytest.approx(expected, abs=1e-9)

    def test_doubling_weight_decay_adds_exact_penalty(self):
        a_hat = identity_propagation(3)
        params = init_params(2, 3, 2, seed=2)
        x = np.random.default_rng(0).random((3, 2))
        labels = np.array([0, 1, 0])

        def objective(wd):
            tape = ad.Tape()
            pn = bind_params(tape, params)
            probs, _ = gcn_forward(a_hat, x, pn, tape=tape)
            return float(gcn_objective(probs, labels, np.arange(3), pn, wd).value)

        penalty = (params.w1**2).sum() + (params.w2**2).sum()
        assert objective(2e-3) - objective(1e-3) == pytest.approx(1e-3 * penalty, rel=1e-9)

    def test_empty_train_set_rejected(self):
        params = init_params(2, 2, 2, seed=0)
        with pytest.raises(ValueError, match="empty"):
            self.build(np.full((2, 2), 0.5), np.array([0, 1]), np.array([], dtype=int), params, 0.0)


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        params = init_params(5, 3, 4, seed=7)
        config = TrainConfig(mode="graphat", epsilon=0.05, beta=0.5, seed=7)
        path = tmp_path / "ckpt.json"
        save_checkpoint(params, config, path)
        loaded_params, loaded_config = load_checkpoint(path)
        for name in ("w1", "b1", "w2", "b2"):
            assert np.array_equal(getattr(loaded_params, name), getattr(params, name))
        assert loaded_config == config
