import numpy as np
import pytest

from onsetwarn.errors import ShapeMismatchError
from onsetwarn.models import LSTMConfig, LSTMModel, load_model, save_model, weighted_bce
from onsetwarn.models.losses import weighted_bce_grad
from oracles import max_relative_gradient_error, numerical_gradients

GRADCHECK_TOL = 1e-4


def loss_on(model, X, y):
    logits, _ = model.forward(X, train_mode=False)
    return weighted_bce(logits, y, pos_weight=2.0)


def analytic_grads(model, X, y):
    logits, cache = model.forward(X, train_mode=False)
    _, dlogits = weighted_bce_grad(logits, y, pos_weight=2.0)
    return model.backward(cache, dlogits)


class TestForward:
    def test_zero_network_outputs_head_bias(self):
        model = LSTMModel(LSTMConfig(input_dim=3, hidden_dim=4, num_layers=2, dropout=0.0, seed=0))
        for key in model.params:
            model.params[key] = np.zeros_like(model.params[key])
        model.params["head_b"] = np.array([0.7])
        logits, _ = model.forward(np.random.default_rng(0).normal(size=(2, 5, 3)))
        assert logits == pytest.approx([0.7, 0.7])

    def test_eval_mode_deterministic(self):
        model = LSTMModel(LSTMConfig(input_dim=3, hidden_dim=8, seed=1))
        X = np.random.default_rng(1).normal(size=(1, 6, 3))
        a, _ = model.forward(np.vstack([X, X]))
        assert a[0] == a[1]
        b, _ = model.forward(np.vstack([X, X]))
        assert np.array_equal(a, b)

    def test_single_window_accepted(self):
        model = LSTMModel(LSTMConfig(input_dim=2, hidden_dim=4, seed=2))
        logits, _ = model.forward(np.zeros((7, 2)))
        assert logits.shape == (1,)
        assert np.isfinite(logits).all()

    def test_shape_mismatch(self):
        model = LSTMModel(LSTMConfig(input_dim=3, hidden_dim=4, seed=0))
        with pytest.raises(ShapeMismatchError):
            model.forward(np.zeros((2, 5, 4)))

    def test_forget_bias_initialized_to_one(self):
        model = LSTMModel(LSTMConfig(input_dim=3, hidden_dim=4, num_layers=2, seed=0))
        for layer in range(2):
            b = model.params[f"b{layer}"]
            assert np.array_equal(b[4:8], np.ones(4))
            assert np.array_equal(b[:4], np.zeros(4))

    def test_dropout_changes_training_forward(self):
        model = LSTMModel(LSTMConfig(input_dim=3, hidden_dim=8, dropout=0.5, seed=3))
        X = np.random.default_rng(2).normal(size=(4, 5, 3))
        eval_logits, _ = model.forward(X)
        train_logits, _ = model.forward(X, train_mode=True, rng=np.random.default_rng(0))
        assert not np.allclose(eval_logits, train_logits)


class TestGradients:
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_finite_difference_check(self, seed):
        rng = np.random.default_rng(seed)
        model = LSTMModel(
            LSTMConfig(input_dim=3, hidden_dim=6, num_layers=2, dropout=0.0, seed=seed)
        )
        X = rng.normal(size=(2, 5, 3))
        y = np.array([1.0, 0.0])
        analytic = analytic_grads(model, X, y)
        numeric = numerical_gradients(model, X, y, loss_on)
        err = max_relative_gradient_error(analytic, numeric)
        assert err < GRADCHECK_TOL, f"seed {seed}: max rel grad error {err:.3e}"

    def test_gradients_cover_every_parameter(self):
        model = LSTMModel(LSTMConfig(input_dim=2, hidden_dim=4, num_layers=2, dropout=0.0, seed=5))
        X = np.random.default_rng(5).normal(size=(3, 4, 2))
        grads = analytic_grads(model, X, np.array([0.0, 1.0, 1.0]))
        assert set(grads) == set(model.params)
        for key, g in grads.items():
            assert g.shape == model.params[key].shape
            assert np.isfinite(g).all()
            assert np.abs(g).sum() > 0, f"parameter {key} received no gradient"


class TestSerialization:
    def test_round_trip(self, tmp_path):
        model = LSTMModel(LSTMConfig(input_dim=4, hidden_dim=8, seed=9))
        X = np.random.default_rng(9).normal(size=(3, 6, 4))
        path = tmp_path / "lstm.json"
        save_model(model, path)
        loaded = load_model(path)
        a, _ = model.forward(X)
        b, _ = loaded.forward(X)
        assert np.array_equal(a, b)
