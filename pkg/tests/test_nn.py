import copy
import math

import numpy as np
import pytest

from latentseq.errors import CorpusError, FormatError, InputError
from latentseq.nn import (
    ARCHITECTURES,
    AutoencoderModel,
    DenseLayer,
    Network,
    backward,
    bce_loss,
    forward,
    init_model,
    l2_penalty,
    load_model,
    parameter_count,
    save_model,
    split,
    train,
)


def closed_form_params(dims):
    # Independent oracle for parameter counts.
    return sum(dims[i] * dims[i + 1] + dims[i + 1] for i in range(len(dims) - 1))


def numeric_gradients(model, x, target, h=1e-5, masks=None):
    """Central finite differences of (BCE + L2) through the forward pass only."""

    def objective():
        result = forward(model, x, training=masks is not None, masks=masks)
        return bce_loss(result.output, target) + l2_penalty(model)

    grads = []
    for layer in model.layers:
        dw = np.zeros_like(layer.weights)
        for idx in np.ndindex(layer.weights.shape):
            orig = layer.weights[idx]
            layer.weights[idx] = orig + h
            hi = objective()
            layer.weights[idx] = orig - h
            lo = objective()
            layer.weights[idx] = orig
            dw[idx] = (hi - lo) / (2 * h)
        db = np.zeros_like(layer.biases)
        for idx in np.ndindex(layer.biases.shape):
            orig = layer.biases[idx]
            layer.biases[idx] = orig + h
            hi = objective()
            layer.biases[idx] = orig - h
            lo = objective()
            layer.biases[idx] = orig
            db[idx] = (hi - lo) / (2 * h)
        grads.append((dw, db))
    return grads


def assert_gradients_close(analytic, numeric, rel=1e-4, floor=1e-6):
    for (adw, adb), (ndw, ndb) in zip(analytic, numeric):
        for a, n in ((adw, ndw), (adb, ndb)):
            tol = floor + rel * np.maximum(np.abs(a), np.abs(n))
            assert (np.abs(a - n) <= tol).all()


def zeroed(model):
    model = copy.deepcopy(model)
    for layer in model.layers:
        layer.weights[:] = 0.0
        layer.biases[:] = 0.0
    return model


def randomize_biases(model, rng):
    # Fresh models have zero biases, which parks pre-activations exactly
    # on the ReLU kink whenever the latent dies; finite differences are
    # not a valid oracle on the kink, so nudge the biases off it.
    for layer in model.layers:
        layer.biases[:] = rng.normal(0.0, 0.1, layer.biases.shape)
    return model


class TestInit:
    def test_prototype_parameter_count(self):
        model = init_model("prototype", seed=42)
        assert parameter_count(model) == 1154
        assert closed_form_params(model.dims) == 1154

    @pytest.mark.parametrize("arch, expected", [
        ("model1", 1722),
        ("model2", 1722),
        ("model3", 1904),
    ])
    def test_other_parameter_counts(self, arch, expected):
        model = init_model(arch, seed=0)
        assert parameter_count(model) == expected
        assert closed_form_params(model.dims) == expected

    def test_deterministic_per_seed(self):
        a = init_model("model1", seed=7)
        b = init_model("model1", seed=7)
        for la, lb in zip(a.layers, b.layers):
            assert np.array_equal(la.weights, lb.weights)
            assert np.array_equal(la.biases, lb.biases)

    def test_glorot_bounds_and_zero_biases(self):
        model = init_model("prototype", seed=1)
        for layer in model.layers:
            n_out, n_in = layer.weights.shape
            bound = math.sqrt(6.0 / (n_in + n_out))
            assert np.abs(layer.weights).max() <= bound
            assert not layer.biases.any()

    def test_structure(self):
        for arch, (dims, l2, rate) in ARCHITECTURES.items():
            model = init_model(arch, seed=0)
            assert model.dims == dims
            assert model.dims == model.dims[::-1]
            assert model.dims[0] == model.dims[-1] == 32
            assert model.latent_dim == 2
            assert model.l2_lambda == l2
            assert model.dropout_rate == rate
            assert [l.activation for l in model.layers[:-1]] == ["relu"] * (len(model.layers) - 1)
            assert model.layers[-1].activation == "sigmoid"

    def test_unknown_architecture(self):
        with pytest.raises(InputError):
            init_model("model9", seed=0)


class TestForward:
    def test_zero_model_analytic(self):
        model = zeroed(init_model("prototype", seed=0))
        result = forward(model, np.ones(32))
        assert np.array_equal(result.latent, [0.0, 0.0])
        assert np.allclose(result.output, 0.5)

    def test_eval_deterministic(self):
        model = init_model("model2", seed=3)
        x = np.random.default_rng(0).integers(0, 2, 32)
        a = forward(model, x).output
        b = forward(model, x).output
        assert np.array_equal(a, b)

    def test_hand_computed_toy(self):
        # 2 inputs -> relu(2) -> sigmoid(2), all values chosen by hand.
        net = Network([
            DenseLayer(weights=np.array([[1.0, -2.0], [0.5, 1.0]]),
                       biases=np.array([0.1, -0.1]), activation="relu"),
            DenseLayer(weights=np.array([[1.0, 1.0], [2.0, -1.0]]),
                       biases=np.array([0.0, 0.5]), activation="sigmoid"),
        ])
        out = net.forward([1.0, 1.0])
        # z1 = [-0.9, 1.4]; a1 = [0, 1.4]; z2 = [1.4, -0.9]
        expected = [1 / (1 + math.exp(-1.4)), 1 / (1 + math.exp(0.9))]
        assert np.allclose(out, expected, atol=1e-12)

    def test_dimension_mismatch(self):
        model = init_model("prototype", seed=0)
        with pytest.raises(InputError):
            forward(model, np.zeros(16))

    def test_output_in_open_interval(self):
        model = init_model("model3", seed=5)
        out = forward(model, np.ones(32)).output
        assert (out > 0).all() and (out < 1).all()

    def test_dropout_requires_rng(self):
        model = init_model("model2", seed=0)
        with pytest.raises(InputError):
            forward(model, np.zeros(32), training=True)

    def test_eval_ignores_dropout(self):
        model = init_model("model2", seed=0)
        x = np.ones(32)
        assert np.array_equal(forward(model, x).output,
                              forward(model, x, training=False).output)


class TestBceLoss:
    def test_uninformative_output(self):
        assert bce_loss(np.full(32, 0.5), np.zeros(32)) == pytest.approx(math.log(2), abs=1e-12)

    def test_perfect_output_near_zero(self):
        target = np.random.default_rng(1).integers(0, 2, 32).astype(float)
        assert bce_loss(target, target) < 2e-7

    def test_single_value(self):
        assert bce_loss(np.full(32, 0.9), np.ones(32)) == pytest.approx(-math.log(0.9), rel=1e-12)


class TestBackward:
    def test_zero_model_output_bias_gradient(self):
        model = zeroed(init_model("prototype", seed=0))
        target = np.random.default_rng(2).integers(0, 2, 32).astype(float)
        grads = backward(model, np.zeros(32), target)
        _, db = grads[-1]
        assert np.allclose(db, (0.5 - target) / 32, atol=1e-15)

    @pytest.mark.parametrize("arch", ["prototype", "model2"])
    def test_matches_finite_differences(self, arch):
        rng = np.random.default_rng(4)
        model = randomize_biases(init_model(arch, seed=9), rng)
        for _ in range(2):
            x = rng.integers(0, 2, 32).astype(float)
            target = rng.integers(0, 2, 32).astype(float)
            analytic = backward(model, x, target)
            numeric = numeric_gradients(model, x, target)
            assert_gradients_close(analytic, numeric)

    def test_dropout_path_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        model = randomize_biases(init_model("model2", seed=11), rng)
        x = rng.integers(0, 2, 32).astype(float)
        target = rng.integers(0, 2, 32).astype(float)
        keep = 1.0 - model.dropout_rate
        masks = [rng.random((1, l.weights.shape[0])) < keep for l in model.layers[:-1]]
        masks.append(None)
        result = forward(model, x[None, :], training=True, masks=masks)
        analytic = backward(model, x[None, :], target[None, :], result)
        numeric = numeric_gradients(model, x[None, :], target[None, :], masks=masks)
        assert_gradients_close(analytic, numeric)

    def test_l2_adds_exactly_2_lambda_w(self):
        model = init_model("model1", seed=13)
        x = np.ones(32)
        target = np.zeros(32)
        plain = backward(model, x, target)
        reg = copy.deepcopy(model)
        reg.l2_lambda = 0.01
        regularized = backward(reg, x, target)
        for layer, (dw0, db0), (dw1, db1) in zip(model.layers, plain, regularized):
            assert np.allclose(dw1 - dw0, 0.02 * layer.weights, atol=1e-15)
            assert np.array_equal(db0, db1)


class TestTrain:
    def test_memorizes_single_pattern(self):
        pattern = np.zeros((1, 32))
        pattern[0, [0, 4, 8, 12, 20, 26]] = 1.0
        model = init_model("prototype", seed=42)
        trained, history = train(model, pattern, epochs=500, batch_size=16, seed=42)
        assert history.final_bce() < 0.05
        assert len(history.epochs) == 500

    @pytest.mark.parametrize("arch", sorted(ARCHITECTURES))
    def test_loss_stays_finite(self, arch):
        rng = np.random.default_rng(6)
        data = rng.integers(0, 2, size=(24, 32)).astype(float)
        model = init_model(arch, seed=1)
        _, history = train(model, data, epochs=20, batch_size=8, seed=1)
        values = [(e.mean_bce, e.total_objective) for e in history.epochs]
        assert np.isfinite(np.asarray(values)).all()

    def test_bit_identical_given_seed(self):
        rng = np.random.default_rng(8)
        data = rng.integers(0, 2, size=(10, 32)).astype(float)
        model = init_model("model2", seed=2)
        a, _ = train(model, data, epochs=15, batch_size=4, seed=3)
        b, _ = train(model, data, epochs=15, batch_size=4, seed=3)
        for la, lb in zip(a.layers, b.layers):
            assert np.array_equal(la.weights, lb.weights)
            assert np.array_equal(la.biases, lb.biases)

    def test_input_model_untouched(self):
        data = np.zeros((4, 32))
        model = init_model("prototype", seed=0)
        before = [l.weights.copy() for l in model.layers]
        train(model, data, epochs=2, batch_size=2, seed=0)
        for w0, layer in zip(before, model.layers):
            assert np.array_equal(w0, layer.weights)

    def test_training_meta_recorded(self):
        data = np.zeros((4, 32))
        trained, _ = train(init_model("prototype", seed=0), data,
                           epochs=3, batch_size=2, lr=1e-3, seed=5)
        meta = trained.training_meta
        assert meta["epochs"] == 3
        assert meta["batch_size"] == 2
        assert meta["train_seed"] == 5
        assert "dataset_fingerprint" in meta
        assert math.isfinite(meta["final_loss"])

    def test_empty_dataset_rejected(self):
        with pytest.raises(CorpusError):
            train(init_model("prototype", seed=0), np.zeros((0, 32)))

    def test_weak_monotonicity_even_when_regularized(self):
        # model2's L2 penalty caps how far the loss can fall, but the
        # final epoch must still land below epoch 1.
        from conftest import rhythm_corpus
        data = rhythm_corpus(64, seed=31)
        _, history = train(init_model("model2", seed=2), data, epochs=120, seed=2)
        assert history.final_bce() < history.epochs[0].mean_bce


class TestDropoutExpectation:
    def test_eval_equals_mean_training_forward_in_linear_regime(self):
        # Positive weights, biases and inputs keep both ReLU layers in
        # their linear region for every mask, so eval output must equal
        # the expectation of training-mode outputs.
        rng = np.random.default_rng(9)
        model = AutoencoderModel(
            architecture_id="toy", dims=[3, 4, 3],
            layers=[
                DenseLayer(weights=rng.uniform(0.1, 1.0, (4, 3)),
                           biases=rng.uniform(0.5, 1.0, 4), activation="relu"),
                DenseLayer(weights=rng.uniform(0.1, 1.0, (3, 4)),
                           biases=rng.uniform(5.0, 6.0, 3), activation="relu"),
            ],
            latent_index=0, dropout_rate=0.2,
        )
        x = np.array([1.0, 0.5, 2.0])
        eval_out = forward(model, x).output
        draws = np.stack([
            forward(model, x, training=True, rng=rng).output
            for _ in range(10_000)
        ])
        assert np.abs(draws.mean(axis=0) / eval_out - 1.0).max() < 0.02


class TestSplit:
    def test_composition_identity(self):
        model = init_model("model3", seed=21)
        encoder, decoder = split(model)
        assert encoder.in_dim == 32 and encoder.out_dim == 2
        assert decoder.in_dim == 2 and decoder.out_dim == 32
        rng = np.random.default_rng(10)
        for _ in range(100):
            x = rng.integers(0, 2, 32).astype(float)
            direct = forward(model, x).output
            composed = decoder.forward(encoder.forward(x))
            assert np.abs(direct - composed).max() <= 1e-12

    def test_trained_single_pattern_round_trips(self):
        pattern = np.zeros((1, 32))
        pattern[0, [3, 7, 11, 19, 30]] = 1.0
        trained, _ = train(init_model("prototype", seed=42), pattern,
                           epochs=500, batch_size=16, seed=42)
        encoder, decoder = split(trained)
        raw = decoder.forward(encoder.forward(pattern[0]))
        assert np.array_equal((raw >= 0.5).astype(float), pattern[0])

    def test_latent_nonnegative(self):
        model = init_model("model1", seed=30)
        encoder, _ = split(model)
        rng = np.random.default_rng(12)
        for _ in range(50):
            latent = encoder.forward(rng.integers(0, 2, 32).astype(float))
            assert (latent >= 0).all()


class TestSerialization:
    def test_round_trip_bit_exact(self, tmp_path):
        data = np.random.default_rng(13).integers(0, 2, (6, 32)).astype(float)
        trained, _ = train(init_model("model2", seed=17), data, epochs=5,
                           batch_size=3, seed=17)
        path = tmp_path / "model.json"
        save_model(trained, path)
        loaded = load_model(path)
        assert loaded.architecture_id == trained.architecture_id
        assert loaded.dims == trained.dims
        assert loaded.l2_lambda == trained.l2_lambda
        assert loaded.dropout_rate == trained.dropout_rate
        assert loaded.training_meta == trained.training_meta
        for la, lb in zip(trained.layers, loaded.layers):
            assert np.array_equal(la.weights, lb.weights)
            assert np.array_equal(la.biases, lb.biases)

    def test_save_load_save_byte_identical(self, tmp_path):
        model = init_model("prototype", seed=23)
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        save_model(model, first)
        save_model(load_model(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_loaded_forward_identical(self, tmp_path):
        model = init_model("model3", seed=29)
        path = tmp_path / "m.json"
        save_model(model, path)
        loaded = load_model(path)
        x = np.random.default_rng(14).integers(0, 2, 32).astype(float)
        assert np.array_equal(forward(model, x).output, forward(loaded, x).output)

    def test_truncated_file_is_format_error(self, tmp_path):
        path = tmp_path / "m.json"
        save_model(init_model("prototype", seed=0), path)
        path.write_bytes(path.read_bytes()[:200])
        with pytest.raises(FormatError):
            load_model(path)

    def test_wrong_version_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        save_model(init_model("prototype", seed=0), path)
        import json
        payload = json.loads(path.read_text())
        payload["format_version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(FormatError):
            load_model(path)
