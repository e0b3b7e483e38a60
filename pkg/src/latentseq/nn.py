"""Stacked dense autoencoders, written directly on numpy.

Everything the training loop needs lives here: forward pass, analytic
backpropagation of binary cross-entropy plus an L2 weight penalty,
inverted dropout, the Adam optimizer, encoder/decoder splitting and a
versioned JSON model format.

All four published layer stacks share the same conventions: 32 inputs
and outputs, ReLU on every layer except the sigmoid output, and a
2-unit latent layer at the middle. Training is deliberately
single-threaded and bit-deterministic per seed; at this scale
reproducibility is worth far more than speed.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CorpusError, FormatError, InputError

MODEL_FORMAT_VERSION = 1
BCE_EPS = 1e-7
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

DEFAULT_EPOCHS = 500
DEFAULT_BATCH_SIZE = 16
# Large for Adam, right for these tiny nets: 500 epochs on one pattern
# must land well under 0.05 BCE, which 1e-3 gets nowhere near.
DEFAULT_LEARNING_RATE = 2e-2

# dims, l2_lambda, dropout_rate
ARCHITECTURES: dict[str, tuple[list[int], float, float]] = {
    "prototype": ([32, 16, 2, 16, 32], 0.0, 0.0),
    "model1": ([32, 20, 8, 2, 8, 20, 32], 0.0, 0.0),
    "model2": ([32, 20, 8, 2, 8, 20, 32], 0.01, 0.2),
    "model3": ([32, 20, 10, 5, 2, 5, 10, 20, 32], 0.0, 0.0),
}


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: str


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out_dim, in_dim)
    biases: np.ndarray   # (out_dim,)
    activation: str      # "relu" | "sigmoid"

    @property
    def spec(self) -> LayerSpec:
        return LayerSpec(self.weights.shape[1], self.weights.shape[0], self.activation)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows; latent inputs are unclamped
    # by design, so arbitrarily large pre-activations are legal input
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    exp_z = np.exp(z[~pos])
    out[~pos] = exp_z / (1.0 + exp_z)
    return out


def _activate(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(z, 0.0)
    if activation == "sigmoid":
        return _sigmoid(np.asarray(z, dtype=float))
    raise InputError(f"unknown activation {activation!r}")


@dataclass
class Network:
    """A plain feedforward layer stack, eval-mode only."""

    layers: list[DenseLayer]

    @property
    def in_dim(self) -> int:
        return self.layers[0].weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.layers[-1].weights.shape[0]

    def forward(self, x) -> np.ndarray:
        a = np.asarray(x, dtype=float)
        if a.shape != (self.in_dim,):
            raise InputError(f"expected input of shape ({self.in_dim},), got {a.shape}")
        for layer in self.layers:
            a = _activate(layer.weights @ a + layer.biases, layer.activation)
        return a


@dataclass
class AutoencoderModel:
    architecture_id: str
    dims: list[int]
    layers: list[DenseLayer]
    latent_index: int          # layer whose output is the latent code
    l2_lambda: float = 0.0
    dropout_rate: float = 0.0
    seed: int = 0
    training_meta: dict | None = None

    @property
    def latent_dim(self) -> int:
        return self.layers[self.latent_index].weights.shape[0]


def parameter_count(model_or_dims) -> int:
    """Total weights + biases: sum of in*out + out over consecutive dims."""
    dims = model_or_dims.dims if isinstance(model_or_dims, AutoencoderModel) else model_or_dims
    return sum(i * o + o for i, o in zip(dims[:-1], dims[1:]))


def init_model(architecture: str, seed: int = 0) -> AutoencoderModel:
    """Build an untrained model: Glorot-uniform weights, zero biases."""
    if architecture not in ARCHITECTURES:
        raise InputError(f"unknown architecture {architecture!r}; "
                         f"choose from {sorted(ARCHITECTURES)}")
    dims, l2_lambda, dropout_rate = ARCHITECTURES[architecture]
    if dims != dims[::-1]:
        raise InputError(f"architecture dims must be mirror-symmetric, got {dims}")
    rng = np.random.default_rng(seed)
    layers = []
    for i, (n_in, n_out) in enumerate(zip(dims[:-1], dims[1:])):
        bound = math.sqrt(6.0 / (n_in + n_out))
        layers.append(DenseLayer(
            weights=rng.uniform(-bound, bound, size=(n_out, n_in)),
            biases=np.zeros(n_out),
            activation="sigmoid" if i == len(dims) - 2 else "relu",
        ))
    return AutoencoderModel(
        architecture_id=architecture,
        dims=list(dims),
        layers=layers,
        latent_index=len(layers) // 2 - 1,
        l2_lambda=l2_lambda,
        dropout_rate=dropout_rate,
        seed=seed,
    )


@dataclass
class ForwardResult:
    output: np.ndarray           # (32,) or (B, 32), strictly in (0, 1)
    latent: np.ndarray           # (2,) or (B, 2), before any dropout
    activations: list            # post-activation output of every layer
    layer_inputs: list = field(repr=False, default_factory=list)
    pre_activations: list = field(repr=False, default_factory=list)
    masks: list = field(repr=False, default_factory=list)


def forward(model: AutoencoderModel, x, training: bool = False,
            rng: np.random.Generator | None = None,
            masks: list | None = None) -> ForwardResult:
    """Run the full autoencoder.

    In training mode with a nonzero dropout rate, inverted dropout
    (mask ~ Bernoulli(1 - rate), kept values scaled by 1/(1 - rate)) is
    applied to every hidden activation; the input and the sigmoid
    output are never masked. Eval mode applies no mask and no scaling.
    Passing precomputed masks makes a training-mode pass repeatable.
    """
    a = np.asarray(x, dtype=float)
    single = a.ndim == 1
    if single:
        a = a[None, :]
    if a.shape[1] != model.dims[0]:
        raise InputError(f"expected {model.dims[0]} inputs, got shape {a.shape}")

    use_dropout = training and model.dropout_rate > 0.0
    if use_dropout and rng is None and masks is None:
        raise InputError("training-mode forward with dropout needs an rng or masks")
    keep = 1.0 - model.dropout_rate

    result = ForwardResult(output=None, latent=None, activations=[])
    for i, layer in enumerate(model.layers):
        result.layer_inputs.append(a)
        z = a @ layer.weights.T + layer.biases
        out = _activate(z, layer.activation)
        result.pre_activations.append(z)
        result.activations.append(out)
        if i == model.latent_index:
            result.latent = out[0] if single else out
        hidden = i < len(model.layers) - 1
        if use_dropout and hidden:
            mask = masks[i] if masks is not None else (rng.random(out.shape) < keep)
            a = out * mask / keep
        else:
            mask = None
            a = out
        result.masks.append(mask)

    result.output = a[0] if single else a
    return result


def bce_loss(output, target) -> float:
    """Mean binary cross-entropy over the 32 slots (and over a batch, if any).

    Outputs are clamped to [1e-7, 1 - 1e-7] so exact 0/1 targets never
    produce log(0). The L2 penalty is separate; see total_objective.
    """
    o = np.clip(np.asarray(output, dtype=float), BCE_EPS, 1.0 - BCE_EPS)
    t = np.asarray(target, dtype=float)
    return float(np.mean(-(t * np.log(o) + (1.0 - t) * np.log(1.0 - o))))


def l2_penalty(model: AutoencoderModel) -> float:
    """l2_lambda times the summed squared weights (biases excluded)."""
    if model.l2_lambda == 0.0:
        return 0.0
    return model.l2_lambda * float(sum(np.sum(l.weights ** 2) for l in model.layers))


def total_objective(model: AutoencoderModel, output, target) -> float:
    return bce_loss(output, target) + l2_penalty(model)


def backward(model: AutoencoderModel, x, target,
             result: ForwardResult | None = None) -> list[tuple[np.ndarray, np.ndarray]]:
    """Analytic gradients of (BCE + L2) per layer, as (dW, db) pairs.

    With a sigmoid output feeding BCE, the output-layer delta collapses
    to (output - target) / 32 per slot. Gradients are averaged over the
    batch; the L2 term 2 * lambda * W is added once, unscaled.
    """
    if result is None:
        result = forward(model, x, training=False)
    t = np.asarray(target, dtype=float)
    out = result.activations[-1]
    if t.ndim == 1:
        t = t[None, :]
    batch = out.shape[0]
    n_out = out.shape[1]

    delta = (out - t) / (n_out * batch)  # dL/dz at the sigmoid output
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(model.layers)
    for i in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[i]
        dw = delta.T @ result.layer_inputs[i]
        if model.l2_lambda:
            dw = dw + 2.0 * model.l2_lambda * layer.weights
        db = delta.sum(axis=0)
        grads[i] = (dw, db)
        if i > 0:
            da = delta @ layer.weights
            mask = result.masks[i - 1]
            if mask is not None:
                da = da * mask / (1.0 - model.dropout_rate)
            delta = da * (result.pre_activations[i - 1] > 0)  # hidden layers are ReLU
    return grads


@dataclass
class EpochStats:
    epoch: int
    mean_bce: float
    total_objective: float


@dataclass
class TrainHistory:
    epochs: list[EpochStats] = field(default_factory=list)

    def final_bce(self) -> float:
        return self.epochs[-1].mean_bce

    def save_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("epoch,mean_bce,total_objective\n")
            for e in self.epochs:
                fh.write(f"{e.epoch},{e.mean_bce!r},{e.total_objective!r}\n")


def _pattern_matrix(dataset) -> np.ndarray:
    if hasattr(dataset, "pattern_matrix"):
        return dataset.pattern_matrix()
    x = np.asarray(dataset, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise CorpusError("training data must be a nonempty (N, 32) matrix")
    return x


def _dataset_fingerprint(dataset) -> str:
    if hasattr(dataset, "fingerprint"):
        return dataset.fingerprint()
    import hashlib
    return hashlib.sha256(np.ascontiguousarray(_pattern_matrix(dataset)).tobytes()).hexdigest()


def train(model: AutoencoderModel, dataset,
          epochs: int = DEFAULT_EPOCHS,
          batch_size: int = DEFAULT_BATCH_SIZE,
          lr: float = DEFAULT_LEARNING_RATE,
          seed: int = 0) -> tuple[AutoencoderModel, TrainHistory]:
    """Train a copy of the model as a plain autoencoder (target = input).

    Adam with per-epoch seeded shuffling and mini-batch gradient
    averaging. Identical arguments always produce bit-identical weights.
    Returns the trained model and one (mean BCE, total objective) entry
    per epoch.
    """
    x = _pattern_matrix(dataset)
    if x.shape[1] != model.dims[0]:
        raise InputError(f"dataset patterns have {x.shape[1]} slots, model wants {model.dims[0]}")
    if epochs <= 0 or batch_size <= 0:
        raise InputError("epochs and batch_size must be positive")

    model = copy.deepcopy(model)
    rng = np.random.default_rng(seed)
    n = x.shape[0]

    m_state = [(np.zeros_like(l.weights), np.zeros_like(l.biases)) for l in model.layers]
    v_state = [(np.zeros_like(l.weights), np.zeros_like(l.biases)) for l in model.layers]
    step = 0

    history = TrainHistory()
    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        bce_sum = 0.0
        objective_sum = 0.0
        for start in range(0, n, batch_size):
            batch = x[order[start:start + batch_size]]
            result = forward(model, batch, training=True, rng=rng)
            batch_bce = bce_loss(result.output, batch)
            bce_sum += batch_bce * len(batch)
            objective_sum += (batch_bce + l2_penalty(model)) * len(batch)
            grads = backward(model, batch, batch, result)

            step += 1
            bias_fix1 = 1.0 - ADAM_BETA1 ** step
            bias_fix2 = 1.0 - ADAM_BETA2 ** step
            for layer, (mw, mb), (vw, vb), (dw, db) in zip(model.layers, m_state, v_state, grads):
                mw *= ADAM_BETA1
                mw += (1 - ADAM_BETA1) * dw
                vw *= ADAM_BETA2
                vw += (1 - ADAM_BETA2) * dw ** 2
                layer.weights -= lr * (mw / bias_fix1) / (np.sqrt(vw / bias_fix2) + ADAM_EPS)
                mb *= ADAM_BETA1
                mb += (1 - ADAM_BETA1) * db
                vb *= ADAM_BETA2
                vb += (1 - ADAM_BETA2) * db ** 2
                layer.biases -= lr * (mb / bias_fix1) / (np.sqrt(vb / bias_fix2) + ADAM_EPS)
        history.epochs.append(EpochStats(epoch, bce_sum / n, objective_sum / n))

    model.training_meta = {
        "epochs": epochs,
        "batch_size": batch_size,
        "learning_rate": lr,
        "train_seed": seed,
        "final_loss": history.final_bce(),
        "dataset_fingerprint": _dataset_fingerprint(dataset),
    }
    return model, history


def split(model: AutoencoderModel) -> tuple[Network, Network]:
    """Cut the stack at the latent layer into standalone encoder/decoder nets.

    The decoder applied to the encoder's output reproduces the full
    eval-mode forward pass exactly.
    """
    cut = model.latent_index + 1
    return Network(model.layers[:cut]), Network(model.layers[cut:])


def save_model(model: AutoencoderModel, path) -> None:
    """Write the versioned JSON model file; floats keep full precision."""
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "architecture_id": model.architecture_id,
        "dims": model.dims,
        "latent_index": model.latent_index,
        "l2_lambda": model.l2_lambda,
        "dropout_rate": model.dropout_rate,
        "seed": model.seed,
        "training_meta": model.training_meta,
        "layers": [
            {
                "activation": l.activation,
                "weights": l.weights.tolist(),
                "biases": l.biases.tolist(),
            }
            for l in model.layers
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_model(path) -> AutoencoderModel:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: unreadable model file ({exc})") from exc
    try:
        if payload["format_version"] != MODEL_FORMAT_VERSION:
            raise FormatError(f"{path}: unsupported format_version "
                              f"{payload['format_version']}")
        dims = [int(d) for d in payload["dims"]]
        layers = []
        for i, raw in enumerate(payload["layers"]):
            weights = np.array(raw["weights"], dtype=float)
            biases = np.array(raw["biases"], dtype=float)
            if weights.shape != (dims[i + 1], dims[i]) or biases.shape != (dims[i + 1],):
                raise FormatError(f"{path}: layer {i} shape mismatch")
            if raw["activation"] not in ("relu", "sigmoid"):
                raise FormatError(f"{path}: layer {i} has unknown activation")
            layers.append(DenseLayer(weights=weights, biases=biases,
                                     activation=raw["activation"]))
        if len(layers) != len(dims) - 1:
            raise FormatError(f"{path}: layer count does not match dims")
        return AutoencoderModel(
            architecture_id=str(payload["architecture_id"]),
            dims=dims,
            layers=layers,
            latent_index=int(payload["latent_index"]),
            l2_lambda=float(payload["l2_lambda"]),
            dropout_rate=float(payload["dropout_rate"]),
            seed=int(payload["seed"]),
            training_meta=payload.get("training_meta"),
        )
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise FormatError(f"{path}: malformed model file ({exc})") from exc
