"""Fully convolutional time-series classifier with hand-written forward and
reverse passes.

Architecture: a stack of 1-D convolutions over time (same-padding, so the
output length always equals the input length) each followed by ReLU, then
global average pooling over time, a dense layer and a softmax. Gradients of a
class probability with respect to the input are computed analytically by
reverse-mode differentiation through every layer; no autodiff framework is
involved.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import CheckpointError, DataError
from .optim import Adam
from .validation import check_labels, check_panel, check_series

CHECKPOINT_MAGIC = "#MCELS-CLF v1"
_LOG_FLOOR = 1e-12


def _pad_same(x, kernel_size):
    # zero-pad both ends so the conv output keeps length T
    pad_left = (kernel_size - 1) // 2
    pad_right = kernel_size - 1 - pad_left
    return np.pad(x, ((0, 0), (pad_left, pad_right), (0, 0))), pad_left


def _conv1d(x_padded, weight, length):
    """x_padded (B, T+K-1, Cin), weight (Cout, Cin, K) -> (B, T, Cout)."""
    kernel_size = weight.shape[2]
    out = np.zeros((x_padded.shape[0], length, weight.shape[0]))
    for k in range(kernel_size):
        out += x_padded[:, k:k + length, :] @ weight[:, :, k].T
    return out


def _conv1d_input_grad(dout, weight, length, pad_left):
    """Gradient of the conv output w.r.t. its (unpadded) input."""
    kernel_size = weight.shape[2]
    dx_padded = np.zeros((dout.shape[0], length + kernel_size - 1, weight.shape[1]))
    for k in range(kernel_size):
        dx_padded[:, k:k + length, :] += dout @ weight[:, :, k]
    return dx_padded[:, pad_left:pad_left + length, :]


def _conv1d_param_grads(dout, x_padded, kernel_size):
    length = dout.shape[1]
    n_out, n_in = dout.shape[2], x_padded.shape[2]
    dweight = np.zeros((n_out, n_in, kernel_size))
    for k in range(kernel_size):
        dweight[:, :, k] = np.einsum("bto,bti->oi", dout, x_padded[:, k:k + length, :])
    dbias = dout.sum(axis=(0, 1))
    return dweight, dbias


def _softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


class FcnClassifier(BaseEstimator, ClassifierMixin):
    """Small FCN over (n, T, D) panels, trained with ADAM on cross-entropy.

    All randomness (parameter init, batch shuffling) flows from `seed`, so
    identical (config, data, seed) give bit-identical parameters.
    """

    def __init__(self, channels=(32, 64, 32), kernel_sizes=(8, 5, 3),
                 lr=1e-3, epochs=200, batch_size=16, seed=0):
        self.channels = channels
        self.kernel_sizes = kernel_sizes
        self.lr = lr
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed

    # ------------------------------------------------------------------
    # parameters
    # ------------------------------------------------------------------

    def initialize(self, input_dim, n_classes):
        """Seeded He-style uniform fan-in initialization; biases start at zero."""
        if len(self.channels) != len(self.kernel_sizes) or not self.channels:
            raise ValueError("channels and kernel_sizes must have equal length >= 1")
        rng = np.random.default_rng(self.seed)
        self.input_dim_ = int(input_dim)
        self.n_classes_ = int(n_classes)
        self.conv_weights_ = []
        self.conv_biases_ = []
        fan_in_channels = self.input_dim_
        for n_out, kernel_size in zip(self.channels, self.kernel_sizes):
            fan_in = fan_in_channels * kernel_size
            limit = np.sqrt(6.0 / fan_in)
            self.conv_weights_.append(
                rng.uniform(-limit, limit, size=(n_out, fan_in_channels, kernel_size))
            )
            self.conv_biases_.append(np.zeros(n_out))
            fan_in_channels = n_out
        limit = np.sqrt(6.0 / fan_in_channels)
        self.dense_weight_ = rng.uniform(-limit, limit, size=(self.n_classes_, fan_in_channels))
        self.dense_bias_ = np.zeros(self.n_classes_)
        self.norm_mean_ = None
        self.norm_std_ = None
        self.loss_trace_ = []
        return self

    def _params(self):
        params = []
        for w, b in zip(self.conv_weights_, self.conv_biases_):
            params += [w, b]
        params += [self.dense_weight_, self.dense_bias_]
        return params

    def _set_params_list(self, params):
        n_blocks = len(self.conv_weights_)
        for i in range(n_blocks):
            self.conv_weights_[i] = params[2 * i]
            self.conv_biases_[i] = params[2 * i + 1]
        self.dense_weight_ = params[2 * n_blocks]
        self.dense_bias_ = params[2 * n_blocks + 1]

    # ------------------------------------------------------------------
    # forward / backward
    # ------------------------------------------------------------------

    def _forward(self, X, keep_cache=False):
        length = X.shape[1]
        activation = X
        cache = []
        for weight, bias in zip(self.conv_weights_, self.conv_biases_):
            padded, _ = _pad_same(activation, weight.shape[2])
            pre = _conv1d(padded, weight, length) + bias
            activation = np.maximum(pre, 0.0)
            if keep_cache:
                cache.append((padded, pre))
        pooled = activation.mean(axis=1)
        logits = pooled @ self.dense_weight_.T + self.dense_bias_
        probs = _softmax(logits)
        if keep_cache:
            return probs, pooled, cache
        return probs

    def forward(self, x):
        """Class probabilities for a single (T, D) series."""
        x = check_series(x)
        self._check_input_dim(x)
        return self._forward(x[np.newaxis])[0]

    def predict_proba(self, X):
        X = check_panel(X)
        self._check_input_dim(X)
        return self._forward(X)

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def _check_input_dim(self, x):
        if x.shape[-1] != self.input_dim_:
            raise DataError(
                f"input has D={x.shape[-1]}, classifier expects D={self.input_dim_}"
            )

    def _backprop_to_input(self, dactivation, cache, length):
        for (_, pre), weight in zip(reversed(cache), reversed(self.conv_weights_)):
            dpre = dactivation * (pre > 0.0)
            pad_left = (weight.shape[2] - 1) // 2
            dactivation = _conv1d_input_grad(dpre, weight, length, pad_left)
        return dactivation

    def input_gradient(self, x, class_index):
        """d probs[class_index] / d x[t, d], a (T, D) matrix."""
        probs, grad = self.prob_and_input_gradient(x, class_index)
        return grad

    def prob_and_input_gradient(self, x, class_index):
        """Forward probabilities plus the input gradient of one class probability."""
        x = check_series(x)
        self._check_input_dim(x)
        if not 0 <= class_index < self.n_classes_:
            raise ValueError(f"class index {class_index} outside 0..{self.n_classes_ - 1}")
        length = x.shape[0]
        probs, _, cache = self._forward(x[np.newaxis], keep_cache=True)
        p = probs[0]
        # softmax jacobian row for the requested class
        dlogits = -p[class_index] * p
        dlogits[class_index] += p[class_index]
        dpooled = dlogits[np.newaxis] @ self.dense_weight_
        dactivation = np.repeat(dpooled[:, np.newaxis, :], length, axis=1) / length
        dx = self._backprop_to_input(dactivation, cache, length)
        return p, dx[0]

    # ------------------------------------------------------------------
    # training
    # ------------------------------------------------------------------

    def fit(self, X, y, n_classes=None):
        X = check_panel(X)
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if n_classes is None:
            n_classes = int(np.max(y)) + 1 if len(np.asarray(y)) else 0
            n_classes = max(n_classes, 2)
        y = check_labels(y, len(X), n_classes)
        if not hasattr(self, "conv_weights_"):
            self.initialize(X.shape[2], n_classes)
        self._check_input_dim(X)
        rng = np.random.default_rng(self.seed + 1)  # decouple shuffling from init
        optimizer = Adam(lr=self.lr)
        n = len(X)
        self.loss_trace_ = []
        for _ in range(self.epochs):
            order = rng.permutation(n)
            epoch_loss = 0.0
            for start in range(0, n, self.batch_size):
                idx = order[start:start + self.batch_size]
                loss = self._train_batch(X[idx], y[idx], optimizer)
                epoch_loss += loss * len(idx)
            self.loss_trace_.append(epoch_loss / n)
        return self

    def _train_batch(self, X, y, optimizer):
        batch = len(X)
        length = X.shape[1]
        probs, pooled, cache = self._forward(X, keep_cache=True)
        loss = -np.mean(np.log(np.maximum(probs[np.arange(batch), y], _LOG_FLOOR)))

        dlogits = probs.copy()
        dlogits[np.arange(batch), y] -= 1.0
        dlogits /= batch
        ddense_w = dlogits.T @ pooled
        ddense_b = dlogits.sum(axis=0)
        dactivation = np.repeat((dlogits @ self.dense_weight_)[:, np.newaxis, :],
                                length, axis=1) / length
        grads = []
        for (padded, pre), weight in zip(reversed(cache), reversed(self.conv_weights_)):
            dpre = dactivation * (pre > 0.0)
            dweight, dbias = _conv1d_param_grads(dpre, padded, weight.shape[2])
            grads = [dweight, dbias] + grads
            pad_left = (weight.shape[2] - 1) // 2
            dactivation = _conv1d_input_grad(dpre, weight, length, pad_left)
        grads += [ddense_w, ddense_b]
        self._set_params_list(optimizer.step(self._params(), grads))
        return loss

    # ------------------------------------------------------------------
    # checkpoint I/O
    # ------------------------------------------------------------------

    def to_text(self):
        """Versioned text checkpoint; round-trips all parameters bit-exactly."""
        config = (
            f"channels={','.join(str(c) for c in self.channels)} "
            f"kernel_sizes={','.join(str(k) for k in self.kernel_sizes)} "
            f"input_dim={self.input_dim_} n_classes={self.n_classes_} seed={self.seed}"
        )
        lines = [CHECKPOINT_MAGIC, config]

        def emit(name, array):
            shape = ",".join(str(s) for s in array.shape)
            values = " ".join(format(v, ".16e") for v in np.ravel(array))
            lines.append(f"{name} {shape} {values}")

        if self.norm_mean_ is not None:
            emit("norm.mean", self.norm_mean_)
            emit("norm.std", self.norm_std_)
        for i, (w, b) in enumerate(zip(self.conv_weights_, self.conv_biases_)):
            emit(f"conv{i}.weight", w)
            emit(f"conv{i}.bias", b)
        emit("dense.weight", self.dense_weight_)
        emit("dense.bias", self.dense_bias_)
        return "\n".join(lines) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text):
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].strip() != CHECKPOINT_MAGIC:
            raise CheckpointError(
                f"bad checkpoint header, expected {CHECKPOINT_MAGIC!r}"
            )
        if len(lines) < 2:
            raise CheckpointError("truncated checkpoint: missing config line")
        config = {}
        for token in lines[1].split():
            key, sep, value = token.partition("=")
            if not sep:
                raise CheckpointError(f"bad config token {token!r}")
            config[key] = value
        try:
            channels = tuple(int(c) for c in config["channels"].split(","))
            kernel_sizes = tuple(int(k) for k in config["kernel_sizes"].split(","))
            input_dim = int(config["input_dim"])
            n_classes = int(config["n_classes"])
            seed = int(config["seed"])
        except (KeyError, ValueError) as exc:
            raise CheckpointError(f"bad checkpoint config: {exc}") from None

        tensors = {}
        for line in lines[2:]:
            fields = line.split()
            if len(fields) < 3:
                raise CheckpointError(f"bad tensor line {fields[:1]}")
            name, shape_token = fields[0], fields[1]
            try:
                shape = tuple(int(s) for s in shape_token.split(","))
                values = np.asarray([float(v) for v in fields[2:]])
            except ValueError:
                raise CheckpointError(f"bad tensor payload for {name!r}") from None
            if values.size != int(np.prod(shape)):
                raise CheckpointError(
                    f"tensor {name!r}: {values.size} values for shape {shape}"
                )
            tensors[name] = values.reshape(shape)

        clf = cls(channels=channels, kernel_sizes=kernel_sizes, seed=seed)
        clf.initialize(input_dim, n_classes)
        try:
            for i in range(len(channels)):
                clf.conv_weights_[i] = _take(tensors, f"conv{i}.weight",
                                             clf.conv_weights_[i].shape)
                clf.conv_biases_[i] = _take(tensors, f"conv{i}.bias",
                                            clf.conv_biases_[i].shape)
            clf.dense_weight_ = _take(tensors, "dense.weight", clf.dense_weight_.shape)
            clf.dense_bias_ = _take(tensors, "dense.bias", clf.dense_bias_.shape)
        except KeyError as exc:
            raise CheckpointError(f"missing tensor {exc.args[0]!r}") from None
        if "norm.mean" in tensors:
            clf.norm_mean_ = _take(tensors, "norm.mean", (input_dim,))
            clf.norm_std_ = _take(tensors, "norm.std", (input_dim,))
        if tensors:
            raise CheckpointError(f"unexpected tensors in checkpoint: {sorted(tensors)}")
        return clf

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise CheckpointError(f"cannot read {path}: {exc}") from None
        return cls.from_text(text)


def _take(tensors, name, expected_shape):
    array = tensors.pop(name)
    if array.shape != expected_shape:
        raise CheckpointError(
            f"tensor {name!r}: shape {array.shape}, expected {expected_shape}"
        )
    return array
