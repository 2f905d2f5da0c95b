"""Saliency-map learning for counterfactual explanations.

For a query series x, its nearest unlike neighbor and a target class, a
saliency map theta in [0,1]^{T x D} is optimized with ADAM so that the
interpolated series

    x' = x * (1 - theta) + nun * theta

is classified as the target class while theta stays small (budget term) and
temporally smooth (squared-difference regularizer). After optimization,
entries not exceeding a threshold k are zeroed and the counterfactual is
rebuilt from the thresholded map.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .errors import DataError, NumericError
from .nun import find_nun, target_class
from .optim import AdamState, adam_update
from .validation import check_labels, check_panel, check_same_shape, check_series

RESULT_SCHEMA = "mcels-result v1"

TRACE_KEYS = ("total", "l_max", "l_budget", "l_treg", "p_target")


# ---------------------------------------------------------------------------
# loss pieces
# ---------------------------------------------------------------------------

def perturb(x, nun, theta):
    """Elementwise interpolation between the query and its neighbor."""
    check_same_shape(x, nun, "x", "nun")
    check_same_shape(x, theta, "x", "theta")
    return x * (1.0 - theta) + nun * theta


def loss_max(p_target):
    """Validity term: distance of the target-class probability from 1."""
    return 1.0 - p_target


def loss_budget(theta):
    """Mean saliency over all time steps and dimensions."""
    return float(np.mean(theta))


def loss_treg(theta):
    """Mean squared difference of temporally adjacent saliency values.

    The temporal sum has T-1 terms but is divided by T, matching the
    definition this implements verbatim.
    """
    T, D = theta.shape
    diffs = theta[:-1, :] - theta[1:, :]
    return float(np.sum(diffs * diffs) / (T * D))


def total_loss(p_target, theta, lambda_coef):
    return lambda_coef * loss_max(p_target) + loss_budget(theta) + loss_treg(theta)


def _treg_gradient(theta):
    T, D = theta.shape
    diffs = theta[:-1, :] - theta[1:, :]
    grad = np.zeros_like(theta)
    grad[:-1, :] += 2.0 * diffs
    grad[1:, :] -= 2.0 * diffs
    return grad / (T * D)


def loss_gradient(clf, x, nun, theta, lambda_coef, wanted_class):
    """Analytic gradient of the total loss with respect to theta."""
    check_same_shape(x, theta, "x", "theta")
    x_prime = perturb(x, nun, theta)
    input_grad = clf.input_gradient(x_prime, wanted_class)
    T, D = theta.shape
    grad = lambda_coef * (-input_grad * (nun - x))
    grad += 1.0 / (T * D)
    grad += _treg_gradient(theta)
    return grad


def adam_step(theta, grad, state, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """One ADAM step on theta followed by an elementwise clamp to [0, 1]."""
    updated = adam_update(theta, grad, state, lr, beta1, beta2, eps)
    return np.clip(updated, 0.0, 1.0), state


def threshold_saliency(theta, k):
    """Keep entries strictly greater than k, zero the rest (no binarization)."""
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {k}")
    return np.where(theta > k, theta, 0.0)


# ---------------------------------------------------------------------------
# the optimization loop
# ---------------------------------------------------------------------------

@dataclass
class CounterfactualResult:
    query: np.ndarray
    nun: np.ndarray
    nun_index: int
    predicted_class: int
    target_class: int
    theta: np.ndarray            # post-threshold saliency map
    theta_raw: np.ndarray        # pre-threshold saliency map
    counterfactual: np.ndarray   # perturb(query, nun, theta), by construction
    trace: dict                  # per-epoch arrays, keys TRACE_KEYS
    epochs_run: int
    metrics: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "schema": RESULT_SCHEMA,
            "nun_index": self.nun_index,
            "predicted_class": self.predicted_class,
            "target_class": self.target_class,
            "epochs_run": self.epochs_run,
            "query": self.query.tolist(),
            "nun": self.nun.tolist(),
            "theta": self.theta.tolist(),
            "theta_raw": self.theta_raw.tolist(),
            "counterfactual": self.counterfactual.tolist(),
            "trace": {key: np.asarray(val).tolist() for key, val in self.trace.items()},
            "metrics": self.metrics,
        }
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, payload):
        if payload.get("schema") != RESULT_SCHEMA:
            raise DataError(f"unsupported result schema {payload.get('schema')!r}")
        return cls(
            query=np.asarray(payload["query"], dtype=np.float64),
            nun=np.asarray(payload["nun"], dtype=np.float64),
            nun_index=int(payload["nun_index"]),
            predicted_class=int(payload["predicted_class"]),
            target_class=int(payload["target_class"]),
            theta=np.asarray(payload["theta"], dtype=np.float64),
            theta_raw=np.asarray(payload["theta_raw"], dtype=np.float64),
            counterfactual=np.asarray(payload["counterfactual"], dtype=np.float64),
            trace={key: np.asarray(val, dtype=np.float64)
                   for key, val in payload["trace"].items()},
            epochs_run=int(payload["epochs_run"]),
            metrics=dict(payload.get("metrics", {})),
        )


def explain_instance(clf, x, background_X, background_y, *, lambda_coef=1.0,
                     lr=0.1, epochs=1000, threshold=0.5, patience=100,
                     min_delta=1e-6, valid_early_stop=True, seed=0):
    """Run the full saliency-map optimization for one query instance."""
    x = check_series(x)
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if lr <= 0:
        raise ValueError("lr must be positive")

    probs = clf.forward(x)
    predicted = int(np.argmax(probs))
    wanted = target_class(probs)
    nun_result = find_nun(x, background_X, background_y, wanted)
    nun = nun_result.neighbor

    rng = np.random.default_rng(seed)
    theta = rng.random(x.shape)
    state = AdamState.zeros_like(theta)
    trace = {key: [] for key in TRACE_KEYS}
    best = np.inf
    stale = 0
    epochs_run = 0

    for _ in range(epochs):
        x_prime = perturb(x, nun, theta)
        probs_prime = clf.forward(x_prime)
        p_target = float(probs_prime[wanted])
        l_max = loss_max(p_target)
        l_budget = loss_budget(theta)
        l_treg = loss_treg(theta)
        total = lambda_coef * l_max + l_budget + l_treg
        if not np.isfinite(total):
            raise NumericError("non-finite loss during saliency optimization",
                               trace=trace)
        for key, value in zip(TRACE_KEYS, (total, l_max, l_budget, l_treg, p_target)):
            trace[key].append(value)
        epochs_run += 1

        if total < best - min_delta:
            best = total
            stale = 0
        else:
            stale += 1
        if stale >= patience:
            currently_valid = int(np.argmax(probs_prime)) == wanted
            if currently_valid or not valid_early_stop:
                break

        grad = loss_gradient(clf, x, nun, theta, lambda_coef, wanted)
        theta, state = adam_step(theta, grad, state, lr)

    theta_raw = theta
    theta_final = threshold_saliency(theta_raw, threshold)
    counterfactual = perturb(x, nun, theta_final)
    return CounterfactualResult(
        query=x,
        nun=nun,
        nun_index=nun_result.neighbor_index,
        predicted_class=predicted,
        target_class=wanted,
        theta=theta_final,
        theta_raw=theta_raw,
        counterfactual=counterfactual,
        trace={key: np.asarray(val) for key, val in trace.items()},
        epochs_run=epochs_run,
    )


class MCelsExplainer(BaseEstimator):
    """Estimator-style wrapper: fit on the background set, then explain queries.

    Per-instance runs are seeded with ``seed ^ instance_index`` so batch
    results are reproducible and independent of processing order.
    """

    def __init__(self, classifier=None, lambda_coef=1.0, lr=0.1, epochs=1000,
                 threshold=0.5, patience=100, min_delta=1e-6,
                 valid_early_stop=True, seed=0):
        self.classifier = classifier
        self.lambda_coef = lambda_coef
        self.lr = lr
        self.epochs = epochs
        self.threshold = threshold
        self.patience = patience
        self.min_delta = min_delta
        self.valid_early_stop = valid_early_stop
        self.seed = seed

    def fit(self, X, y):
        """Store the background set searched for nearest unlike neighbors."""
        if self.classifier is None:
            raise ValueError("a fitted classifier is required")
        self.background_X_ = check_panel(X)
        n_classes = self.classifier.n_classes_
        self.background_y_ = check_labels(y, len(self.background_X_), n_classes)
        return self

    def explain(self, x, instance_index=0):
        return explain_instance(
            self.classifier, x, self.background_X_, self.background_y_,
            lambda_coef=self.lambda_coef, lr=self.lr, epochs=self.epochs,
            threshold=self.threshold, patience=self.patience,
            min_delta=self.min_delta, valid_early_stop=self.valid_early_stop,
            seed=self.seed ^ instance_index,
        )

    def transform(self, X):
        X = check_panel(X)
        return [self.explain(x, i) for i, x in enumerate(X)]
