"""Target-class selection and nearest-unlike-neighbor search."""

from dataclasses import dataclass

import numpy as np

from .errors import NoNeighborError
from .validation import check_series

@dataclass
class NunResult:
    neighbor: np.ndarray      # (T, D), a copy of the chosen background instance
    target_class: int
    distance: float
    neighbor_index: int


def target_class(probs):
    """The class with the second-highest probability.

    Ties (both for the top class and for the runner-up) break toward the
    lowest class index.
    """
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 1 or probs.size < 2:
        raise ValueError("need a probability vector with at least 2 classes")
    top = int(np.argmax(probs))
    masked = probs.copy()
    masked[top] = -np.inf
    return int(np.argmax(masked))


def find_nun(x, background_X, background_y, wanted_class):
    """Background instance of `wanted_class` with the smallest Euclidean
    distance to x; ties break toward the lowest dataset index."""
    x = check_series(x)
    background_X = np.asarray(background_X, dtype=np.float64)
    background_y = np.asarray(background_y)
    candidates = np.flatnonzero(background_y == wanted_class)
    if candidates.size == 0:
        raise NoNeighborError(f"no background instance with class {wanted_class}")
    diffs = background_X[candidates] - x
    distances = np.sqrt(np.sum(diffs * diffs, axis=(1, 2)))
    best = int(np.argmin(distances))  # argmin keeps the first (lowest) index on ties
    index = int(candidates[best])
    return NunResult(
        neighbor=background_X[index].copy(),
        target_class=int(wanted_class),
        distance=float(distances[best]),
        neighbor_index=index,
    )
