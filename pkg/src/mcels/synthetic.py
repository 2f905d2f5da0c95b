"""Two-class synthetic dataset with a planted discriminative region.

Class 0 is iid gaussian noise in every dimension; class 1 adds a half-sine
bump of amplitude 2.0 to dimension 0 inside the time window [T/4, T/2). A
correct saliency map for a class-1 query should therefore concentrate in
that window of dimension 0.
"""

import numpy as np

from .data import Dataset

NOISE_STD = 0.3
BUMP_AMPLITUDE = 2.0


def signal_window(T):
    """The [T/4, T/2) window holding the class-1 bump."""
    return T // 4, T // 2


def make_two_class(T, D, n, seed):
    """Generate balanced train/test Datasets (70/30 split per class)."""
    if T < 8:
        raise ValueError("T must be >= 8")
    if D < 1:
        raise ValueError("D must be >= 1")
    if n < 20:
        raise ValueError("n must be >= 20")
    rng = np.random.default_rng(seed)
    n_class1 = n // 2
    n_class0 = n - n_class1

    X = rng.normal(0.0, NOISE_STD, size=(n, T, D))
    y = np.concatenate([np.zeros(n_class0, dtype=int), np.ones(n_class1, dtype=int)])

    lo, hi = signal_window(T)
    t = np.arange(lo, hi)
    bump = BUMP_AMPLITUDE * np.sin(np.pi * (t - lo) / (hi - lo))
    X[n_class0:, lo:hi, 0] += bump

    # per-class 70/30 split keeps both splits balanced
    train_parts, test_parts = [], []
    for start, count in ((0, n_class0), (n_class0, n_class1)):
        cut = start + int(round(count * 0.7))
        train_parts.append((X[start:cut], y[start:cut]))
        test_parts.append((X[cut:start + count], y[cut:start + count]))
    train = Dataset(
        np.concatenate([p[0] for p in train_parts]),
        np.concatenate([p[1] for p in train_parts]),
        2, name="synthetic",
    )
    test = Dataset(
        np.concatenate([p[0] for p in test_parts]),
        np.concatenate([p[1] for p in test_parts]),
        2, name="synthetic",
    )
    return train, test
