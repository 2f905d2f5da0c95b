"""Finite-difference oracles shared by the gradient tests."""

import numpy as np


def central_difference(f, x, h=1e-5):
    """Central finite-difference gradient of scalar f at matrix/vector x."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        plus = x.copy()
        plus[idx] += h
        minus = x.copy()
        minus[idx] -= h
        grad[idx] = (f(plus) - f(minus)) / (2.0 * h)
    return grad


def max_relative_error(analytic, numeric, floor=1e-8):
    """Max elementwise relative error; differences at or below the absolute
    floor count as zero (the relative measure is meaningless there)."""
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    diff = np.abs(analytic - numeric)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-300)
    rel = diff / denom
    rel[diff <= floor] = 0.0
    return float(np.max(rel))
