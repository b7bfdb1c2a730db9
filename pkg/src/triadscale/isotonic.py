"""Weighted pool-adjacent-violators for least-squares monotone fits."""

from __future__ import annotations

import numpy as np

from .model import DataError


def pava(y, weights=None) -> np.ndarray:
    """Least-squares nondecreasing fit to y, optionally weighted.

    Classic pool-adjacent-violators: scan left to right, merging each
    new value into the preceding block while the block means decrease.
    """
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise DataError("isotonic regression needs a nonempty input")
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != y.shape or np.any(w <= 0):
        raise DataError("weights must be positive and match y")

    # block means, weights and lengths, maintained as stacks
    means = []
    wsum = []
    count = []
    for yi, wi in zip(y, w):
        means.append(yi)
        wsum.append(wi)
        count.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            m2, w2, c2 = means.pop(), wsum.pop(), count.pop()
            m1, w1, c1 = means.pop(), wsum.pop(), count.pop()
            wt = w1 + w2
            means.append((m1 * w1 + m2 * w2) / wt)
            wsum.append(wt)
            count.append(c1 + c2)
    out = np.empty_like(y)
    pos = 0
    for m, c in zip(means, count):
        out[pos : pos + c] = m
        pos += c
    return out


def isotonic_fit(order, targets) -> np.ndarray:
    """Monotone (nondecreasing along `order`) least-squares fit of the
    targets.  `order` lists groups of positions; positions within one
    group are tied and receive a common fitted value.

    A flat list of positions means no ties.  Returns fitted values in
    the original target positions.
    """
    targets = np.asarray(targets, dtype=float)
    if targets.size == 0:
        raise DataError("isotonic regression needs a nonempty input")
    groups = [[g] if np.isscalar(g) or isinstance(g, (int, np.integer)) else list(g) for g in order]
    flat = [p for g in groups for p in g]
    if sorted(flat) != list(range(targets.size)):
        raise DataError("order must be a total order over all target positions")
    group_means = np.array([targets[g].mean() for g in groups])
    group_w = np.array([float(len(g)) for g in groups])
    fitted_means = pava(group_means, group_w)
    out = np.empty_like(targets)
    for g, v in zip(groups, fitted_means):
        out[g] = v
    return out
