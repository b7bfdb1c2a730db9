"""Batch gradient descent with backtracking (Armijo) line search.

Small, dense problems only; the stopping contract is a relative
objective change below `tolerance` or `max_iters` sweeps.
"""

from __future__ import annotations

import numpy as np

from .model import DataError

ARMIJO_C = 1e-4
MIN_STEP = 1e-14


def minimize(fun_and_grad, x0, max_iters=1000, tolerance=1e-7):
    """Minimize fun(x) from x0.  fun_and_grad(x) -> (value, gradient).

    Returns (x, value, iterations).  The returned value is never worse
    than the initial one.
    """
    x = np.array(x0, dtype=float)
    f, g = fun_and_grad(x)
    if not np.isfinite(f):
        raise DataError("non-finite objective at the initial point")
    step = 1.0
    it = 0
    for it in range(1, max_iters + 1):
        gnorm2 = float(np.sum(g * g))
        if gnorm2 == 0.0:
            break
        # backtracking from a step that is allowed to grow again after
        # successful iterations
        s = min(1.0, step * 2.0)
        while True:
            x_new = x - s * g
            f_new, g_new = fun_and_grad(x_new)
            if np.isfinite(f_new) and f_new <= f - ARMIJO_C * s * gnorm2:
                break
            s *= 0.5
            if s < MIN_STEP:
                return x, f, it
        step = s
        rel_change = abs(f - f_new) / max(abs(f), 1e-30)
        x, f, g = x_new, f_new, g_new
        if rel_change < tolerance:
            break
    return x, f, it
