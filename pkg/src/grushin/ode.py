"""Embedded Dormand–Prince 5(4) integrator with PI step-size control.

Kept deliberately small: it only has to serve as an independent oracle for
the closed-form solutions, so it favours predictability over speed.
"""

import numpy as np

from .errors import StepSizeError

# Dormand–Prince tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

_SAFETY = 0.9
_BETA = 0.04  # PI controller memory term
_ALPHA_PI = 0.2 - 0.75 * _BETA


def integrate(f, y0, t_eval, rtol=1e-12, atol=1e-12, h0=None, hmax=None,
              max_steps=2_000_000):
    """Integrate ``y' = f(t, y)`` from ``t = 0`` and return states at ``t_eval``.

    ``t_eval`` must be sorted and non-negative (or non-positive, for backward
    integration). ``hmax`` may be a number or a callable ``hmax(t, y)``
    returning the largest admissible step at the current state.

    Returns an array of shape ``(len(t_eval), len(y0))``.
    """
    y = np.array(y0, dtype=float)
    t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
    out = np.empty((t_eval.size, y.size))
    if t_eval.size == 0:
        return out
    direction = 1.0 if t_eval[-1] >= 0 else -1.0
    if np.any(np.diff(t_eval) * direction < 0):
        raise ValueError("t_eval must be monotone")

    t = 0.0
    k1 = np.asarray(f(t, y), dtype=float)
    span = abs(t_eval[-1]) or 1.0
    h = h0 if h0 is not None else min(1e-3, span)
    err_prev = 1e-4
    steps = 0
    stages = np.empty((7, y.size))

    for i, target in enumerate(t_eval):
        while direction * (target - t) > 0:
            if steps >= max_steps:
                raise StepSizeError("maximum number of steps exceeded",
                                    {"t": t, "h": h})
            limit = hmax(t, y) if callable(hmax) else hmax
            if limit is not None:
                h = min(h, limit)
            last = direction * (target - t) <= h * (1 + 1e-12)
            if last:
                h = abs(target - t)
            if h <= 1e-15 * max(1.0, abs(t)):
                raise StepSizeError("step size underflow", {"t": t, "h": h})

            hs = direction * h
            stages[0] = k1
            for s in range(1, 7):
                yi = y + hs * (np.dot(_A[s], stages[:s]) if s else 0.0)
                stages[s] = f(t + _C[s] * hs, yi)
            y_new = y + hs * np.dot(_B5, stages)
            err_vec = hs * np.dot(_E, stages)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
            steps += 1

            if err <= 1.0:
                t = target if last else t + hs
                y = y_new
                k1 = stages[6].copy()  # FSAL
                err = max(err, 1e-10)
                factor = _SAFETY * err ** -_ALPHA_PI * err_prev ** _BETA
                factor = min(5.0, max(0.2, factor))
                err_prev = err
                h = h * factor
            else:
                h = h * max(0.1, _SAFETY * err ** -0.2)
        out[i] = y
    return out
