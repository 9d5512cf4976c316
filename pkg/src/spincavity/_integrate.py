"""Embedded Dormand-Prince 5(4) propagator.

Internal helper shared by the mean and covariance propagators and the
driven-cavity test oracles.  The system is linear but can be stiff in
the sense of widely separated decay rates (cavity much faster than the
inhomogeneous width), which the adaptive step controller handles; an
optional fixed-step mode exists for tests that need exactly
reproducible step sequences.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError

__all__ = ["integrate"]

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B5 = _A[6].copy()  # fifth-order weights; FSAL pair
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

_MAX_FACTOR = 5.0
_MIN_FACTOR = 0.2
_SAFETY = 0.9


def integrate(
    rhs,
    y0: np.ndarray,
    t_out,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    fixed_steps: int | None = None,
    postprocess=None,
    max_steps: int = 2_000_000,
):
    """Propagate ``dy/dt = rhs(t, y)`` through the output times.

    Parameters
    ----------
    rhs : callable(t, y) -> dy/dt
    y0 : state at ``t_out[0]``
    t_out : increasing array of output times
    rtol, atol : adaptive error control (rms-weighted norm)
    fixed_steps : when given, take exactly this many equal substeps
        between consecutive output times with no error control
    postprocess : optional callable(y) -> y applied after every
        accepted step (used to re-symmetrize covariance matrices)
    max_steps : hard cap on accepted + rejected steps

    Returns
    -------
    ys : array of states, shape ``(len(t_out), len(y0))``
    stats : dict with ``n_accepted`` and ``n_rejected``
    """
    t_out = np.asarray(t_out, dtype=float)
    y = np.array(y0, dtype=float)
    n = y.size
    out = np.empty((t_out.size, n))
    out[0] = y
    stats = {"n_accepted": 0, "n_rejected": 0}

    if fixed_steps is not None:
        if fixed_steps < 1:
            raise NumericalError("fixed_steps must be >= 1")
        for io in range(1, t_out.size):
            t0, t1 = t_out[io - 1], t_out[io]
            h = (t1 - t0) / fixed_steps
            for k in range(fixed_steps):
                t = t0 + k * h
                K = np.empty((7, n))
                K[0] = rhs(t, y)
                for s in range(1, 7):
                    K[s] = rhs(t + _C[s] * h, y + h * (_A[s, :s] @ K[:s]))
                y = y + h * (_B5 @ K)
                if postprocess is not None:
                    y = postprocess(y)
                stats["n_accepted"] += 1
            out[io] = y
        return out, stats

    t = t_out[0]
    t_end = t_out[-1]
    if t_end == t:
        return out, stats
    K = np.empty((7, n))
    K[0] = rhs(t, y)
    h = (t_end - t) * 1e-6
    io = 1
    while io < t_out.size:
        if stats["n_accepted"] + stats["n_rejected"] >= max_steps:
            raise NumericalError(
                f"propagation exceeded {max_steps} steps at t={t:.6g}"
            )
        if h < 16 * np.finfo(float).eps * max(abs(t), 1.0):
            raise NumericalError(
                f"step size underflow at t={t:.6g}; local error target "
                "cannot be met"
            )
        # never step past the next requested output time
        clipped = t + h >= t_out[io]
        h_try = t_out[io] - t if clipped else h
        for s in range(1, 7):
            K[s] = rhs(t + _C[s] * h_try, y + h_try * (_A[s, :s] @ K[:s]))
        y_new = y + h_try * (_B5 @ K)
        err = h_try * (_E @ K)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        enorm = np.sqrt(np.mean((err / scale) ** 2))
        if enorm <= 1.0:
            stats["n_accepted"] += 1
            # land exactly on the output node when the step was clipped
            t = t_out[io] if clipped else t + h_try
            y = y_new
            if postprocess is not None:
                y = postprocess(y)
                K[6] = rhs(t, y)
            K[0] = K[6]  # first-same-as-last
            if clipped:
                out[io] = y
                io += 1
            factor = _MAX_FACTOR if enorm == 0.0 else min(
                _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * enorm**-0.2)
            )
            h = h_try * factor
        else:
            stats["n_rejected"] += 1
            h = h_try * min(1.0, max(_MIN_FACTOR, _SAFETY * enorm**-0.2))
            # K[0] still holds rhs(t, y); nothing to restore
    return out, stats
