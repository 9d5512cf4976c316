"""Propagation of means and covariances, steady states, stability.

Mean values obey ``dy/dt = A y`` and covariances obey
``dgamma/dt = A gamma + gamma A^T + N_diag`` for the drift matrix ``A``
and diagonal noise ``N_diag`` of a :class:`~spincavity.model.DriftModel`.
Both are propagated with an adaptive embedded Runge-Kutta pair; the
steady covariance comes from the algebraic Lyapunov equation and is
only defined when the spectral abscissa of the drift is negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_continuous_lyapunov

from ._integrate import integrate
from .broadening import BroadeningFamily, SubEnsembleGrid
from .errors import (
    NumericalError,
    PreconditionError,
    RevivalGuardError,
    UnstableModelError,
)
from .model import DriftModel

__all__ = [
    "MomentSeries",
    "evolve_mean",
    "evolve_covariance",
    "steady_state_covariance",
    "spectral_abscissa",
    "collective_reduce",
    "check_revival_window",
]

# order of the compact per-time variance track stored by
# evolve_covariance: (Var Xc, Var Pc, Var Sx, Var Sy, <dSx dPc>, <dSy dXc>)
_TRACK_KEYS = (
    "var_X_c",
    "var_P_c",
    "var_S_x",
    "var_S_y",
    "cov_Sx_Pc",
    "cov_Sy_Xc",
)


@dataclass(frozen=True)
class MomentSeries:
    """Time series of first and/or second moments of one model.

    ``means`` has shape (T, dim); ``covariances`` (T, dim, dim) is only
    stored for small systems or on request, while ``var_track`` always
    records the collective second-moment reductions per output time for
    covariance runs.  ``reductions`` is filled by
    :func:`collective_reduce`.
    """

    times: np.ndarray
    model: DriftModel
    means: np.ndarray | None = None
    covariances: np.ndarray | None = None
    var_track: np.ndarray | None = None
    reductions: dict | None = None


def _validate_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise PreconditionError("times must be a 1-d grid with >= 2 points")
    if times[0] != 0.0:
        raise PreconditionError("times must start at 0")
    if not np.all(np.diff(times) > 0.0):
        raise PreconditionError("times must be strictly increasing")
    return times


def check_revival_window(grid: SubEnsembleGrid, gamma_perp: float, t_max: float):
    """Reject windows that run into discretization revivals.

    A uniform grid of undamped spins rephases at ``t = 2 pi / spacing``.
    With ``gamma_perp == 0`` the revival is undamped, so the window must
    end at or below a quarter of the revival time; refine the grid
    (larger M) to extend the window.
    """
    if (
        grid.spacing is not None
        and gamma_perp == 0.0
        and grid.family is BroadeningFamily.GAUSSIAN
    ):
        t_revival = 2.0 * math.pi / grid.spacing
        if t_revival < 4.0 * t_max:
            need = 1 + math.ceil((grid.size - 1) * 4.0 * t_max / t_revival)
            raise RevivalGuardError(
                f"window t_max={t_max:g} exceeds a quarter of the grid "
                f"revival time {t_revival:g}; use M >= {need | 1} sub-ensembles"
            )


def evolve_mean(
    model: DriftModel,
    y0: np.ndarray,
    times,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    fixed_steps: int | None = None,
) -> MomentSeries:
    """Propagate the mean vector through the output times."""
    times = _validate_times(times)
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (model.dim,):
        raise PreconditionError(
            f"state length {y0.shape} does not match model dim {model.dim}"
        )
    check_revival_window(model.grid, model.params.gamma_perp, times[-1])
    drift = sp.csr_matrix(model.drift)

    def rhs(t, y):
        return drift.dot(y)

    ys, _ = integrate(
        rhs, y0, times, rtol=rtol, atol=atol, fixed_steps=fixed_steps
    )
    return MomentSeries(times=times, model=model, means=ys)


def _covariance_track(gamma: np.ndarray, M: int) -> np.ndarray:
    ix = 2 + 2 * np.arange(M)
    iy = ix + 1
    return np.array(
        [
            gamma[0, 0] / 2.0,
            gamma[1, 1] / 2.0,
            gamma[np.ix_(ix, ix)].sum() / 2.0,
            gamma[np.ix_(iy, iy)].sum() / 2.0,
            gamma[ix, 1].sum() / 2.0,
            gamma[iy, 0].sum() / 2.0,
        ]
    )


def evolve_covariance(
    model: DriftModel,
    gamma0: np.ndarray,
    times,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    store_full: bool | None = None,
) -> MomentSeries:
    """Propagate the covariance matrix through the output times.

    The propagated matrix is re-symmetrized after every accepted step.
    Full (T, dim, dim) storage is kept when ``store_full`` is true,
    defaulting to systems of dimension <= 64; the collective variance
    track is recorded at every output time regardless.
    """
    times = _validate_times(times)
    dim = model.dim
    gamma0 = np.asarray(gamma0, dtype=float)
    if gamma0.shape != (dim, dim):
        raise PreconditionError(
            f"covariance shape {gamma0.shape} does not match model dim {dim}"
        )
    scale = np.abs(gamma0).max()
    if scale > 0 and np.abs(gamma0 - gamma0.T).max() > 1e-12 * scale:
        raise PreconditionError("initial covariance must be symmetric")
    check_revival_window(model.grid, model.params.gamma_perp, times[-1])
    if store_full is None:
        store_full = dim <= 64

    drift = sp.csr_matrix(model.drift)
    noise = model.noise_diag
    idx_diag = np.arange(dim)

    def rhs(t, flat):
        gamma = flat.reshape(dim, dim)
        half = drift.dot(gamma)
        out = half + half.T
        out[idx_diag, idx_diag] += noise
        return out.ravel()

    def resym(flat):
        gamma = flat.reshape(dim, dim)
        gamma = (gamma + gamma.T) / 2.0
        return gamma.ravel()

    flats, _ = integrate(
        rhs,
        gamma0.ravel(),
        times,
        rtol=rtol,
        atol=atol,
        postprocess=resym,
    )
    M = model.grid.size
    track = np.array(
        [_covariance_track(flat.reshape(dim, dim), M) for flat in flats]
    )
    covs = None
    if store_full:
        covs = flats.reshape(times.size, dim, dim)
    return MomentSeries(
        times=times, model=model, covariances=covs, var_track=track
    )


def spectral_abscissa(model: DriftModel) -> float:
    """Largest real part over the drift-matrix spectrum."""
    try:
        eigenvalues = np.linalg.eigvals(model.drift)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigenvalue computation failed: {exc}") from exc
    return float(eigenvalues.real.max())


def steady_state_covariance(model: DriftModel) -> np.ndarray:
    """Solve the algebraic Lyapunov equation of the model.

    Requires a strictly stable drift (spectral abscissa < 0); the
    result is symmetrized and its residual is verified against the
    noise scale, with one refinement pass before giving up.
    """
    abscissa = spectral_abscissa(model)
    if abscissa >= 0.0:
        raise UnstableModelError(
            "no steady state: spectral abscissa "
            f"{abscissa:.3e} >= 0 (second moments diverge)"
        )
    noise = np.diag(model.noise_diag)
    drift = model.drift
    gamma = solve_continuous_lyapunov(drift, -noise)
    gamma = (gamma + gamma.T) / 2.0
    tol = 1e-10 * model.noise_diag.max()
    residual = drift @ gamma + gamma @ drift.T + noise
    if np.abs(residual).max() > tol:
        correction = solve_continuous_lyapunov(drift, -residual)
        gamma = gamma + (correction + correction.T) / 2.0
        residual = drift @ gamma + gamma @ drift.T + noise
        if np.abs(residual).max() > tol:
            raise NumericalError(
                "Lyapunov residual "
                f"{np.abs(residual).max():.3e} exceeds {tol:.3e}"
            )
    return gamma


def collective_reduce(series: MomentSeries, grid: SubEnsembleGrid) -> MomentSeries:
    """Fill the collective reductions of a moment series.

    Mean-level records (X_c, P_c, S_x, S_y) come from stored means;
    variance records come from stored covariances when available, else
    from the propagation-time variance track.  The relaxation ratio
    ``R(t) = (Var_inf - Var(t)) / (Var_inf - Var(0))`` of the collective
    S_x variance is filled when the model is stable and is NaN-flagged
    otherwise.
    """
    if grid.size != series.model.grid.size:
        raise PreconditionError("grid does not match the series' model")
    M = grid.size
    ix = 2 + 2 * np.arange(M)
    red: dict[str, np.ndarray] = {}
    if series.means is not None:
        red["X_c"] = series.means[:, 0].copy()
        red["P_c"] = series.means[:, 1].copy()
        red["S_x"] = series.means[:, ix].sum(axis=1)
        red["S_y"] = series.means[:, ix + 1].sum(axis=1)
    if series.covariances is not None:
        track = np.array(
            [_covariance_track(g, M) for g in series.covariances]
        )
    else:
        track = series.var_track
    if track is not None:
        for k, key in enumerate(_TRACK_KEYS):
            red[key] = track[:, k].copy()
        var_sx = red["var_S_x"]
        try:
            gamma_inf = steady_state_covariance(series.model)
        except UnstableModelError:
            red["R"] = np.full(series.times.size, np.nan)
        else:
            var_inf = gamma_inf[np.ix_(ix, ix)].sum() / 2.0
            denom = var_inf - var_sx[0]
            if denom == 0.0:
                red["R"] = np.full(series.times.size, np.nan)
            else:
                red["R"] = (var_inf - var_sx) / denom
    return replace(series, reductions=red)
