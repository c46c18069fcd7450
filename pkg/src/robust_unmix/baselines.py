"""Comparison solvers: plain NMF, l1-penalized NMF and l1/2-penalized NMF.

All three share the initialization, the multiplicative X update and the
stopping machinery of the main solver, so sweep comparisons differ only
in the W update rule and penalty. One iteration is one (X, W) update
pair; the budget is ``max_outer * max_inner`` steps, stopping early when
the objective change falls below ``outer_tol * (1 + |F0|)``.
"""

from __future__ import annotations

import time

import numpy as np

from .errors import NumericalError
from .initialization import init_endmembers, nnls_matrix
from .model import (
    Abundances,
    BandWeights,
    Endmembers,
    SolveReport,
    SolverConfig,
    SpectraMatrix,
    Termination,
    as_matrix,
    validate,
)
from .objective import frobenius_loss
from .solver import _w_update_l1, _x_update, estimate_lambda

__all__ = ["nmf_solve", "l1_nmf_solve", "l12_nmf_solve"]

# Abundance floor applied before the -1/2 power in the l1/2 W update.
L12_W_FLOOR = 1e-12


def _resolve_lambda(lam, Yv):
    if isinstance(lam, str):
        if lam != "auto":
            raise ValueError(f"lam must be a number or 'auto', got {lam!r}")
        return estimate_lambda(Yv)
    if not float(lam) >= 0:
        raise ValueError(f"lam must be >= 0, got {lam!r}")
    return float(lam)


def _multiplicative_solve(Y, k, lam, config, penalty):
    config = config or SolverConfig()
    started = time.perf_counter()
    spectra = Y if isinstance(Y, SpectraMatrix) else SpectraMatrix(as_matrix(Y))
    validate(spectra, k)
    Yv = spectra.data
    lam = _resolve_lambda(lam, Yv)
    eps = config.denom_eps

    X = np.array(init_endmembers(spectra, k, config.seed).data)
    W = nnls_matrix(Yv, X)

    if penalty == "l1":
        def w_update(X, W):
            return _w_update_l1(Yv, X, W, lam, eps)

        def objective(X, W):
            return frobenius_loss(Yv, X, W) + 2.0 * lam * float(np.sum(W))
    else:
        def w_update(X, W):
            root = np.sqrt(np.maximum(W, L12_W_FLOOR))
            return W * (X.T @ Yv) / ((X.T @ X) @ W + (lam / 2.0) / root + eps)

        def objective(X, W):
            return frobenius_loss(Yv, X, W) + lam * float(np.sum(np.sqrt(W)))

    f = objective(X, W)
    stop_eps = config.outer_tol * (1.0 + abs(f))
    trace = [f]
    termination = Termination.MAX_ITERATIONS
    steps = 0
    for _ in range(config.max_outer * config.max_inner):
        X = _x_update(Yv, X, W, eps)
        W = w_update(X, W)
        f_new = objective(X, W)
        trace.append(f_new)
        steps += 1
        if abs(f - f_new) < stop_eps:
            termination = Termination.TOLERANCE_REACHED
            break
        f = f_new

    if not (np.isfinite(X).all() and np.isfinite(W).all()):
        raise NumericalError("solver produced non-finite factors")

    return SolveReport(
        endmembers=Endmembers(X),
        abundances=Abundances(W),
        band_weights=BandWeights(np.ones(Yv.shape[0])),
        objective_trace=np.asarray(trace),
        sigma2_trace=np.empty(0),
        termination=termination,
        lambda_used=lam,
        n_iterations=steps,
        wall_time_s=time.perf_counter() - started,
    )


def nmf_solve(Y, k: int, config: SolverConfig | None = None) -> SolveReport:
    """Plain least-squares NMF via the standard multiplicative updates."""
    return _multiplicative_solve(Y, k, 0.0, config, "l1")


def l1_nmf_solve(Y, k: int, lam, config: SolverConfig | None = None) -> SolveReport:
    """NMF with an l1 abundance penalty ``2 * lam * sum(W)``.

    With ``lam=0`` the iterate sequence is bit-identical to
    :func:`nmf_solve`. ``lam`` may be ``"auto"``.
    """
    return _multiplicative_solve(Y, k, lam, config, "l1")


def l12_nmf_solve(Y, k: int, lam, config: SolverConfig | None = None) -> SolveReport:
    """NMF with a square-root abundance penalty ``lam * sum(sqrt(W))``.

    Comparator-grade: the W update divides by ``sqrt(W)`` floored at
    ``1e-12``; with ``lam=0`` it reduces to :func:`nmf_solve` exactly.
    """
    return _multiplicative_solve(Y, k, lam, config, "l12")
