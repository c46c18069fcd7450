"""Shared initialization: pure-pixel endmember picking and NNLS abundances.

Every solver starts from the same simplex-vertex style initializer so
method comparisons differ only in the update rules. The endmember picker
projects the data onto its top-K singular subspace and repeatedly selects
the pixel with the largest absolute projection onto a random direction
orthogonal to the pixels already chosen; returned endmember columns are
therefore actual data columns. Abundances are then per-pixel nonnegative
least squares, solved by a bounded cyclic projected-coordinate iteration.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateData, ShapeMismatch
from .model import Abundances, Endmembers, SpectraMatrix, as_matrix, validate

__all__ = ["init_endmembers", "init_abundances", "nnls_matrix"]


def _furthest_point_fill(Y, chosen, k):
    # Max-min-distance greedy over pixels; used when the random-direction
    # recursion runs out of informative directions (data rank below K).
    n = Y.shape[1]
    sq = np.einsum("dn,dn->n", Y, Y)
    while len(chosen) < k:
        if chosen:
            sel = Y[:, chosen]
            d2 = sq[:, None] - 2.0 * (Y.T @ sel) + np.einsum("dk,dk->k", sel, sel)[None, :]
            score = d2.min(axis=1)
        else:
            score = sq.copy()
        score[chosen] = -np.inf
        j = int(np.argmax(score))
        if not np.isfinite(score[j]) or score[j] <= 0.0:
            raise DegenerateData(
                f"cannot select {k} distinct pixels, data has too few distinct columns"
            )
        chosen.append(j)
    return chosen


def init_endmembers(Y, k: int, seed: int) -> Endmembers:
    """Pick K pixels of ``Y`` as initial endmembers (seeded, deterministic).

    Parameters
    ----------
    Y : SpectraMatrix or (D, N) array
    k : number of endmembers to extract
    seed : RNG seed; identical seeds give identical selections
    """
    validate(Y, k)
    Y = as_matrix(Y)
    rng = np.random.default_rng(seed)
    k = int(k)

    # Coordinates of every pixel in the top-K singular subspace.
    left, _, _ = np.linalg.svd(Y, full_matrices=False)
    coords = left[:, :k].T @ Y  # (k, N)
    scale = float(np.abs(coords).max())

    chosen: list[int] = []
    basis = np.zeros((k, 0))
    for _ in range(k):
        w = rng.standard_normal(k)
        if basis.shape[1]:
            w = w - basis @ np.linalg.lstsq(basis, w, rcond=None)[0]
        norm = np.linalg.norm(w)
        if norm <= 1e-12:
            break
        proj = np.abs(w @ coords) / norm
        proj[chosen] = -1.0
        j = int(np.argmax(proj))
        if proj[j] <= 1e-12 * max(scale, 1.0):
            break
        chosen.append(j)
        basis = np.concatenate([basis, coords[:, j : j + 1]], axis=1)

    if len(chosen) < k:
        chosen = _furthest_point_fill(Y, chosen, k)
    return Endmembers(Y[:, chosen])


def nnls_matrix(Y, X, max_iter: int = 500, tol: float = 1e-12) -> np.ndarray:
    """Solve ``min_{W>=0} ||Y - X W||_F^2`` column by column, vectorized.

    Cyclic projected coordinate descent on the rows of W: each pass
    updates one abundance row exactly (clipped at zero) given the others,
    for all pixels at once. Converges to the per-pixel NNLS solution;
    bounded by ``max_iter`` passes.
    """
    Y, X = as_matrix(Y), as_matrix(X)
    if Y.ndim != 2 or X.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise ShapeMismatch(f"X {X.shape} does not conform with Y {Y.shape}")
    k = X.shape[1]
    xtx = X.T @ X
    xty = X.T @ Y
    diag = np.maximum(xtx.diagonal().copy(), 1e-300)
    W = np.zeros((k, Y.shape[1]))
    for _ in range(max_iter):
        delta = 0.0
        for i in range(k):
            row = W[i] + (xty[i] - xtx[i] @ W) / diag[i]
            np.maximum(row, 0.0, out=row)
            delta = max(delta, float(np.max(np.abs(row - W[i]), initial=0.0)))
            W[i] = row
        if delta <= tol * (1.0 + float(np.max(W, initial=0.0))):
            break
    return W


def init_abundances(Y, X) -> Abundances:
    """Nonnegative least-squares abundances for fixed endmembers.

    No sum-to-one constraint is applied; every pixel's residual is at
    most the residual of the zero vector by construction.
    """
    if isinstance(Y, SpectraMatrix):
        Y = Y.data
    if isinstance(X, Endmembers):
        X = X.data
    return Abundances(nnls_matrix(Y, X))
