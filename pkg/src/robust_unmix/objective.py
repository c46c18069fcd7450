"""Loss functions for the factorization models.

These are the reference quantities everything else is tested against:
the plain squared-error loss, the robust band-wise Gaussian-kernel loss,
its l1-penalized total objective, and the augmented form with explicit
band weights used by the half-quadratic outer loop.
"""

from __future__ import annotations

import numpy as np

from .errors import NonPositiveSigma, ShapeMismatch, WeightOutOfRange
from .model import as_matrix

__all__ = [
    "frobenius_loss",
    "correntropy_loss",
    "cenmf_objective",
    "augmented_objective",
    "band_residual_sq",
]


def _factors(Y, X, W):
    Y, X, W = as_matrix(Y), as_matrix(X), as_matrix(W)
    if Y.ndim != 2 or X.ndim != 2 or W.ndim != 2:
        raise ShapeMismatch("Y, X, W must all be 2-d")
    d, n = Y.shape
    if X.shape[0] != d or W.shape[1] != n or X.shape[1] != W.shape[0]:
        raise ShapeMismatch(
            f"shapes do not conform: Y {Y.shape}, X {X.shape}, W {W.shape}"
        )
    return Y, X, W


def band_residual_sq(Y, X, W) -> np.ndarray:
    """Squared 2-norm of the residual of each band: a length-D vector."""
    Y, X, W = _factors(Y, X, W)
    r = Y - X @ W
    return np.einsum("dn,dn->d", r, r)


def frobenius_loss(Y, X, W) -> float:
    """Squared Frobenius distance between ``Y`` and ``X @ W``."""
    return float(np.sum(band_residual_sq(Y, X, W)))


def correntropy_loss(Y, X, W, sigma2: float) -> float:
    """Sum over bands of the negative Gaussian kernel of the band residual.

    Each band contributes ``-exp(-||r_d||^2 / sigma2)`` where ``r_d`` is
    its residual row; the kernel width is ``sigma2`` itself, with no
    extra factor of two in the denominator. The value lies in [-D, 0).
    """
    if not sigma2 > 0:
        raise NonPositiveSigma(f"sigma2 must be > 0, got {sigma2!r}")
    m = band_residual_sq(Y, X, W)
    return float(-np.sum(np.exp(-m / sigma2)))


def cenmf_objective(Y, X, W, sigma2: float, lam: float) -> float:
    """Robust unmixing objective: kernel loss plus ``2 * lam * sum(W)``.

    With nonnegative ``W`` the l1 norm of every pixel's abundance vector
    reduces to the plain sum of all entries.
    """
    W_arr = as_matrix(W)
    return correntropy_loss(Y, X, W, sigma2) + 2.0 * float(lam) * float(np.sum(W_arr))


def augmented_objective(Y, X, W, u, sigma2: float, lam: float) -> float:
    """Band-weighted objective over the enlarged variable set ``(X, W, u)``.

    Uses the convex-conjugate term ``psi(-u) = u*log(u) - u`` so that for
    fixed factors the minimum over ``u`` is attained at the Gaussian
    kernel of each band residual and equals :func:`cenmf_objective`.
    """
    if not sigma2 > 0:
        raise NonPositiveSigma(f"sigma2 must be > 0, got {sigma2!r}")
    u = as_matrix(u).reshape(-1)
    m = band_residual_sq(Y, X, W)
    if u.shape[0] != m.shape[0]:
        raise ShapeMismatch(f"u has {u.shape[0]} entries for {m.shape[0]} bands")
    if (u <= 0).any() or (u > 1).any():
        raise WeightOutOfRange("band weights must lie in (0, 1]")
    psi = u * np.log(u) - u
    W_arr = as_matrix(W)
    return float(np.sum(u * m / sigma2 + psi) + 2.0 * float(lam) * np.sum(W_arr))
