"""Evaluation metrics: spectral angles, abundance errors, truth matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ShapeMismatch, ZeroNormSpectrum
from .model import as_matrix

__all__ = ["sad", "rmse", "match_endmembers", "evaluate_run", "EvaluationTable"]


def sad(x_true, x_est) -> float:
    """Spectral angle between two spectra, in radians.

    ``arccos`` of the cosine similarity, with the cosine clamped into
    [-1, 1] first; scale-invariant and symmetric. Raises
    ``ZeroNormSpectrum`` if either vector has zero norm.
    """
    a = as_matrix(x_true).reshape(-1)
    b = as_matrix(x_est).reshape(-1)
    if a.shape != b.shape:
        raise ShapeMismatch(f"spectra lengths differ: {a.shape[0]} vs {b.shape[0]}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ZeroNormSpectrum("cannot measure the angle of a zero spectrum")
    return float(np.arccos(np.clip(a @ b / (na * nb), -1.0, 1.0)))


def rmse(w_true, w_est) -> float:
    """Root-mean-square difference between two abundance maps."""
    a = as_matrix(w_true).reshape(-1)
    b = as_matrix(w_est).reshape(-1)
    if a.shape != b.shape:
        raise ShapeMismatch(f"map lengths differ: {a.shape[0]} vs {b.shape[0]}")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def match_endmembers(X_true, X_est) -> np.ndarray:
    """Assign estimated endmembers to true ones, minimizing total angle.

    Returns ``perm`` with ``perm[i]`` the column of ``X_est`` matched to
    column ``i`` of ``X_true``; computed by optimal assignment on the
    pairwise angle matrix (greedy matching can misattribute close
    endmembers).
    """
    Xt, Xe = as_matrix(X_true), as_matrix(X_est)
    if Xt.shape != Xe.shape:
        raise ShapeMismatch(f"endmember matrices differ in shape: {Xt.shape} vs {Xe.shape}")
    k = Xt.shape[1]
    cost = np.empty((k, k))
    for i in range(k):
        for j in range(k):
            cost[i, j] = sad(Xt[:, i], Xe[:, j])
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(k, dtype=np.int64)
    perm[rows] = cols
    return perm


@dataclass(frozen=True)
class EvaluationTable:
    """Per-endmember angles and abundance errors, plus their means."""

    permutation: np.ndarray
    sad_values: np.ndarray
    rmse_values: np.ndarray

    @property
    def mean_sad(self) -> float:
        return float(np.mean(self.sad_values))

    @property
    def mean_rmse(self) -> float:
        return float(np.mean(self.rmse_values))

    def rows(self):
        """(label, sad, rmse) rows, endmembers first, then the mean."""
        out = [
            (str(i), float(s), float(r))
            for i, (s, r) in enumerate(zip(self.sad_values, self.rmse_values))
        ]
        out.append(("mean", self.mean_sad, self.mean_rmse))
        return out


def evaluate_run(scene, report, renormalize: bool = False, band_mask=None) -> EvaluationTable:
    """Score a solver report against a scene's ground truth.

    Matches endmembers by optimal assignment, then reports the angle per
    matched column pair and the abundance error per matched row pair.

    Parameters
    ----------
    scene : Scene (or any object with ``endmembers`` and ``abundances``)
    report : SolveReport (or any object with the same two attributes)
    renormalize : rescale each estimated pixel to sum to one before the
        abundance error; reporting aid for models that never constrain
        the abundance scale. Off by default.
    band_mask : optional iterable of band indices to exclude from the
        angle computation (noise-corrupted bands are commonly dropped
        before spectral comparison).
    """
    Xt = as_matrix(scene.endmembers)
    Wt = as_matrix(scene.abundances)
    Xe = as_matrix(report.endmembers)
    We = as_matrix(report.abundances)
    if Xt.shape != Xe.shape or Wt.shape != We.shape:
        raise ShapeMismatch("scene and report dimensions disagree")

    if renormalize:
        sums = We.sum(axis=0, keepdims=True)
        We = np.divide(We, sums, out=np.zeros_like(We), where=sums > 0)

    perm = match_endmembers(Xt, Xe)

    keep = np.ones(Xt.shape[0], dtype=bool)
    if band_mask is not None:
        idx = np.asarray(list(band_mask), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= Xt.shape[0]):
            raise ShapeMismatch("band_mask index out of range")
        keep[idx] = False

    sads = np.array([sad(Xt[keep, i], Xe[keep, perm[i]]) for i in range(Xt.shape[1])])
    rmses = np.array([rmse(Wt[i], We[perm[i]]) for i in range(Wt.shape[0])])
    return EvaluationTable(permutation=perm, sad_values=sads, rmse_values=rmses)
