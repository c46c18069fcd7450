"""Domain types, solver configuration and input validation.

Matrix layout convention used everywhere in this package: the observed
data ``Y`` is dense, bands by pixels (D rows, N columns). Row ``d`` is one
spectral band sampled at every pixel, column ``n`` is one pixel spectrum.
Endmembers ``X`` are D x K (one column per pure material), abundances
``W`` are K x N (one row per endmember's spatial map).

All wrapper types copy their input, validate it and freeze the underlying
buffer, so instances are immutable value objects that can be shared
between threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BadConfig,
    BadRank,
    NegativeEntry,
    NonFinite,
    ShapeMismatch,
    WeightOutOfRange,
)

__all__ = [
    "SpectraMatrix",
    "Endmembers",
    "Abundances",
    "BandWeights",
    "SolverConfig",
    "SolveReport",
    "Termination",
    "validate",
    "as_matrix",
]


def _frozen_f64(data, ndim):
    arr = np.array(data, dtype=np.float64, copy=True, order="C")
    if arr.ndim != ndim:
        raise ShapeMismatch(f"expected {ndim}-d array, got shape {arr.shape}")
    if arr.size == 0:
        raise ShapeMismatch("empty array")
    arr.setflags(write=False)
    return arr


def _check_nonneg_finite(arr):
    bad = ~np.isfinite(arr)
    if bad.any():
        idx = np.argwhere(bad)[0]
        raise NonFinite(*(idx if len(idx) == 2 else (idx[0], 0)))
    neg = arr < 0
    if neg.any():
        idx = np.argwhere(neg)[0]
        if len(idx) == 1:
            idx = (idx[0], 0)
        raise NegativeEntry(idx[0], idx[1], arr[tuple(np.argwhere(neg)[0])])


def as_matrix(x) -> np.ndarray:
    """Unwrap a domain type to its ndarray; pass ndarrays through as float64."""
    data = getattr(x, "data", None)
    if data is None:
        data = getattr(x, "u", x)
    return np.asarray(data, dtype=np.float64)


@dataclass(frozen=True)
class SpectraMatrix:
    """Observed hyperspectral data, D bands x N pixels, nonnegative."""

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen_f64(self.data, 2)
        _check_nonneg_finite(arr)
        object.__setattr__(self, "data", arr)

    @property
    def n_bands(self):
        return self.data.shape[0]

    @property
    def n_pixels(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class Endmembers:
    """Spectral signatures, D bands x K endmembers, nonnegative."""

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen_f64(self.data, 2)
        _check_nonneg_finite(arr)
        object.__setattr__(self, "data", arr)

    @property
    def n_bands(self):
        return self.data.shape[0]

    @property
    def n_endmembers(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class Abundances:
    """Per-pixel endmember fractions, K x N, nonnegative.

    Rows are not constrained to sum to one; the factorization model only
    imposes nonnegativity. Renormalization is a reporting option.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = _frozen_f64(self.data, 2)
        _check_nonneg_finite(arr)
        object.__setattr__(self, "data", arr)

    @property
    def n_endmembers(self):
        return self.data.shape[0]

    @property
    def n_pixels(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class BandWeights:
    """Per-band trust weights, length D, each in (0, 1]."""

    u: np.ndarray

    def __post_init__(self):
        arr = _frozen_f64(self.u, 1)
        if not np.isfinite(arr).all():
            raise WeightOutOfRange("band weights must be finite")
        if (arr <= 0).any() or (arr > 1).any():
            d = int(np.argwhere((arr <= 0) | (arr > 1))[0][0])
            raise WeightOutOfRange(f"band weight u[{d}]={arr[d]!r} outside (0, 1]")
        object.__setattr__(self, "u", arr)

    @property
    def n_bands(self):
        return self.u.shape[0]


class Termination(enum.Enum):
    TOLERANCE_REACHED = "tolerance_reached"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by every factorization solver in this package.

    Parameters
    ----------
    lam:
        Weight of the l1 abundance penalty, >= 0, or ``"auto"`` to derive
        it from the data's per-band sparseness statistic once, before
        iterating.
    alpha:
        Scale factor applied when refreshing the Gaussian kernel width
        from the current residual.
    outer_tol:
        Relative stop threshold for the outer loop: iteration ends when
        the objective changes by less than ``outer_tol * (1 + |G0|)``
        with ``G0`` the starting objective value.
    max_outer, max_inner:
        Iteration budgets for the outer (reweighting) loop and the inner
        multiplicative loop.
    inner_tol:
        Relative change threshold stopping the inner multiplicative loop.
    denom_eps:
        Additive guard for multiplicative-update denominators.
    sigma2_floor:
        Lower bound for the kernel width. ``None`` resolves to
        ``1e-10 * mean(Y * Y)`` at solve time so an exact fit cannot
        degenerate the kernel.
    seed:
        Seed for every randomized choice (initialization). Identical
        seeds and configs reproduce runs bit for bit.
    """

    lam: float | str = "auto"
    alpha: float = 1.0
    outer_tol: float = 1e-6
    max_outer: int = 100
    inner_tol: float = 1e-6
    max_inner: int = 50
    denom_eps: float = 1e-12
    sigma2_floor: float | None = None
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.lam, str):
            if self.lam != "auto":
                raise BadConfig(f"lam must be a number >= 0 or 'auto', got {self.lam!r}")
        elif not (float(self.lam) >= 0):
            raise BadConfig(f"lam must be >= 0, got {self.lam!r}")
        for name in ("alpha", "outer_tol", "inner_tol", "denom_eps"):
            v = getattr(self, name)
            if not (float(v) > 0):
                raise BadConfig(f"{name} must be > 0, got {v!r}")
        for name in ("max_outer", "max_inner"):
            v = getattr(self, name)
            if int(v) < 1:
                raise BadConfig(f"{name} must be >= 1, got {v!r}")
        if self.sigma2_floor is not None and not (float(self.sigma2_floor) > 0):
            raise BadConfig(f"sigma2_floor must be > 0, got {self.sigma2_floor!r}")
        if not (0 <= int(self.seed) < 2 ** 64):
            raise BadConfig("seed must fit in 64 unsigned bits")

    def resolve_lambda(self, estimator):
        """Return the numeric penalty weight, calling ``estimator()`` for 'auto'."""
        return float(estimator()) if self.lam == "auto" else float(self.lam)


@dataclass(frozen=True)
class SolveReport:
    """Everything a solver run produces.

    ``objective_trace[i]`` is the model objective of iterate ``i``
    evaluated under the kernel width that was in force while producing
    it; ``objective_start_trace[i]`` re-evaluates the same iterate under
    the kernel width refreshed from it (the value the next iteration
    starts from). Per-iteration descent therefore reads
    ``objective_trace[i + 1] <= objective_start_trace[i]`` up to the
    documented tolerance. ``sigma2_trace[i]`` is the refreshed kernel
    width tied to iterate ``i``. Plain least-squares baselines leave
    ``sigma2_trace`` empty and report all-ones band weights.
    """

    endmembers: Endmembers
    abundances: Abundances
    band_weights: BandWeights
    objective_trace: np.ndarray
    sigma2_trace: np.ndarray
    termination: Termination
    objective_start_trace: np.ndarray = field(default=None)
    lambda_used: float = 0.0
    n_iterations: int = 0
    wall_time_s: float = 0.0

    def __post_init__(self):
        tr = np.asarray(self.objective_trace, dtype=np.float64)
        if tr.ndim != 1 or tr.size == 0 or not np.isfinite(tr).all():
            raise ShapeMismatch("objective_trace must be a non-empty finite vector")
        object.__setattr__(self, "objective_trace", tr)
        st = self.objective_start_trace
        st = tr.copy() if st is None else np.asarray(st, dtype=np.float64)
        object.__setattr__(self, "objective_start_trace", st)
        object.__setattr__(
            self, "sigma2_trace", np.asarray(self.sigma2_trace, dtype=np.float64)
        )


def validate(Y, k: int) -> None:
    """Check that ``Y`` is usable data and ``k`` a feasible endmember count.

    Raises ``NegativeEntry``/``NonFinite`` for bad values and ``BadRank``
    unless ``1 <= k <= min(D, N)``.
    """
    spectra = Y if isinstance(Y, SpectraMatrix) else SpectraMatrix(as_matrix(Y))
    d, n = spectra.data.shape
    if not 1 <= int(k) <= min(d, n):
        raise BadRank(k, f"K={k} outside [1, min(D={d}, N={n})]")
