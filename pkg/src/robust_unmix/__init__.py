"""Robust linear hyperspectral unmixing via band-reweighted sparse NMF.

Data layout everywhere: dense bands-by-pixels matrices (D x N), with
endmembers D x K and abundances K x N.
"""

from .baselines import l1_nmf_solve, l12_nmf_solve, nmf_solve
from .errors import (
    BadConfig,
    BadRank,
    DegenerateBand,
    DegenerateData,
    FormatError,
    NegativeEntry,
    NonFinite,
    NonPositiveSigma,
    NumericalError,
    ParseError,
    ShapeMismatch,
    UnmixError,
    UnsupportedFormat,
    ValidationError,
    WeightOutOfRange,
    ZeroNormSpectrum,
)
from .initialization import init_abundances, init_endmembers, nnls_matrix
from .io import load_matrix, save_matrix
from .metrics import EvaluationTable, evaluate_run, match_endmembers, rmse, sad
from .model import (
    Abundances,
    BandWeights,
    Endmembers,
    SolveReport,
    SolverConfig,
    SpectraMatrix,
    Termination,
    validate,
)
from .objective import (
    augmented_objective,
    band_residual_sq,
    cenmf_objective,
    correntropy_loss,
    frobenius_loss,
)
from .solver import (
    band_weights,
    cenmf_solve,
    estimate_lambda,
    inner_solve,
    scaled_problem_objective,
    update_sigma2,
    weighted_update_step,
)
from .synth import (
    Scene,
    SceneSpec,
    add_band_noise,
    builtin_endmember_library,
    generate_scene,
    noise_variance_for_snr,
    snr_db,
)

__version__ = "0.1.0"

__all__ = [
    "Abundances",
    "BadConfig",
    "BadRank",
    "BandWeights",
    "DegenerateBand",
    "DegenerateData",
    "Endmembers",
    "EvaluationTable",
    "FormatError",
    "NegativeEntry",
    "NonFinite",
    "NonPositiveSigma",
    "NumericalError",
    "ParseError",
    "Scene",
    "SceneSpec",
    "ShapeMismatch",
    "SolveReport",
    "SolverConfig",
    "SpectraMatrix",
    "Termination",
    "UnmixError",
    "UnsupportedFormat",
    "ValidationError",
    "WeightOutOfRange",
    "ZeroNormSpectrum",
    "add_band_noise",
    "augmented_objective",
    "band_residual_sq",
    "band_weights",
    "builtin_endmember_library",
    "cenmf_objective",
    "cenmf_solve",
    "correntropy_loss",
    "estimate_lambda",
    "evaluate_run",
    "frobenius_loss",
    "generate_scene",
    "init_abundances",
    "init_endmembers",
    "inner_solve",
    "l1_nmf_solve",
    "l12_nmf_solve",
    "load_matrix",
    "match_endmembers",
    "nmf_solve",
    "nnls_matrix",
    "noise_variance_for_snr",
    "rmse",
    "sad",
    "save_matrix",
    "scaled_problem_objective",
    "snr_db",
    "update_sigma2",
    "validate",
    "weighted_update_step",
]
