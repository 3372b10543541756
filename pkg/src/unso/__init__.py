"""Single-pass polynomial orthogonalization with trainable coefficients,
iterative baselines, and a FLOPs-instrumented benchmark harness."""

from .coeff_train import (
    CesistaStepParams,
    TrainConfig,
    TrainState,
    loss,
    train,
    train_cesista,
)
from .densemat import (
    FlopsCounter,
    Matrix,
    SvdResult,
    axpy_scale,
    frobenius_norm,
    jacobi_svd,
    matmul,
    read_matrix,
    transpose,
    write_matrix,
)
from .errors import (
    DegenerateInputError,
    OracleConvergenceError,
    ParseError,
    ShapeError,
    TrainingDivergedError,
)
from .ortho import (
    MethodKind,
    MethodSpec,
    OrthoResult,
    Scaling,
    cesista_ns,
    muon_ns,
    original_ns,
    orthogonalize,
    preprocess,
    unso,
)
from .scalarpoly import (
    BRule,
    CoefficientSet,
    constraint_residual,
    derive_b,
    eval_f,
    eval_f_gradient_wrt_a,
    read_coefficients,
    term,
    term_extreme,
    term_gradient,
    write_coefficients,
)

__all__ = [
    "BRule",
    "CesistaStepParams",
    "CoefficientSet",
    "DegenerateInputError",
    "FlopsCounter",
    "Matrix",
    "MethodKind",
    "MethodSpec",
    "OracleConvergenceError",
    "OrthoResult",
    "ParseError",
    "Scaling",
    "ShapeError",
    "SvdResult",
    "TrainConfig",
    "TrainState",
    "TrainingDivergedError",
    "axpy_scale",
    "cesista_ns",
    "constraint_residual",
    "derive_b",
    "eval_f",
    "eval_f_gradient_wrt_a",
    "frobenius_norm",
    "jacobi_svd",
    "loss",
    "matmul",
    "muon_ns",
    "original_ns",
    "orthogonalize",
    "preprocess",
    "read_coefficients",
    "read_matrix",
    "term",
    "term_extreme",
    "term_gradient",
    "train",
    "train_cesista",
    "transpose",
    "unso",
    "write_coefficients",
    "write_matrix",
]

__version__ = "0.1.0"
