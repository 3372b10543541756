"""Matrix orthogonalizers: the single-pass polynomial and the iterative baselines.

Pipeline: ``orthogonalize`` first reduces the input to row-wide form
(transpose when rows > cols, so Gram products stay on the short side),
rescales it so all singular values land in [0, 1], then applies the
selected kernel and restores the original orientation.

Kernels
-------
* ``unso``         one-pass evaluation of the learned polynomial via
                   repeated squaring of the projector I - X X^T; only two
                   products ever touch the long dimension, regardless of
                   the polynomial order.
* ``original_ns``  X <- 0.5 * (3I - X X^T) X, iterated.
* ``muon_ns``      the quintic step X <- aX + b(XX^T)X + c(XX^T)^2 X with
                   the fixed coefficients (3.4445, -4.7750, 2.0315).
* ``cesista_ns``   per-step (gamma, r, l) triples expanded to quintic
                   coefficients, same step structure.
* external         raw per-step (a, b, c) rows, same step structure.

FLOPs are charged through the densemat counter; the kernel count is kept
separate from the preprocessing count so benchmark totals refer to the
iteration cost alone.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .coeff_train import CesistaStepParams
from .densemat import (
    FlopsCounter,
    Matrix,
    _axpy_cost,
    axpy_scale,
    frobenius_norm,
    identity,
    jacobi_svd,
    matmul,
    transpose,
)
from .errors import DegenerateInputError, ShapeError
from .scalarpoly import CoefficientSet, derive_b, eval_f

MUON_COEFFICIENTS = (3.4445, -4.7750, 2.0315)
DEFAULT_ORIGINAL_ITERATIONS = 8
DEFAULT_MUON_ITERATIONS = 5


class Scaling(str, Enum):
    FROBENIUS_GRAM = "gram"    # A / ||A A^T||_F^(1/2)
    FROBENIUS_PLAIN = "plain"  # A / ||A||_F
    GELFAND = "gelfand"        # A / ||(A A^T)^k||_F^(1/(2k))


class MethodKind(str, Enum):
    UNSO = "unso"
    ORIGINAL_NS = "original"
    MUON_NS = "muon"
    CESISTA_NS = "cesista"
    EXTERNAL_SCHEDULE = "external"


@dataclass(frozen=True)
class MethodSpec:
    """A fully parameterized orthogonalization method."""

    kind: MethodKind
    iterations: int | None = None
    coeffs: CoefficientSet | None = None
    step_params: CesistaStepParams | None = None
    schedule: np.ndarray | None = None  # (T, 3) rows of (a, b, c), external kind
    scaling: Scaling | None = None      # None = the kind's native default
    gelfand_power: int = 2

    def __post_init__(self):
        kind = MethodKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if self.scaling is not None:
            object.__setattr__(self, "scaling", Scaling(self.scaling))
        if self.gelfand_power < 1:
            raise ValueError("gelfand_power must be >= 1")
        if kind is MethodKind.UNSO:
            if self.coeffs is None:
                raise ValueError("unso requires a CoefficientSet")
        elif kind in (MethodKind.ORIGINAL_NS, MethodKind.MUON_NS):
            its = self.iterations
            if its is None:
                its = (
                    DEFAULT_ORIGINAL_ITERATIONS
                    if kind is MethodKind.ORIGINAL_NS
                    else DEFAULT_MUON_ITERATIONS
                )
                object.__setattr__(self, "iterations", its)
            if its < 1:
                raise ValueError("iterative methods need iterations >= 1")
        elif kind is MethodKind.CESISTA_NS:
            if self.step_params is None:
                raise ValueError("cesista requires CesistaStepParams")
        else:  # EXTERNAL_SCHEDULE
            sched = np.asarray(self.schedule, dtype=np.float64) if self.schedule is not None else None
            if sched is None or sched.ndim != 2 or sched.shape[1] != 3 or sched.shape[0] < 1:
                raise ValueError("external schedule requires a (T, 3) coefficient array")
            sched = sched.copy()
            sched.setflags(write=False)
            object.__setattr__(self, "schedule", sched)

    @property
    def effective_scaling(self) -> Scaling:
        if self.scaling is not None:
            return self.scaling
        # The single-pass method is defined on the Gram-normalized input;
        # the iterative baselines traditionally normalize by ||A||_F.
        return Scaling.FROBENIUS_GRAM if self.kind is MethodKind.UNSO else Scaling.FROBENIUS_PLAIN

    def quintic_rows(self) -> np.ndarray:
        """Per-step (a, b, c) rows for the quintic-step kinds."""
        if self.kind is MethodKind.MUON_NS:
            return np.tile(np.array(MUON_COEFFICIENTS), (self.iterations, 1))
        if self.kind is MethodKind.CESISTA_NS:
            return expand_cesista_rows(self.step_params.triples)
        if self.kind is MethodKind.EXTERNAL_SCHEDULE:
            return np.asarray(self.schedule, dtype=np.float64)
        raise ValueError(f"{self.kind.value} has no quintic schedule")


@dataclass
class OrthoResult:
    y: Matrix
    flops: int                 # kernel cost; excludes preprocessing
    was_transposed: bool
    preprocess_flops: int = 0
    kernel_matmul_shapes: list[tuple[int, int, int]] = field(default_factory=list)


def preprocess(
    m: Matrix,
    scaling: Scaling,
    counter: FlopsCounter | None = None,
    gelfand_power: int = 2,
) -> tuple[Matrix, bool]:
    """Orient row-wide and rescale so every singular value is in [0, 1]."""
    if not np.any(m):
        raise DegenerateInputError("input matrix is identically zero")
    was_transposed = m.shape[0] > m.shape[1]
    a = transpose(m) if was_transposed else m

    scaling = Scaling(scaling)
    if scaling is Scaling.FROBENIUS_PLAIN:
        denom = frobenius_norm(a, counter)
    elif scaling is Scaling.FROBENIUS_GRAM:
        gram = matmul(a, transpose(a), counter)
        denom = float(np.sqrt(frobenius_norm(gram, counter)))
    else:
        gram = matmul(a, transpose(a), counter)
        power = gram
        for _ in range(gelfand_power - 1):
            power = matmul(power, gram, counter)
        denom = frobenius_norm(power, counter) ** (1.0 / (2.0 * gelfand_power))
    if not np.isfinite(denom) or denom <= 0.0:
        raise DegenerateInputError("scaling denominator is not a positive finite number")

    x = axpy_scale(1.0 / denom, a, 0.0, a, counter)
    return x, was_transposed


def unso(
    x: Matrix,
    coeffs: CoefficientSet,
    counter: FlopsCounter | None = None,
    debug: bool = False,
) -> Matrix:
    """Single-pass polynomial orthogonalization of a row-wide input.

    Expects singular values already inside [0, 1]. Builds the projector
    powers (I - X X^T)^(2^(k-1)) by successive squaring, aggregates them
    with the learned coefficients plus the derived final one, and applies
    the aggregate to X. Only the initial Gram product and the final
    application touch the long dimension.
    """
    h, w = x.shape
    if h > w:
        raise ShapeError(f"kernel expects rows <= cols, got {h}x{w}")
    if debug:
        top = float(jacobi_svd(x).s[0]) if h <= 256 else float(np.linalg.norm(x, 2))
        if top > 1.0 + 1e-9:
            warnings.warn(
                f"input has a singular value {top:.6g} above 1; result may be inaccurate",
                RuntimeWarning,
                stacklevel=2,
            )

    c = derive_b(coeffs)
    gram = matmul(x, transpose(x), counter)
    xk = axpy_scale(1.0, identity(h), -1.0, gram, counter)  # projector I - X X^T
    y = identity(h)
    for k in range(1, coeffs.order):
        y = axpy_scale(1.0, y, float(coeffs.a[k - 1]), xk, counter)
        xk = matmul(xk, xk, counter)
    y = axpy_scale(1.0, y, c, xk, counter)
    return matmul(y, x, counter)


def original_ns(x: Matrix, iterations: int, counter: FlopsCounter | None = None) -> Matrix:
    """Classic cubic iteration X <- 0.5 * (3I - X X^T) X on the short side."""
    h, w = x.shape
    if h > w:
        raise ShapeError(f"kernel expects rows <= cols, got {h}x{w}")
    eye = identity(h)
    for _ in range(iterations):
        gram = matmul(x, transpose(x), counter)
        lhs = axpy_scale(3.0, eye, -1.0, gram, counter)
        x = axpy_scale(0.5, matmul(lhs, x, counter), 0.0, x, counter)
    return x


def _quintic_steps(x: Matrix, rows: np.ndarray, counter: FlopsCounter | None) -> Matrix:
    h, w = x.shape
    if h > w:
        raise ShapeError(f"kernel expects rows <= cols, got {h}x{w}")
    for a_c, b_c, c_c in rows:
        gram = matmul(x, transpose(x), counter)
        p1 = matmul(gram, x, counter)
        p2 = matmul(gram, p1, counter)
        x = axpy_scale(float(a_c), x, float(b_c), p1, counter)
        x = axpy_scale(1.0, x, float(c_c), p2, counter)
    return x


def muon_ns(x: Matrix, iterations: int, counter: FlopsCounter | None = None) -> Matrix:
    """Fixed-coefficient quintic iteration."""
    rows = np.tile(np.array(MUON_COEFFICIENTS), (iterations, 1))
    return _quintic_steps(x, rows, counter)


def expand_cesista_rows(triples: np.ndarray) -> np.ndarray:
    """(gamma, r, l) -> quintic (a, b, c): the step
    y + gamma*y*(y^2-(1+r)^2)*(y^2-(1-l)^2) multiplied out."""
    triples = np.asarray(triples, dtype=np.float64)
    p = (1.0 + triples[:, 1]) ** 2
    q = (1.0 - triples[:, 2]) ** 2
    gamma = triples[:, 0]
    return np.column_stack([1.0 + gamma * p * q, -gamma * (p + q), gamma])


def cesista_ns(
    x: Matrix,
    step_params: CesistaStepParams,
    counter: FlopsCounter | None = None,
) -> Matrix:
    """Per-step reparameterized quintic iteration."""
    return _quintic_steps(x, expand_cesista_rows(step_params.triples), counter)


def _run_kernel(x: Matrix, spec: MethodSpec, counter: FlopsCounter) -> Matrix:
    if spec.kind is MethodKind.UNSO:
        return unso(x, spec.coeffs, counter)
    if spec.kind is MethodKind.ORIGINAL_NS:
        return original_ns(x, spec.iterations, counter)
    return _quintic_steps(x, spec.quintic_rows(), counter)


def orthogonalize(m: Matrix, spec: MethodSpec) -> OrthoResult:
    """preprocess -> kernel -> restore orientation, with split FLOPs scopes."""
    pre_counter = FlopsCounter()
    kernel_counter = FlopsCounter()
    x, was_transposed = preprocess(
        m, spec.effective_scaling, pre_counter, spec.gelfand_power
    )
    y = _run_kernel(x, spec, kernel_counter)
    if was_transposed:
        y = transpose(y)
    return OrthoResult(
        y=y,
        flops=kernel_counter.total,
        was_transposed=was_transposed,
        preprocess_flops=pre_counter.total,
        kernel_matmul_shapes=kernel_counter.matmul_shapes,
    )


def scalar_map(spec: MethodSpec):
    """The composed scalar map the kernel applies to each singular value."""
    if spec.kind is MethodKind.UNSO:
        coeffs = spec.coeffs
        return lambda x: eval_f(coeffs, x)
    if spec.kind is MethodKind.ORIGINAL_NS:
        iterations = spec.iterations

        def cubic_chain(x):
            y = np.asarray(x, dtype=np.float64) * 1.0 if not np.isscalar(x) else x
            for _ in range(iterations):
                y = 0.5 * y * (3.0 - y * y)
            return y

        return cubic_chain
    rows = spec.quintic_rows()

    def quintic_chain(x):
        y = np.asarray(x, dtype=np.float64) * 1.0 if not np.isscalar(x) else x
        for a_c, b_c, c_c in rows:
            yy = y * y
            y = y * (a_c + b_c * yy + c_c * yy * yy)
        return y

    return quintic_chain


def kernel_model_flops(h: int, w: int, spec: MethodSpec) -> int:
    """Closed-form kernel FLOPs; must equal the measured counter exactly."""
    hh = h * h
    if spec.kind is MethodKind.UNSO:
        coeffs = spec.coeffs
        total = 2 * hh * w                       # X X^T
        total += _axpy_cost(1.0, -1.0, hh)       # I - gram
        total += (coeffs.order - 1) * 2 * hh * h  # projector squarings
        for a_k in coeffs.a:
            total += _axpy_cost(1.0, float(a_k), hh)
        total += _axpy_cost(1.0, derive_b(coeffs), hh)
        total += 2 * hh * w                      # aggregate applied to X
        return total
    if spec.kind is MethodKind.ORIGINAL_NS:
        per_iter = 2 * hh * w + _axpy_cost(3.0, -1.0, hh) + 2 * hh * w
        per_iter += _axpy_cost(0.5, 0.0, h * w)
        return spec.iterations * per_iter
    total = 0
    for a_c, b_c, c_c in spec.quintic_rows():
        total += 3 * (2 * hh * w)
        total += _axpy_cost(float(a_c), float(b_c), h * w)
        total += _axpy_cost(1.0, float(c_c), h * w)
    return total
