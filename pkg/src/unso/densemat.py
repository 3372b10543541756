"""Dense float64 matrices with an explicit FLOPs accounting channel.

Matrices are plain 2-D ``numpy`` arrays of float64. Every arithmetic
operation takes an optional :class:`FlopsCounter` and charges it with the
analytic operation count of the computation it performs:

* ``matmul``          2*m*k*n (multiply + add fused as two ops)
* ``axpy_scale``      1 op per elementwise scale, 1 per elementwise add;
                      degenerate coefficients (alpha=1, beta in {0, 1})
                      are charged only for the work actually done
* ``frobenius_norm``  2 ops per entry (square + accumulate)
* ``transpose``       free

The counter also records the (m, k, n) triple of every product so tests
can audit which products touch the long dimension of a rectangular input.

A small one-sided Jacobi SVD is included as a verification oracle. It is
meant for test-scale matrices (<= 256 rows) and is never used on the
production path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OracleConvergenceError, ParseError, ShapeError

Matrix = np.ndarray


@dataclass
class FlopsCounter:
    """Accumulates floating-point operation counts for one measurement."""

    total: int = 0
    matmul_shapes: list[tuple[int, int, int]] = field(default_factory=list)

    def add(self, count: int) -> None:
        if count < 0:
            raise ValueError(f"negative FLOPs increment: {count}")
        self.total += int(count)

    def record_matmul(self, m: int, k: int, n: int) -> None:
        self.matmul_shapes.append((m, k, n))
        self.add(2 * m * k * n)

    def reset(self) -> None:
        self.total = 0
        self.matmul_shapes.clear()


def as_matrix(data) -> Matrix:
    """Coerce to a 2-D float64 array, validating shape and finiteness."""
    a = np.asarray(data, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError(f"matrix dimensions must be positive, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return a


def zeros(rows: int, cols: int) -> Matrix:
    return np.zeros((rows, cols), dtype=np.float64)


def identity(n: int) -> Matrix:
    return np.eye(n, dtype=np.float64)


def matmul(a: Matrix, b: Matrix, counter: FlopsCounter | None = None) -> Matrix:
    """Product a @ b, charged as 2*m*k*n FLOPs."""
    m, k = a.shape
    k2, n = b.shape
    if k != k2:
        raise ShapeError(f"matmul shape mismatch: ({m},{k}) @ ({k2},{n})")
    if counter is not None:
        counter.record_matmul(m, k, n)
    return a @ b


def transpose(a: Matrix) -> Matrix:
    return np.ascontiguousarray(a.T)


def _axpy_cost(alpha: float, beta: float, n_entries: int) -> int:
    # alpha scaling, beta scaling, and the add are each 1 op per entry;
    # unit/zero coefficients skip the work they don't need.
    cost = 0
    if alpha != 1.0:
        cost += n_entries
    if beta != 0.0:
        if beta != 1.0:
            cost += n_entries
        cost += n_entries
    return cost


def axpy_scale(
    alpha: float,
    a: Matrix,
    beta: float,
    b: Matrix,
    counter: FlopsCounter | None = None,
) -> Matrix:
    """Elementwise alpha*a + beta*b.

    With beta = 0 the result is a copy of alpha*a (b's values are ignored
    but must still match a's shape).
    """
    if a.shape != b.shape:
        raise ShapeError(f"axpy_scale shape mismatch: {a.shape} vs {b.shape}")
    if counter is not None:
        counter.add(_axpy_cost(alpha, beta, a.size))
    if beta == 0.0:
        return alpha * a if alpha != 1.0 else a.copy()
    return alpha * a + beta * b


def frobenius_norm(a: Matrix, counter: FlopsCounter | None = None) -> float:
    """sqrt of the sum of squared entries, charged as 2 ops per entry."""
    if counter is not None:
        counter.add(2 * a.size)
    return float(np.sqrt(np.sum(a * a)))


@dataclass
class SvdResult:
    """Thin SVD a = u @ diag(s) @ v.T for a row-wide input (h x w, h <= w).

    u is h x h orthogonal, s holds the h singular values in descending
    order, v is w x h with orthonormal columns.
    """

    u: Matrix
    s: np.ndarray
    v: Matrix


_JACOBI_REL_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 60


def jacobi_svd(a: Matrix) -> SvdResult:
    """One-sided Jacobi SVD, used only as a test/verification oracle.

    Requires rows <= cols and rows <= 256. Rotates column pairs of a.T
    until every off-diagonal Gram entry is below 1e-12 relative to the
    corresponding diagonal entries.
    """
    h, w = a.shape
    if h > w:
        raise ShapeError(f"jacobi_svd expects rows <= cols, got {h}x{w}")
    if h > 256:
        raise ShapeError(f"jacobi_svd is an oracle for rows <= 256, got {h}")

    b = np.array(a.T, dtype=np.float64)  # w x h, tall; orthogonalize columns
    v = np.eye(h, dtype=np.float64)

    for _ in range(_JACOBI_MAX_SWEEPS):
        converged = True
        for p in range(h - 1):
            for q in range(p + 1, h):
                bp = b[:, p]
                bq = b[:, q]
                app = float(bp @ bp)
                aqq = float(bq @ bq)
                apq = float(bp @ bq)
                if abs(apq) <= _JACOBI_REL_TOL * np.sqrt(app * aqq):
                    continue
                converged = False
                zeta = (aqq - app) / (2.0 * apq)
                t = np.sign(zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                if zeta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                b[:, [p, q]] = b[:, [p, q]] @ rot
                v[:, [p, q]] = v[:, [p, q]] @ rot
        if converged:
            break
    else:
        raise OracleConvergenceError(
            f"one-sided Jacobi did not converge in {_JACOBI_MAX_SWEEPS} sweeps"
        )

    sigma = np.sqrt(np.sum(b * b, axis=0))
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    b = b[:, order]
    v = v[:, order]

    left = np.zeros_like(b)
    for j in range(h):
        if sigma[j] > 1e-300:
            left[:, j] = b[:, j] / sigma[j]
        else:
            left[j % w, j] = 1.0  # rank-deficient column; basis filler

    # a = b.T = v @ diag(sigma) @ left.T
    return SvdResult(u=v, s=sigma, v=left)


def write_matrix(path, a: Matrix) -> None:
    """Text format: "<rows> <cols>" then one line of entries per row."""
    rows, cols = a.shape
    lines = [f"{rows} {cols}"]
    for i in range(rows):
        lines.append(" ".join(f"{x:.17g}" for x in a[i]))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_matrix(path) -> Matrix:
    with open(path) as fh:
        raw = fh.read().split("\n")
    lines = [ln for ln in (s.strip() for s in raw) if ln]
    if not lines:
        raise ParseError(f"{path}: empty matrix file")
    head = lines[0].split()
    if len(head) != 2:
        raise ParseError(f"{path}: header must be '<rows> <cols>'")
    try:
        rows, cols = int(head[0]), int(head[1])
    except ValueError as exc:
        raise ParseError(f"{path}: non-integer dimensions in header") from exc
    if rows < 1 or cols < 1:
        raise ParseError(f"{path}: dimensions must be positive, got {rows}x{cols}")
    if len(lines) - 1 != rows:
        raise ParseError(f"{path}: expected {rows} data rows, found {len(lines) - 1}")
    data = np.empty((rows, cols), dtype=np.float64)
    for i, line in enumerate(lines[1:]):
        parts = line.split()
        if len(parts) != cols:
            raise ParseError(f"{path}: row {i} has {len(parts)} entries, expected {cols}")
        try:
            data[i] = [float(p) for p in parts]
        except ValueError as exc:
            raise ParseError(f"{path}: row {i} has a non-numeric entry") from exc
    if not np.all(np.isfinite(data)):
        raise ParseError(f"{path}: matrix contains non-finite entries")
    return data
