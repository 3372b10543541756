"""Error/FLOPs benchmark harness and curve sampling.

``run_table`` crosses shapes x methods x seeds: draw a Gaussian test
matrix, orthogonalize, score with the short-side Gram error
||Y Y^T - I||_F, and report the per-method mean error plus the kernel
FLOPs (which are seed-independent by construction).

``sample_curves`` evaluates each method's composed scalar map on a dense
grid; ``sample_term_curves`` plots the individual term shapes
x * (1 - x^2)^(n_k) for a linear or exponential exponent ladder together
with the locus of their interior maxima.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import rng
from .densemat import Matrix, transpose
from .errors import ShapeError
from .ortho import MethodSpec, orthogonalize, scalar_map

DEFAULT_SEEDS = tuple(range(10))
DEFAULT_CURVE_GRID = 2000
CURVE_GRID_LOW = 0.0005


@dataclass
class BenchReport:
    method: str
    rows: int
    cols: int
    seeds: tuple[int, ...]
    errors: list[float]
    error_mean: float
    flops: int


@dataclass
class CurveTable:
    grid: np.ndarray
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        if self.grid.ndim != 1 or self.grid.size < 2:
            raise ValueError("grid must be a 1-D array with at least 2 points")
        if not np.all(np.diff(self.grid) > 0):
            raise ValueError("grid must be strictly increasing")
        for name, col in self.columns.items():
            if np.asarray(col).shape != self.grid.shape:
                raise ValueError(f"column {name!r} length differs from grid")

    def add_column(self, name: str, values) -> None:
        values = np.asarray(values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise ValueError(f"column {name!r} length differs from grid")
        self.columns[name] = values


def gaussian_matrix(rows: int, cols: int, seed: int) -> Matrix:
    """I.i.d. standard normal test matrix, deterministic per (rows, cols, seed)."""
    if rows < 1 or cols < 1:
        raise ValueError(f"dimensions must be positive, got {rows}x{cols}")
    return rng.normals(seed, 0, rows * cols).reshape(rows, cols)


def ortho_error(y: Matrix) -> float:
    """||Y Y^T - I||_F for a row-wide Y; the orthogonality quality score."""
    h, w = y.shape
    if h > w:
        raise ShapeError(f"ortho_error expects rows <= cols, got {h}x{w}")
    gram = y @ y.T
    return float(np.linalg.norm(gram - np.eye(h)))


def ortho_error_any(y: Matrix) -> float:
    """ortho_error after orienting y short-side, for pipeline outputs."""
    return ortho_error(y if y.shape[0] <= y.shape[1] else transpose(y))


def run_table(
    shapes: list[tuple[int, int]],
    methods: list[tuple[str, MethodSpec]],
    seeds=DEFAULT_SEEDS,
) -> list[BenchReport]:
    """Full cross product; errors averaged over seeds, FLOPs checked constant."""
    if not shapes or not methods or not len(seeds):
        raise ValueError("shapes, methods, and seeds must be non-empty")
    reports = []
    for label, spec in methods:
        for rows, cols in shapes:
            errors = []
            flops = None
            for seed in seeds:
                m = gaussian_matrix(rows, cols, seed)
                result = orthogonalize(m, spec)
                errors.append(ortho_error_any(result.y))
                if flops is None:
                    flops = result.flops
                elif flops != result.flops:
                    raise AssertionError(
                        f"kernel FLOPs varied across seeds for {label} at {rows}x{cols}"
                    )
            reports.append(
                BenchReport(
                    method=label,
                    rows=rows,
                    cols=cols,
                    seeds=tuple(seeds),
                    errors=errors,
                    error_mean=float(np.mean(errors)),
                    flops=flops,
                )
            )
    return reports


def report_csv(reports: list[BenchReport]) -> str:
    lines = ["method,rows,cols,error_mean,flops"]
    for r in reports:
        lines.append(f"{r.method},{r.rows},{r.cols},{r.error_mean:.10g},{r.flops}")
    return "\n".join(lines) + "\n"


def sample_curves(
    methods: list[tuple[str, MethodSpec]],
    grid_size: int = DEFAULT_CURVE_GRID,
) -> CurveTable:
    """Composed scalar map of each method on a uniform grid of (0, 1]."""
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    grid = np.linspace(CURVE_GRID_LOW, 1.0, grid_size)
    table = CurveTable(grid)
    for label, spec in methods:
        table.add_column(label, scalar_map(spec)(grid))
    return table


class Growth(str, Enum):
    LINEAR = "linear"
    EXPONENTIAL = "exponential"


def term_exponent(k: int, growth: Growth) -> int:
    return k if growth is Growth.LINEAR else 2 ** (k - 1)


def sample_term_curves(
    n: int,
    growth: Growth,
    grid_size: int = DEFAULT_CURVE_GRID,
) -> tuple[CurveTable, list[tuple[int, float, float]]]:
    """Term-shape columns x*(1-x^2)^(n_k) for k = 0..n plus, for k >= 1,
    the (x*, y*) locus of each term's interior maximum."""
    if n < 1:
        raise ValueError("need n >= 1")
    grid = np.linspace(0.0, 1.0, grid_size)
    table = CurveTable(grid)
    table.add_column("k=0", grid.copy())
    extremes = []
    base = 1.0 - grid * grid
    for k in range(1, n + 1):
        exponent = term_exponent(k, Growth(growth))
        table.add_column(f"k={k}", grid * base**exponent)
        x_star = 1.0 / np.sqrt(2.0 * exponent + 1.0)
        y_star = x_star * (2.0 * exponent / (2.0 * exponent + 1.0)) ** exponent
        extremes.append((k, float(x_star), float(y_star)))
    return table, extremes


def curve_csv(table: CurveTable) -> str:
    names = list(table.columns)
    lines = ["x," + ",".join(names)]
    for i, x in enumerate(table.grid):
        row = [f"{x:.10g}"] + [f"{table.columns[name][i]:.10g}" for name in names]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
