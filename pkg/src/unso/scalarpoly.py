"""The scalar polynomial that drives the single-pass orthogonalizer.

The map acting on each singular value x in [0, 1] is

    f(x) = x + sum_{k=1}^{N-1} a_k * x*(1-x^2)^(2^(k-1))
             + b * x*(1-x^2)^(2^(N-1))

where the a_k are learnable and the final coefficient b is derived from
the boundary constraint f(x_N) = 1 at x_N = 1/sqrt(2^N + 1), the point
where the last term peaks. Three derivation rules are supported:

* ``exact``       solve the constraint exactly,
* ``approx-sum``  large-N closed form  e^(1/2)*(2^(N/2)-1) - sum(a_k),
* ``approx-abs``  same closed form with sum(|a_k|) instead.

Every function accepts scalars or numpy arrays for x and evaluates the
high powers (1-x^2)^(2^(k-1)) by repeated squaring (k-1 squarings).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ParseError


class BRule(str, Enum):
    """How the final coefficient is derived from the learnable ones."""

    EXACT = "exact"
    APPROX_SUM = "approx-sum"
    APPROX_ABS = "approx-abs"


@dataclass(frozen=True)
class CoefficientSet:
    """Order-N coefficient vector: N-1 learnable terms plus the rule for b."""

    order: int
    a: np.ndarray = field(default=None)  # type: ignore[assignment]
    b_rule: BRule = BRule.EXACT

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"order must be >= 1, got {self.order}")
        a = np.zeros(self.order - 1) if self.a is None else np.asarray(self.a, dtype=np.float64)
        if a.shape != (self.order - 1,):
            raise ValueError(f"expected {self.order - 1} learnable coefficients, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("coefficients must be finite")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b_rule", BRule(self.b_rule))

    def with_a(self, a: np.ndarray) -> "CoefficientSet":
        return CoefficientSet(self.order, a, self.b_rule)


def term(k: int, x):
    """k-th term function: x for k=0, else x*(1-x^2)^(2^(k-1))."""
    if k < 0:
        raise ValueError(f"term index must be >= 0, got {k}")
    x = np.asarray(x, dtype=np.float64) if not np.isscalar(x) else x
    if k == 0:
        return x * 1.0
    p = 1.0 - x * x
    for _ in range(k - 1):
        p = p * p
    return x * p


def term_gradient(k: int, x):
    """d/dx of the k-th term: 1 for k=0, else (1-x^2)^(2^(k-1)-1) * (1 - (2^k+1)x^2)."""
    if k < 0:
        raise ValueError(f"term index must be >= 0, got {k}")
    if k == 0:
        return np.ones_like(x, dtype=np.float64) if not np.isscalar(x) else 1.0
    # (1-x^2)^(2^(k-1)-1) via the binary expansion 2^(k-1)-1 = 2^(k-2)+...+2+1
    p = 1.0 - x * x
    acc = np.ones_like(p) if not np.isscalar(p) else 1.0
    for _ in range(k - 1):
        acc = acc * p
        p = p * p
    return acc * (1.0 - (2.0**k + 1.0) * (x * x))


def term_extreme(k: int) -> tuple[float, float]:
    """Interior maximum of the k-th term (k >= 1): location and exact value."""
    if k < 1:
        raise ValueError(f"term_extreme requires k >= 1, got {k}")
    two_k = 2.0**k
    x_star = 1.0 / math.sqrt(two_k + 1.0)
    y_star = x_star * (two_k / (two_k + 1.0)) ** (2.0 ** (k - 1))
    return x_star, y_star


def constraint_point(order: int) -> float:
    """The x at which f is pinned to 1: the last term's peak location."""
    return 1.0 / math.sqrt(2.0**order + 1.0)


def _exact_b_parts(order: int) -> tuple[np.ndarray, float]:
    """Per-coefficient weights q_k = (2^N/(2^N+1))^(2^(k-1)) and the
    amplification Q = ((2^N+1)/2^N)^(2^(N-1)) of the exact solve."""
    two_n = 2.0**order
    ratio = two_n / (two_n + 1.0)
    q = np.array([ratio ** (2.0 ** (k - 1)) for k in range(1, order)])
    big_q = (1.0 / ratio) ** (2.0 ** (order - 1))
    return q, big_q


def derive_b(coeffs: CoefficientSet) -> float:
    """Final coefficient under the set's rule; always finite for finite a."""
    n = coeffs.order
    a = coeffs.a
    if coeffs.b_rule is BRule.EXACT:
        q, big_q = _exact_b_parts(n)
        return float((math.sqrt(2.0**n + 1.0) - 1.0 - float(a @ q)) * big_q)
    base = math.exp(0.5) * (2.0 ** (n / 2.0) - 1.0)
    if coeffs.b_rule is BRule.APPROX_SUM:
        return float(base - float(np.sum(a)))
    return float(base - float(np.sum(np.abs(a))))


def eval_f(coeffs: CoefficientSet, x):
    """Evaluate f at x (scalar or array), deriving b from the rule."""
    b = derive_b(coeffs)
    acc = term(0, x)
    p = 1.0 - x * x  # tracks (1-x^2)^(2^(k-1)) across terms
    for k in range(1, coeffs.order):
        acc = acc + coeffs.a[k - 1] * (x * p)
        p = p * p
    return acc + b * (x * p)


def constraint_residual(coeffs: CoefficientSet) -> float:
    """f at the pinned point minus 1; zero (to rounding) under the exact rule."""
    return float(eval_f(coeffs, constraint_point(coeffs.order))) - 1.0


def db_da(coeffs: CoefficientSet) -> np.ndarray:
    """Derivative of the derived b with respect to each a_k.

    exact       -q_k * Q
    approx-sum  -1
    approx-abs  -sign(a_k), with the subgradient at 0 taken as 0
    """
    n = coeffs.order
    if coeffs.b_rule is BRule.EXACT:
        q, big_q = _exact_b_parts(n)
        return -q * big_q
    if coeffs.b_rule is BRule.APPROX_SUM:
        return -np.ones(n - 1)
    return -np.sign(coeffs.a)


def eval_f_gradient_wrt_a(coeffs: CoefficientSet, x):
    """Gradient of f(x) in the learnable coefficients.

    df/da_k = term(k, x) + (db/da_k) * term(N, x). For scalar x the
    result has shape (N-1,); for an array x, shape (N-1,) + x.shape.
    """
    n = coeffs.order
    sens = db_da(coeffs)
    p = 1.0 - x * x
    terms = []
    for _ in range(1, n):
        terms.append(x * p)
        p = p * p
    last = x * p  # term(N, x)
    if np.isscalar(x):
        return np.array([terms[k] + sens[k] * last for k in range(n - 1)])
    return np.stack([terms[k] + sens[k] * last for k in range(n - 1)])


def write_coefficients(path, coeffs: CoefficientSet) -> None:
    """Text format: "N <rule>" then one learnable coefficient per line.

    b is never stored; it is re-derived on load.
    """
    lines = [f"{coeffs.order} {coeffs.b_rule.value}"]
    lines.extend(f"{v:.17g}" for v in coeffs.a)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_coefficients(path) -> CoefficientSet:
    with open(path) as fh:
        lines = [ln for ln in (s.strip() for s in fh.read().split("\n")) if ln]
    if not lines:
        raise ParseError(f"{path}: empty coefficient file")
    head = lines[0].split()
    if len(head) != 2:
        raise ParseError(f"{path}: header must be '<order> <b-rule>'")
    try:
        order = int(head[0])
    except ValueError as exc:
        raise ParseError(f"{path}: non-integer order") from exc
    try:
        rule = BRule(head[1])
    except ValueError as exc:
        names = ", ".join(r.value for r in BRule)
        raise ParseError(f"{path}: unknown b-rule {head[1]!r} (expected one of {names})") from exc
    if len(lines) - 1 != order - 1:
        raise ParseError(f"{path}: expected {order - 1} coefficients, found {len(lines) - 1}")
    try:
        a = np.array([float(v) for v in lines[1:]], dtype=np.float64)
    except ValueError as exc:
        raise ParseError(f"{path}: non-numeric coefficient") from exc
    try:
        return CoefficientSet(order, a, rule)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
