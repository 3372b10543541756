"""Fits the learnable polynomial coefficients against the sign target.

The objective is the mean squared deviation of f from 1 over points
sampled uniformly from an open interval inside (0, 1); fresh samples are
drawn every step from a counter-based stream, so a (config, seed) pair
fully determines the run. Updates use Adam (beta1=0.9, beta2=0.999,
eps=1e-8) with a step-decay learning-rate schedule.

The same harness trains per-step (gamma, r, l) schedules for the
reparameterized quintic iteration; there the gradient is taken by
central finite differences through the composed map.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import ParseError, TrainingDivergedError
from .scalarpoly import BRule, CoefficientSet, eval_f, eval_f_gradient_wrt_a

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    n: int = 14
    b_rule: BRule = BRule.EXACT
    learning_rate: float = 1e-1
    decay_factor: float = 0.5
    decay_every: int = 10000
    epochs: int = 20000
    samples_per_step: int = 1000
    sample_low: float = 0.0
    sample_high: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0.0 < self.decay_factor <= 1.0):
            raise ValueError("decay_factor must be in (0, 1]")
        if not (0.0 <= self.sample_low < self.sample_high <= 1.0):
            raise ValueError("need 0 <= sample_low < sample_high <= 1")
        if self.decay_every < 1:
            raise ValueError("decay_every must be >= 1")
        if self.epochs < 0 or self.samples_per_step < 1:
            raise ValueError("epochs must be >= 0 and samples_per_step >= 1")

    def lr_at(self, step: int) -> float:
        return self.learning_rate * self.decay_factor ** (step // self.decay_every)


@dataclass
class TrainState:
    coeffs: CoefficientSet
    m: np.ndarray
    v: np.ndarray
    step: int
    current_lr: float
    loss_history: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class CesistaStepParams:
    """Per-step (gamma, r, l) triples for the reparameterized quintic."""

    triples: np.ndarray  # (T, 3)

    def __post_init__(self):
        t = np.asarray(self.triples, dtype=np.float64)
        if t.ndim != 2 or t.shape[1] != 3 or t.shape[0] < 1:
            raise ValueError(f"expected a (T, 3) array with T >= 1, got {t.shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("step parameters must be finite")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "triples", t)

    @property
    def steps(self) -> int:
        return self.triples.shape[0]


def loss(coeffs: CoefficientSet, xs) -> float:
    """Mean of (f(x) - 1)^2 over the sample points."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size == 0:
        raise ValueError("empty sample vector")
    resid = eval_f(coeffs, xs) - 1.0
    return float(np.mean(resid * resid))


def _adam_update(theta, grad, m, v, step_index, lr):
    m = ADAM_BETA1 * m + (1.0 - ADAM_BETA1) * grad
    v = ADAM_BETA2 * v + (1.0 - ADAM_BETA2) * grad * grad
    t = step_index + 1
    m_hat = m / (1.0 - ADAM_BETA1**t)
    v_hat = v / (1.0 - ADAM_BETA2**t)
    theta = theta - lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
    return theta, m, v


def train(config: TrainConfig) -> TrainState:
    """Run the Adam loop; deterministic given the config (incl. seed).

    Coefficients start at a_k = 1. Raises TrainingDivergedError (with the
    last finite state attached) if the loss leaves the finite range.
    """
    n_learn = config.n - 1
    a = np.ones(n_learn)
    m = np.zeros(n_learn)
    v = np.zeros(n_learn)
    history: list[float] = []

    coeffs = CoefficientSet(config.n, a, config.b_rule)
    for step in range(config.epochs):
        xs = rng.uniforms_in(
            config.seed,
            step * config.samples_per_step,
            config.samples_per_step,
            config.sample_low,
            config.sample_high,
        )
        with np.errstate(over="ignore"):  # the guard below owns overflow
            resid = eval_f(coeffs, xs) - 1.0
            loss_val = float(np.mean(resid * resid))
        if not np.isfinite(loss_val):
            state = TrainState(coeffs, m, v, step, config.lr_at(step), history)
            raise TrainingDivergedError(f"non-finite loss at step {step}", state)
        history.append(loss_val)

        grad_f = eval_f_gradient_wrt_a(coeffs, xs)  # (n-1, samples)
        grad = np.mean(2.0 * resid * grad_f, axis=1)
        a, m, v = _adam_update(a, grad, m, v, step, config.lr_at(step))
        coeffs = coeffs.with_a(a)

    return TrainState(coeffs, m, v, config.epochs, config.lr_at(config.epochs), history)


def compose_quintic_steps(triples: np.ndarray, x):
    """Apply the reparameterized quintic steps in sequence to x.

    Each step maps y -> y + gamma * y * (y^2 - (1+r)^2) * (y^2 - (1-l)^2).
    """
    y = np.asarray(x, dtype=np.float64) * 1.0 if not np.isscalar(x) else x
    for gamma, r, l in np.asarray(triples, dtype=np.float64):
        p = (1.0 + r) ** 2
        q = (1.0 - l) ** 2
        yy = y * y
        y = y + gamma * y * (yy - p) * (yy - q)
    return y


def _schedule_loss(triples, xs) -> float:
    with np.errstate(over="ignore"):  # divergence guard in the caller
        resid = compose_quintic_steps(triples, xs) - 1.0
        return float(np.mean(resid * resid))


# (gamma, r, l) whose expanded quintic equals the fixed coefficient triple
# (3.4445, -4.7750, 2.0315); a stable starting point for schedule training.
QUINTIC_EQUIV_INIT = (2.0315, 0.2637290672983769, 0.13197420234446866)


def train_cesista(
    t_steps: int,
    config: TrainConfig,
    init: np.ndarray | None = None,
) -> CesistaStepParams:
    """Fit T per-step (gamma, r, l) triples with the same Adam machinery.

    Gradients come from central finite differences of the composed-map
    loss. By default every step starts at the triple equivalent to the
    fixed quintic coefficients; an identity start (all zeros) or any
    other (T, 3) array may be passed instead. config.n and config.b_rule
    are ignored here.
    """
    if t_steps < 1:
        raise ValueError(f"need at least one step, got {t_steps}")
    if init is None:
        theta = np.tile(np.array(QUINTIC_EQUIV_INIT), t_steps)
    else:
        init = np.asarray(init, dtype=np.float64)
        if init.shape != (t_steps, 3):
            raise ValueError(f"init must have shape ({t_steps}, 3), got {init.shape}")
        theta = init.reshape(-1).copy()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)

    for step in range(config.epochs):
        xs = rng.uniforms_in(
            config.seed,
            step * config.samples_per_step,
            config.samples_per_step,
            config.sample_low,
            config.sample_high,
        )
        base = _schedule_loss(theta.reshape(-1, 3), xs)
        if not np.isfinite(base):
            raise TrainingDivergedError(f"non-finite loss at step {step}")
        grad = np.empty_like(theta)
        for i in range(theta.size):
            eps = 1e-6 * max(1.0, abs(theta[i]))
            probe = theta.copy()
            probe[i] = theta[i] + eps
            hi = _schedule_loss(probe.reshape(-1, 3), xs)
            probe[i] = theta[i] - eps
            lo = _schedule_loss(probe.reshape(-1, 3), xs)
            grad[i] = (hi - lo) / (2.0 * eps)
        theta, m, v = _adam_update(theta, grad, m, v, step, config.lr_at(step))

    return CesistaStepParams(theta.reshape(-1, 3))


def write_loss_history(path, config: TrainConfig, history) -> None:
    """CSV of (step, lr, loss) rows, one per training step."""
    lines = ["step,lr,loss"]
    for step, value in enumerate(history):
        lines.append(f"{step},{config.lr_at(step):.10g},{value:.10g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_step_triples(path, triples: np.ndarray) -> None:
    """Schedule file: one "x y z" line per step, 17 significant digits."""
    t = np.asarray(triples, dtype=np.float64)
    if t.ndim != 2 or t.shape[1] != 3:
        raise ValueError(f"expected a (T, 3) array, got {t.shape}")
    with open(path, "w") as fh:
        for row in t:
            fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def read_step_triples(path) -> np.ndarray:
    with open(path) as fh:
        lines = [ln for ln in (s.strip() for s in fh.read().split("\n")) if ln]
    if not lines:
        raise ParseError(f"{path}: empty schedule file")
    rows = []
    for i, line in enumerate(lines):
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"{path}: line {i + 1} must hold exactly 3 values")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ParseError(f"{path}: line {i + 1} has a non-numeric value") from exc
    out = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(out)):
        raise ParseError(f"{path}: schedule contains non-finite values")
    return out
