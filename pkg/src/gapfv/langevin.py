"""Discretized Langevin sampler and the Langevin functional variance.

Update rule per step, for a loss gradient grad and inverse temperature
kappa_n = n / sigma0^2:

    gamma <- gamma - 0.25 * step * kappa_n * grad + sqrt(step) * e,   e ~ N(0, I)

The chain stores only the n-vector of model predictions per retained step;
parameter trajectories are never kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .estimators import fv_mc

__all__ = [
    "DivergenceError",
    "LangevinConfig",
    "PredictionTrace",
    "langevin_step",
    "run_chain",
    "lfv",
]

# noise draws are buffered in blocks of this many steps; the generator
# fills values in sequence, so block size never changes the trajectory
_NOISE_BLOCK = 8192


class DivergenceError(RuntimeError):
    """A chain or optimizer produced a non-finite state."""

    def __init__(self, step: int, what: str = "state"):
        super().__init__(f"non-finite {what} at step {step}")
        self.step = step


@dataclass(frozen=True)
class LangevinConfig:
    step: float
    kappa_n: float
    steps_total: int
    burn_in_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.kappa_n > 0:
            raise ValueError("kappa_n must be positive")
        if self.steps_total < 2:
            raise ValueError("steps_total must be >= 2")
        if not 0.0 <= self.burn_in_fraction < 1.0:
            raise ValueError("burn_in_fraction must lie in [0, 1)")
        if self.retained < 2:
            raise ValueError("burn-in leaves fewer than 2 retained steps")

    @property
    def burn_steps(self) -> int:
        return int(self.burn_in_fraction * self.steps_total)

    @property
    def retained(self) -> int:
        return self.steps_total - self.burn_steps


@dataclass(frozen=True)
class PredictionTrace:
    """Per-step predictions mu[t, i] plus the data needed to score them."""

    mu: np.ndarray
    y: np.ndarray
    sigma0_sq: float

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if mu.ndim != 2 or mu.shape[0] < 2 or mu.shape[1] != y.shape[0]:
            raise ValueError("mu must be (T_kept >= 2, n) matching y")
        if not (np.isfinite(mu).all() and np.isfinite(y).all()):
            raise ValueError("trace must be finite")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "y", y)


def langevin_step(
    gamma: np.ndarray,
    grad: np.ndarray,
    config: LangevinConfig,
    rng: np.random.Generator,
    step_index: int = 0,
) -> np.ndarray:
    """One update of the discretized process; see the module formula."""
    gamma = np.asarray(gamma, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if gamma.shape != grad.shape:
        raise ValueError("gamma and grad must have the same shape")
    if not np.all(np.isfinite(grad)):
        raise DivergenceError(step_index, "gradient")
    e = rng.standard_normal(gamma.shape[0])
    return gamma - 0.25 * config.step * config.kappa_n * grad + math.sqrt(config.step) * e


def run_chain(
    loss_grad: Callable[[np.ndarray], np.ndarray],
    predict: Callable[[np.ndarray], np.ndarray],
    init: np.ndarray,
    config: LangevinConfig,
    *,
    y: np.ndarray,
    sigma0_sq: float,
    rng: np.random.Generator | None = None,
) -> PredictionTrace:
    """Run ``steps_total`` Langevin updates, recording predictions only.

    Rows of the returned trace are predict(state) after each update, with
    the first ``burn_in_fraction * steps_total`` rows discarded.  Memory is
    O(T_kept * n) no matter how large the parameter dimension is.

    The random stream is injectable through ``rng`` (tests zero the noise
    by stubbing it); when omitted a fresh generator is built from
    ``config.seed``.  A non-finite state aborts with the failing step index.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    x = np.array(init, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise ValueError("init must be finite")
    total = config.steps_total
    burn = config.burn_steps
    coef = 0.25 * config.step * config.kappa_n
    root = math.sqrt(config.step)
    dim = x.size
    mu: np.ndarray | None = None
    row = 0
    buf = np.empty((0, dim))
    j = 0
    for t in range(total):
        if j == buf.shape[0]:
            buf = rng.standard_normal((min(_NOISE_BLOCK, total - t), dim))
            j = 0
        # overflow here is handled by the finiteness check, not a warning
        with np.errstate(over="ignore", invalid="ignore"):
            x = x - coef * loss_grad(x) + root * buf[j]
        j += 1
        if not np.all(np.isfinite(x)):
            raise DivergenceError(t + 1)
        if t >= burn:
            pred = predict(x)
            if mu is None:
                mu = np.empty((total - burn, np.asarray(pred).shape[0]))
            mu[row] = pred
            row += 1
    assert mu is not None
    return PredictionTrace(mu=mu, y=np.asarray(y, dtype=float), sigma0_sq=sigma0_sq)


def lfv(trace: PredictionTrace) -> float:
    """Langevin functional variance of a prediction trace.

    Identical arithmetic to the Monte-Carlo functional variance: the
    divisor-T empirical variance per sample of (y_i - mu_i^(t))^2 / (2 sigma0^2),
    summed over i.
    """
    return fv_mc(trace.mu, trace.y, trace.sigma0_sq)
