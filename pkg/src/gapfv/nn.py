"""One-hidden-layer tanh network experiments.

Model: g_theta(z) = <theta2, tanh(theta1 z + theta0)> with M hidden units
on d-dimensional inputs, p = M (d + 2) parameters in total.  The module
provides the exact gradient of the ridge-penalized training loss

    rho_alpha(theta) = n^-1 sum_i (y_i - g_theta(z_i))^2 + alpha ||theta||^2

full-batch gradient descent, and the ground-truth generalization gap that
synthetic data makes computable in closed form.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .langevin import DivergenceError

__all__ = [
    "MlpParams",
    "NnDataset",
    "mlp_forward",
    "mlp_predict",
    "theta0_construct",
    "rho",
    "rho_grad",
    "train_gd",
    "tilde_gap",
]


@dataclass(frozen=True)
class MlpParams:
    """Parameters theta = (theta0, theta1, theta2): biases (M,), input
    weights (M, d), output weights (M,)."""

    theta0: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray

    def __post_init__(self) -> None:
        t0 = np.asarray(self.theta0, dtype=float)
        t1 = np.asarray(self.theta1, dtype=float)
        t2 = np.asarray(self.theta2, dtype=float)
        if t1.ndim != 2 or t0.shape != (t1.shape[0],) or t2.shape != (t1.shape[0],):
            raise ValueError("expected theta0 (M,), theta1 (M, d), theta2 (M,)")
        if not (np.isfinite(t0).all() and np.isfinite(t1).all() and np.isfinite(t2).all()):
            raise ValueError("parameters must be finite")
        object.__setattr__(self, "theta0", t0)
        object.__setattr__(self, "theta1", t1)
        object.__setattr__(self, "theta2", t2)

    @property
    def m(self) -> int:
        return self.theta1.shape[0]

    @property
    def d(self) -> int:
        return self.theta1.shape[1]

    @property
    def p(self) -> int:
        return self.m * (self.d + 2)

    def flatten(self) -> np.ndarray:
        # fixed order (theta0, theta1 row-major, theta2); the Langevin
        # chain and finite-difference checks both rely on it
        return np.concatenate([self.theta0, self.theta1.ravel(), self.theta2])

    @classmethod
    def unflatten(cls, vec: np.ndarray, d: int, m: int) -> "MlpParams":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (m * (d + 2),):
            raise ValueError(f"expected length {m * (d + 2)}, got {vec.shape}")
        return cls(
            theta0=vec[:m],
            theta1=vec[m : m + m * d].reshape(m, d),
            theta2=vec[m + m * d :],
        )


@dataclass(frozen=True)
class NnDataset:
    """Inputs Z (n, d), outcomes y, the true means mu(z_i), and the noise
    variance sigma^2 that generated y."""

    Z: np.ndarray
    y: np.ndarray
    mu_truth: np.ndarray
    sigma_sq: float

    def __post_init__(self) -> None:
        Z = np.asarray(self.Z, dtype=float)
        y = np.asarray(self.y, dtype=float)
        mu = np.asarray(self.mu_truth, dtype=float)
        n = Z.shape[0] if Z.ndim == 2 else -1
        if Z.ndim != 2 or y.shape != (n,) or mu.shape != (n,):
            raise ValueError("Z must be (n, d) with y and mu_truth of length n")
        if not (np.isfinite(Z).all() and np.isfinite(y).all() and np.isfinite(mu).all()):
            raise ValueError("dataset must be finite")
        if self.sigma_sq < 0:
            raise ValueError("sigma_sq must be nonnegative")
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "mu_truth", mu)

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    @property
    def d(self) -> int:
        return self.Z.shape[1]


def mlp_forward(params: MlpParams, z: np.ndarray) -> float:
    """Network output for a single input vector."""
    h = np.tanh(params.theta1 @ np.asarray(z, dtype=float) + params.theta0)
    return float(params.theta2 @ h)


def mlp_predict(params: MlpParams, Z: np.ndarray) -> np.ndarray:
    """Vectorized forward pass over the rows of Z."""
    H = np.tanh(np.asarray(Z, dtype=float) @ params.theta1.T + params.theta0)
    return H @ params.theta2


def theta0_construct(d: int, M: int) -> MlpParams:
    """Parameters realizing the target mean mu(z) = 3 tanh(<z, 1>/2) exactly.

    A single hidden unit carries the target (input row 0.5 * ones, bias 0,
    output weight 3); the remaining M - 1 units are zero.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    theta0 = np.zeros(M)
    theta1 = np.zeros((M, d))
    theta2 = np.zeros(M)
    theta1[0] = 0.5
    theta2[0] = 3.0
    return MlpParams(theta0=theta0, theta1=theta1, theta2=theta2)


def rho(params: MlpParams, data: NnDataset, alpha: float) -> float:
    """Penalized training loss rho_alpha(theta)."""
    e = data.y - mlp_predict(params, data.Z)
    sq = float(params.theta0 @ params.theta0)
    sq += float((params.theta1 * params.theta1).sum())
    sq += float(params.theta2 @ params.theta2)
    return float(e @ e) / data.n + alpha * sq


def rho_grad(params: MlpParams, data: NnDataset, alpha: float) -> MlpParams:
    """Exact gradient of rho_alpha, same shape as the parameters.

    With h_i = tanh(theta1 z_i + theta0) and e_i = y_i - g(z_i):

        d/dtheta2 = -(2/n) sum_i e_i h_i              + 2 alpha theta2
        d/dtheta0 = -(2/n) sum_i e_i theta2 (1-h_i^2) + 2 alpha theta0
        d/dtheta1 = -(2/n) sum_i e_i [theta2 (1-h_i^2)] z_i^T + 2 alpha theta1
    """
    n = data.n
    H = np.tanh(data.Z @ params.theta1.T + params.theta0)
    e = data.y - H @ params.theta2
    S = (1.0 - H * H) * params.theta2
    g2 = -(2.0 / n) * (e @ H) + 2.0 * alpha * params.theta2
    g0 = -(2.0 / n) * (e @ S) + 2.0 * alpha * params.theta0
    g1 = -(2.0 / n) * (S * e[:, None]).T @ data.Z + 2.0 * alpha * params.theta1
    return MlpParams(theta0=g0, theta1=g1, theta2=g2)


def train_gd(
    data: NnDataset,
    init: MlpParams,
    lr: float,
    alpha: float,
    iters: int,
) -> MlpParams:
    """Full-batch gradient descent on rho_alpha.

    Plain fixed-step updates theta <- theta - lr * grad.  Raises
    DivergenceError with the failing iteration if the parameters leave the
    finite range; warns if the final loss exceeds the initial loss.
    """
    if lr < 0:
        raise ValueError("lr must be nonnegative")
    theta = init
    rho_start = rho(theta, data, alpha)
    for it in range(iters):
        g = rho_grad(theta, data, alpha)
        # overflow here is handled by the finiteness check, not a warning
        with np.errstate(over="ignore", invalid="ignore"):
            t0 = theta.theta0 - lr * g.theta0
            t1 = theta.theta1 - lr * g.theta1
            t2 = theta.theta2 - lr * g.theta2
        if not (np.isfinite(t0).all() and np.isfinite(t1).all() and np.isfinite(t2).all()):
            raise DivergenceError(it + 1, "parameters")
        theta = MlpParams(theta0=t0, theta1=t1, theta2=t2)
    if rho(theta, data, alpha) > rho_start:
        warnings.warn("gradient descent did not decrease the loss", RuntimeWarning)
    return theta


def tilde_gap(params: MlpParams, data: NnDataset, normalization: str = "raw") -> float:
    """Ground-truth generalization gap of a fitted network.

    Test risk minus training risk, with the test expectation taken in
    closed form over fresh noise at the same inputs:

        sigma^2 + n^-1 sum (mu_i - g_i)^2 - n^-1 sum (y_i - g_i)^2

    ``normalization="sum"`` rescales by n / (2 sigma^2) into the same units
    as the functional-variance estimators (which sum over samples and halve
    by the noise variance).
    """
    g = mlp_predict(params, data.Z)
    train = float(((data.y - g) ** 2).mean())
    bias = float(((data.mu_truth - g) ** 2).mean())
    raw = data.sigma_sq + bias - train
    if normalization == "raw":
        return raw
    if normalization == "sum":
        if data.sigma_sq <= 0:
            raise ValueError("sum normalization needs sigma_sq > 0")
        return raw * data.n / (2.0 * data.sigma_sq)
    raise ValueError(f"unknown normalization {normalization!r}")
