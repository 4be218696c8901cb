"""Ridge / quasi-Bayesian linear model built on a thin SVD.

The design matrix is factored exactly once per dataset and every downstream
quantity (MAP estimate, hat-matrix spectrum, posterior predictions) is read
off the cached factors.  Nothing in this module ever forms a p x p matrix,
which is what makes the p = 2n experiments cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RANK_TOL",
    "Dataset",
    "SvdCache",
    "RidgeSpec",
    "QuasiPosterior",
    "svd_decompose",
    "ridge_fit",
    "hat_spectrum",
    "posterior_sample",
]

# Singular values below RANK_TOL * max(s) are treated as exactly zero:
# designs with an exact low rank come back from the numerical SVD with
# noise-level values in place of the zeros.
RANK_TOL = 1e-12


@dataclass(frozen=True)
class Dataset:
    """Regression data ``y = X beta0 + noise``.

    Parameters
    ----------
    X : ndarray of shape (n, p)
        Design matrix, one sample per row.
    y : ndarray of shape (n,)
        Observed outcomes.
    sigma0_sq : float
        Noise variance of the working Gaussian likelihood.
    beta0 : ndarray of shape (p,), optional
        Ground-truth coefficients.  Only synthetic data has them; the
        closed-form oracles require them, plain estimators never do.
    """

    X: np.ndarray
    y: np.ndarray
    sigma0_sq: float
    beta0: np.ndarray | None = None

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2 or y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("X must be (n, p) and y (n,) with matching n")
        if not (np.isfinite(X).all() and np.isfinite(y).all()):
            raise ValueError("X and y must be finite")
        if not self.sigma0_sq > 0:
            raise ValueError("sigma0_sq must be positive")
        beta0 = self.beta0
        if beta0 is not None:
            beta0 = np.asarray(beta0, dtype=float)
            if beta0.shape != (X.shape[1],):
                raise ValueError("beta0 length must equal p")
            if not np.isfinite(beta0).all():
                raise ValueError("beta0 must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "beta0", beta0)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class SvdCache:
    """Thin SVD ``X = U diag(s) V^T``.

    U is n x n orthogonal, s holds the n singular values in nonincreasing
    order, V is p x n with orthonormal columns.  Exactly n values are kept
    (thin factorization for the n <= p orientation).
    """

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    def __post_init__(self) -> None:
        U = np.asarray(self.U, dtype=float)
        s = np.asarray(self.s, dtype=float)
        V = np.asarray(self.V, dtype=float)
        n = U.shape[0] if U.ndim == 2 else -1
        if U.ndim != 2 or U.shape != (n, n):
            raise ValueError("U must be square n x n")
        if s.shape != (n,) or V.ndim != 2 or V.shape[1] != n:
            raise ValueError("factor shapes inconsistent with a thin SVD")
        if np.any(s < 0) or np.any(np.diff(s) > 1e-12):
            raise ValueError("s must be nonnegative and nonincreasing")
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "V", V)

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def p(self) -> int:
        return self.V.shape[0]


@dataclass(frozen=True)
class RidgeSpec:
    """Regularization strength alpha and noise variance sigma0^2."""

    alpha: float
    sigma0_sq: float

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.sigma0_sq > 0:
            raise ValueError("sigma0_sq must be positive")


@dataclass(frozen=True)
class QuasiPosterior:
    """MAP estimate plus the spectral pieces of the posterior covariance.

    ``post_sd[i]`` is the posterior standard deviation along the i-th right
    singular direction, sqrt(sigma0^2/n * 1/(s_i^2/n + alpha)).  Together
    with U and s this is a complete low-rank representation of the
    covariance as far as predictions are concerned.
    """

    beta_hat: np.ndarray
    svd: SvdCache
    spec: RidgeSpec
    post_sd: np.ndarray


def svd_decompose(X: np.ndarray) -> SvdCache:
    """Factor a wide design matrix, returning exactly n singular values.

    Parameters
    ----------
    X : ndarray of shape (n, p) with n <= p
        The overparameterized orientation is required; callers must not
        rely on silent transposition.

    Returns
    -------
    SvdCache

    Raises
    ------
    ValueError
        If entries are non-finite, or if n > p (wrong orientation).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a matrix")
    if not np.isfinite(X).all():
        raise ValueError("X must be finite")
    n, p = X.shape
    if n > p:
        raise ValueError(
            f"svd_decompose expects n <= p, got {n} x {p}; "
            "transpose explicitly if the tall orientation is intended"
        )
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    s = s.copy()
    s[s < RANK_TOL * s[0]] = 0.0
    return SvdCache(U=U, s=s, V=Vt.T)


def ridge_fit(data: Dataset, spec: RidgeSpec, svd: SvdCache | None = None) -> QuasiPosterior:
    """Ridge MAP estimate and quasi-posterior for ``data``.

    Minimizes ``n^-1 ||y - X b||^2 + alpha ||b||^2`` through the singular
    basis:  beta_hat = V diag( (s_i/n) / (s_i^2/n + alpha) ) U^T y.

    Parameters
    ----------
    data : Dataset
    spec : RidgeSpec
    svd : SvdCache, optional
        Reuse an existing factorization of ``data.X`` (e.g. the exact one
        attached to a synthetic instance).  Computed fresh when omitted.
    """
    if svd is None:
        svd = svd_decompose(data.X)
    n = data.n
    s = svd.s
    shrink = (s / n) / (s * s / n + spec.alpha)
    beta_hat = svd.V @ (shrink * (svd.U.T @ data.y))
    post_sd = np.sqrt(spec.sigma0_sq / n / (s * s / n + spec.alpha))
    return QuasiPosterior(beta_hat=beta_hat, svd=svd, spec=spec, post_sd=post_sd)


def hat_spectrum(svd: SvdCache, alpha: float, n: int) -> np.ndarray:
    """Eigenvalues of the hat matrix n^-1 X (n^-1 X^T X + alpha I)^-1 X^T.

    Returns the nonincreasing vector r with r_i = (s_i^2/n) / (s_i^2/n + alpha),
    each in [0, 1).
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    t = svd.s * svd.s / n
    return t / (t + alpha)


def posterior_sample(post: QuasiPosterior, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw i.i.d. prediction vectors ``X beta`` under the quasi-posterior.

    The posterior of ``X beta`` is Gaussian with mean ``X beta_hat`` and
    covariance ``U diag((s_i post_sd_i)^2) U^T``; the null-space component
    of the coefficient posterior is annihilated by X, so sampling happens
    entirely in the n-dimensional prediction space at O(n^2) per draw.

    Returns an array of shape (count, n), one sample per row.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    svd = post.svd
    mean = svd.U @ (svd.s * (svd.V.T @ post.beta_hat))
    scale = svd.s * post.post_sd
    z = rng.standard_normal((count, svd.n))
    return mean + (z * scale) @ svd.U.T
