"""Reproducible random-instance generation.

Haar-distributed orthonormal factors, the three singular-value profiles
used by the linear experiments, synthetic linear and network datasets, and
the sphere-moment statistical self-test.  Every generator is pure given an
explicit ``numpy.random.Generator``; replication harnesses fork streams
keyed by (master seed, replication index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linmodel import Dataset, SvdCache
from .nn import NnDataset

__all__ = [
    "PROFILE_KINDS",
    "SingularProfile",
    "haar_orthonormal",
    "singular_values",
    "make_linear_dataset",
    "redraw_outcomes",
    "make_nn_dataset",
    "sphere_moment_selftest",
]

PROFILE_KINDS = ("intrinsic10", "inverse_linear", "inverse_sqrt")


@dataclass(frozen=True)
class SingularProfile:
    """A named singular-value layout at size n.

    kind:
      - ``intrinsic10``: s_1 = ... = s_10 = sqrt(n), the rest exactly 0
        (fixed intrinsic dimension 10; requires n >= 10)
      - ``inverse_linear``: s_i = sqrt(n) / i
      - ``inverse_sqrt``: s_i = sqrt(n) / sqrt(i)
    """

    kind: str
    n: int

    def __post_init__(self) -> None:
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}; choose from {PROFILE_KINDS}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.kind == "intrinsic10" and self.n < 10:
            raise ValueError("intrinsic10 requires n >= 10")


def haar_orthonormal(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Sample a rows x cols frame with orthonormal columns from the Haar
    (uniform) distribution.

    Parameters
    ----------
    rows, cols : int
        Frame shape; cols <= rows.
    rng : numpy.random.Generator

    Returns
    -------
    ndarray of shape (rows, cols)

    Notes
    -----
    QR of a standard Gaussian matrix alone is not Haar distributed; the
    factorization is only unique up to column signs.  Fixing the signs so
    the triangular factor has a positive diagonal restores uniformity.
    """
    if cols > rows:
        raise ValueError("need cols <= rows")
    G = rng.standard_normal((rows, cols))
    Q, R = np.linalg.qr(G)
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d


def singular_values(profile: SingularProfile) -> np.ndarray:
    """Materialize a profile as a nonincreasing length-n vector."""
    n = profile.n
    root = math.sqrt(n)
    if profile.kind == "intrinsic10":
        s = np.zeros(n)
        s[:10] = root
        return s
    i = np.arange(1, n + 1, dtype=float)
    if profile.kind == "inverse_linear":
        return root / i
    return root / np.sqrt(i)


def make_linear_dataset(
    n: int,
    profile: SingularProfile | str,
    sigma0_sq: float,
    rng: np.random.Generator,
) -> tuple[Dataset, SvdCache]:
    """Draw one synthetic linear instance with p = 2n.

    X = U diag(s) V^T with U, V independent Haar frames and s from the
    profile; beta0 has i.i.d. N(0, 1/p) entries (E||beta0||^2 = 1) and
    y ~ N(X beta0, sigma0^2 I).  The returned SvdCache is assembled from
    the generated factors, so it is exact rather than a numerical
    round-trip.  Draw order is fixed (U, V, beta0, noise) to keep seeded
    runs reproducible.
    """
    if isinstance(profile, str):
        profile = SingularProfile(kind=profile, n=n)
    if profile.n != n:
        raise ValueError("profile size must match n")
    p = 2 * n
    U = haar_orthonormal(n, n, rng)
    V = haar_orthonormal(p, n, rng)
    s = singular_values(profile)
    X = (U * s) @ V.T
    beta0 = rng.standard_normal(p) / math.sqrt(p)
    y = X @ beta0 + math.sqrt(sigma0_sq) * rng.standard_normal(n)
    data = Dataset(X=X, y=y, sigma0_sq=sigma0_sq, beta0=beta0)
    return data, SvdCache(U=U, s=s, V=V)


def redraw_outcomes(data: Dataset, rng: np.random.Generator) -> Dataset:
    """Fresh y ~ N(X beta0, sigma0^2 I) on a fixed design, for the mode
    where (U, V, beta0) are held across replications."""
    if data.beta0 is None:
        raise ValueError("redraw_outcomes requires beta0")
    y = data.X @ data.beta0 + math.sqrt(data.sigma0_sq) * rng.standard_normal(data.n)
    return Dataset(X=data.X, y=y, sigma0_sq=data.sigma0_sq, beta0=data.beta0)


def make_nn_dataset(
    n: int,
    d: int,
    sigma_sq: float,
    rng: np.random.Generator,
) -> NnDataset:
    """Inputs z_i ~ N(0, I_d), means mu(z) = 3 tanh(<z, 1>/2), outcomes
    y = mu + noise with variance sigma_sq (0 gives noiseless data)."""
    Z = rng.standard_normal((n, d))
    mu = 3.0 * np.tanh(Z.sum(axis=1) / 2.0)
    y = mu + math.sqrt(sigma_sq) * rng.standard_normal(n) if sigma_sq > 0 else mu.copy()
    return NnDataset(Z=Z, y=y, mu_truth=mu, sigma_sq=sigma_sq)


def sphere_moment_selftest(
    A_diag: np.ndarray,
    draws: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Monte-Carlo check of E[(v^T A v)^2] for v uniform on the unit sphere.

    For diagonal A the closed form is (2 tr{A^2} + tr{A}^2) / (n (n + 2)).
    Returns ``(empirical, analytic)``; callers compare at their chosen
    number of standard errors.  This validates the uniform-sphere sampler
    that underlies the Gaussian-design analysis.
    """
    if draws < 1000:
        raise ValueError("need at least 1000 draws")
    a = np.asarray(A_diag, dtype=float)
    n = a.size
    v = rng.standard_normal((draws, n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    q = (v * v) @ a
    analytic = (2.0 * (a @ a) + a.sum() ** 2) / (n * (n + 2))
    return float((q * q).mean()), float(analytic)
