"""Experiment runner: seeded replications, CSV/markdown output, selfcheck.

Replications are independent work items; each one derives its own random
stream from (master seed, replication index), so serial and pooled
execution produce identical tables and reruns are byte-stable.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np

from .estimators import GapReport, efv_analytic, fv_mc, gap_delta, jfv_analytic, ric, tic
from .langevin import DivergenceError, LangevinConfig, lfv, run_chain
from .linmodel import Dataset, RidgeSpec, SvdCache, hat_spectrum, posterior_sample, ridge_fit, svd_decompose
from .nn import (
    MlpParams,
    mlp_forward,
    mlp_predict,
    rho,
    rho_grad,
    theta0_construct,
    tilde_gap,
    train_gd,
)
from .synthetic import (
    PROFILE_KINDS,
    SingularProfile,
    haar_orthonormal,
    make_linear_dataset,
    make_nn_dataset,
    redraw_outcomes,
    sphere_moment_selftest,
)

__all__ = [
    "LINEAR_ESTIMATORS",
    "LINEAR_COLUMNS",
    "NN_COLUMNS",
    "ExperimentConfig",
    "LinearResult",
    "NnResult",
    "CheckOutcome",
    "SelfcheckResult",
    "fork_rng",
    "resolve",
    "run_linear",
    "run_nn",
    "run_selfcheck",
    "linear_csv",
    "nn_csv",
    "write_csv",
    "markdown_summary",
]

LINEAR_ESTIMATORS = ("delta", "efv", "fv", "lfv", "jfv", "tic0", "tic_kappa", "ric")

LINEAR_COLUMNS = (
    "rep", "n", "p", "profile", "alpha",
    "delta", "efv_analytic", "fv_mc", "lfv", "jfv", "tic0", "tic_kappa", "ric",
    "seed", "summary",
)

NN_COLUMNS = (
    "rep", "n", "d", "m", "p", "alpha", "t",
    "lfv", "tilde_gap", "tilde_gap_sum",
    "seed", "summary",
)

# estimator name -> GapReport attribute / CSV column
_EST_COLUMN = {
    "delta": "delta",
    "efv": "efv_analytic",
    "fv": "fv_mc",
    "lfv": "lfv",
    "jfv": "jfv",
    "tic0": "tic0",
    "tic_kappa": "tic_kappa",
    "ric": "ric",
}


def fork_rng(seed: int, *key: int) -> np.random.Generator:
    """Child stream for a work item; (seed, key) fully determines it."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for one run.  ``None`` fields take mode-specific defaults
    (see ``resolve``): linear runs use alpha 0.1, 50 replications,
    T = 15n chain steps of size 1/(10n) and no burn-in; network runs use
    alpha 1e-3, 20 replications, T = 1000 steps of size 1e-5 and 10%
    burn-in.  ``sigma0_sq`` is the working noise variance (for network
    data, the true one)."""

    mode: str = "linear"
    n: int = 100
    alpha: float | None = None
    profile: str = "intrinsic10"
    d: int = 5
    m: int = 50
    reps: int | None = None
    gap_reps: int = 50
    t: int | None = None
    step: float | None = None
    burn_in: float | None = None
    sigma0_sq: float = 1.0
    kappa: float = 0.1
    estimators: tuple[str, ...] = LINEAR_ESTIMATORS
    lr: float = 0.1
    gd_iters: int = 100
    seed: int = 0
    out: str | None = None
    workers: int = 1
    fixed_design: bool = False


def resolve(config: ExperimentConfig) -> ExperimentConfig:
    """Fill mode defaults and validate; raises ValueError naming the field."""
    if config.mode not in ("linear", "nn", "selfcheck"):
        raise ValueError(f"mode: unknown mode {config.mode!r}")
    nn_mode = config.mode == "nn"
    filled = replace(
        config,
        alpha=config.alpha if config.alpha is not None else (1e-3 if nn_mode else 0.1),
        reps=config.reps if config.reps is not None else (20 if nn_mode else 50),
        t=config.t if config.t is not None else (1000 if nn_mode else 15 * config.n),
        step=config.step if config.step is not None else (1e-5 if nn_mode else 1.0 / (10 * config.n)),
        burn_in=config.burn_in if config.burn_in is not None else (0.1 if nn_mode else 0.0),
        estimators=tuple(config.estimators),
    )
    if filled.n < 1:
        raise ValueError("n: must be >= 1")
    if not filled.alpha > 0:
        raise ValueError("alpha: must be positive")
    if not filled.sigma0_sq > 0:
        raise ValueError("sigma0_sq: must be positive")
    if filled.reps < 1:
        raise ValueError("reps: must be >= 1")
    if filled.gap_reps < 1:
        raise ValueError("gap_reps: must be >= 1")
    if filled.t < 2:
        raise ValueError("t: must be >= 2")
    if not filled.step > 0:
        raise ValueError("step: must be positive")
    if not 0.0 <= filled.burn_in < 1.0:
        raise ValueError("burn_in: must lie in [0, 1)")
    if filled.kappa < 0:
        raise ValueError("kappa: must be nonnegative")
    if filled.workers < 1:
        raise ValueError("workers: must be >= 1")
    if config.mode == "linear":
        if filled.profile not in PROFILE_KINDS:
            raise ValueError(f"profile: unknown profile {filled.profile!r}")
        bad = [e for e in filled.estimators if e not in LINEAR_ESTIMATORS]
        if bad:
            raise ValueError(f"estimators: unknown {bad!r}")
        SingularProfile(kind=filled.profile, n=filled.n)  # size constraints
    if nn_mode:
        if filled.d < 1:
            raise ValueError("d: must be >= 1")
        if filled.m < 1:
            raise ValueError("m: must be >= 1")
        if filled.lr < 0:
            raise ValueError("lr: must be nonnegative")
        if filled.gd_iters < 0:
            raise ValueError("gd_iters: must be nonnegative")
    return filled


@dataclass
class LinearResult:
    config: ExperimentConfig
    reports: list[GapReport]
    diverged: int


@dataclass
class NnResult:
    config: ExperimentConfig
    rows: list[dict[str, Any]]
    diverged: int


def _linear_rep(config: ExperimentConfig, rep: int, design: tuple[Dataset, SvdCache] | None) -> GapReport:
    rng = fork_rng(config.seed, 1, rep)
    if design is not None:
        data, svd = redraw_outcomes(design[0], rng), design[1]
    else:
        data, svd = make_linear_dataset(config.n, config.profile, config.sigma0_sq, rng)
    n = config.n
    alpha = config.alpha
    want = set(config.estimators)
    spec = RidgeSpec(alpha=alpha, sigma0_sq=config.sigma0_sq)
    post = ridge_fit(data, spec, svd=svd)

    out: dict[str, Any] = {"seed": config.seed}
    meta: dict[str, Any] = {"rep": rep, "n": n, "p": data.p, "profile": config.profile, "alpha": alpha}
    if "delta" in want:
        out["delta"] = gap_delta(svd, alpha, n)
    if "efv" in want:
        value, terms = efv_analytic(svd, data.beta0, alpha, config.sigma0_sq, n)
        out["efv_analytic"] = value
        out["efv_terms"] = terms
    if "jfv" in want:
        out["jfv_analytic"] = jfv_analytic(svd, data.beta0, alpha, config.sigma0_sq, n)
    if "fv" in want:
        samples = posterior_sample(post, config.t, rng)
        out["fv_mc"] = fv_mc(samples, data.y, config.sigma0_sq)
    if "lfv" in want:
        chain_cfg = LangevinConfig(
            step=config.step,
            kappa_n=n / config.sigma0_sq,
            steps_total=config.t,
            burn_in_fraction=config.burn_in,
        )
        X, y = data.X, data.y

        def grad(g: np.ndarray) -> np.ndarray:
            return (2.0 / n) * (X.T @ (X @ g - y)) + 2.0 * alpha * g

        try:
            trace = run_chain(
                grad, lambda g: X @ g, post.beta_hat, chain_cfg,
                y=y, sigma0_sq=config.sigma0_sq, rng=rng,
            )
            out["lfv"] = lfv(trace)
        except DivergenceError as err:
            meta["diverged_at"] = err.step
    if "tic0" in want:
        out["tic0"] = tic(data, post.beta_hat, 0.0, svd=svd)
    if "tic_kappa" in want:
        out["tic_kappa"] = tic(data, post.beta_hat, config.kappa, svd=svd)
    if "ric" in want:
        out["ric"] = ric(data, post.beta_hat, alpha, svd=svd)
    return GapReport(meta=meta, **out)


def _nn_rep(config: ExperimentConfig, rep: int, design: None = None) -> dict[str, Any]:
    rng = fork_rng(config.seed, 1, rep)
    data = make_nn_dataset(config.n, config.d, config.sigma0_sq, rng)
    base = theta0_construct(config.d, config.m)
    # init at the realizable optimum plus elementwise N(0, 0.01)
    init = MlpParams(
        theta0=base.theta0 + 0.1 * rng.standard_normal(config.m),
        theta1=base.theta1 + 0.1 * rng.standard_normal((config.m, config.d)),
        theta2=base.theta2 + 0.1 * rng.standard_normal(config.m),
    )
    theta = train_gd(data, init, config.lr, config.alpha, config.gd_iters)

    row: dict[str, Any] = {
        "rep": rep, "n": config.n, "d": config.d, "m": config.m, "p": theta.p,
        "alpha": config.alpha, "t": config.t, "seed": config.seed,
        "lfv": None, "tilde_gap": None, "tilde_gap_sum": None, "diverged_at": None,
    }
    if rep < config.gap_reps:
        row["tilde_gap"] = tilde_gap(theta, data)
        row["tilde_gap_sum"] = tilde_gap(theta, data, normalization="sum")
    if rep < config.reps:
        chain_cfg = LangevinConfig(
            step=config.step,
            kappa_n=config.n / config.sigma0_sq,
            steps_total=config.t,
            burn_in_fraction=config.burn_in,
        )
        d, m = config.d, config.m
        alpha = config.alpha

        def grad(vec: np.ndarray) -> np.ndarray:
            return rho_grad(MlpParams.unflatten(vec, d, m), data, alpha).flatten()

        def predict(vec: np.ndarray) -> np.ndarray:
            return mlp_predict(MlpParams.unflatten(vec, d, m), data.Z)

        try:
            trace = run_chain(
                grad, predict, theta.flatten(), chain_cfg,
                y=data.y, sigma0_sq=config.sigma0_sq, rng=rng,
            )
            row["lfv"] = lfv(trace)
        except DivergenceError as err:
            row["diverged_at"] = err.step
    return row


def _map_reps(worker: Callable, config: ExperimentConfig, total: int, design: Any) -> list[Any]:
    if config.workers <= 1:
        return [worker(config, rep, design) for rep in range(total)]
    results: list[Any] = [None] * total
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        pending = {pool.submit(worker, config, rep, design): rep for rep in range(total)}
        for fut in as_completed(pending):
            results[pending[fut]] = fut.result()
    return results


def run_linear(config: ExperimentConfig) -> LinearResult:
    config = resolve(config)
    if config.mode != "linear":
        raise ValueError("mode: run_linear needs mode='linear'")
    design = None
    if config.fixed_design:
        design = make_linear_dataset(
            config.n, config.profile, config.sigma0_sq, fork_rng(config.seed, 0, 0)
        )
    reports = _map_reps(_linear_rep, config, config.reps, design)
    diverged = sum(1 for r in reports if "diverged_at" in r.meta)
    return LinearResult(config=config, reports=reports, diverged=diverged)


def run_nn(config: ExperimentConfig) -> NnResult:
    config = resolve(config)
    if config.mode != "nn":
        raise ValueError("mode: run_nn needs mode='nn'")
    total = max(config.reps, config.gap_reps)
    rows = _map_reps(_nn_rep, config, total, None)
    diverged = sum(1 for r in rows if r["diverged_at"] is not None)
    return NnResult(config=config, rows=rows, diverged=diverged)


# ---------------------------------------------------------------------------
# output formatting

def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _mean_sd(values: list[float]) -> tuple[float, float] | None:
    if not values:
        return None
    arr = np.asarray(values, dtype=float)
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), sd


def _summary_cells(rows: list[dict[str, Any]], columns: tuple[str, ...]) -> dict[str, str]:
    cells: dict[str, str] = {}
    for col in columns:
        stats = _mean_sd([row[col] for row in rows if row.get(col) is not None])
        if stats is not None:
            cells[col] = f"{_fmt(stats[0])} ± {_fmt(stats[1])}"
    return cells


_LINEAR_VALUE_COLS = ("delta", "efv_analytic", "fv_mc", "lfv", "jfv", "tic0", "tic_kappa", "ric")
_NN_VALUE_COLS = ("lfv", "tilde_gap", "tilde_gap_sum")


def _linear_row_dicts(result: LinearResult) -> list[dict[str, Any]]:
    rows = []
    for rep in result.reports:
        rows.append({
            "rep": rep.meta["rep"], "n": rep.meta["n"], "p": rep.meta["p"],
            "profile": rep.meta["profile"], "alpha": rep.meta["alpha"],
            "delta": rep.delta, "efv_analytic": rep.efv_analytic, "fv_mc": rep.fv_mc,
            "lfv": rep.lfv, "jfv": rep.jfv_analytic, "tic0": rep.tic0,
            "tic_kappa": rep.tic_kappa, "ric": rep.ric, "seed": rep.seed,
        })
    return rows


def _csv_text(columns: tuple[str, ...], rows: list[dict[str, Any]], value_cols: tuple[str, ...]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(col)) for col in columns[:-1]] + ["false"])
    summary = _summary_cells(rows, value_cols)
    last = dict(rows[-1]) if rows else {}
    tail = []
    for col in columns[:-1]:
        if col == "rep":
            tail.append("")
        elif col in summary:
            tail.append(summary[col])
        elif col in value_cols:
            tail.append("")
        else:
            tail.append(_fmt(last.get(col)))
    writer.writerow(tail + ["true"])
    return buf.getvalue()


def linear_csv(result: LinearResult) -> str:
    return _csv_text(LINEAR_COLUMNS, _linear_row_dicts(result), _LINEAR_VALUE_COLS)


def nn_csv(result: NnResult) -> str:
    return _csv_text(NN_COLUMNS, result.rows, _NN_VALUE_COLS)


def write_csv(result: LinearResult | NnResult, path: str) -> None:
    text = linear_csv(result) if isinstance(result, LinearResult) else nn_csv(result)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def markdown_summary(result: LinearResult | NnResult) -> str:
    """Aligned two-column table of the summary row, one line per estimator."""
    if isinstance(result, LinearResult):
        rows, value_cols = _linear_row_dicts(result), _LINEAR_VALUE_COLS
        cfg = result.config
        head = (
            f"linear  profile={cfg.profile}  n={cfg.n}  p={2 * cfg.n}  alpha={_fmt(cfg.alpha)}  "
            f"reps={cfg.reps}  seed={cfg.seed}"
        )
    else:
        rows, value_cols = result.rows, _NN_VALUE_COLS
        cfg = result.config
        head = (
            f"nn  n={cfg.n}  d={cfg.d}  M={cfg.m}  alpha={_fmt(cfg.alpha)}  T={cfg.t}  "
            f"reps={cfg.reps}  gap_reps={cfg.gap_reps}  seed={cfg.seed}"
        )
    summary = _summary_cells(rows, value_cols)
    width = max(len(c) for c in value_cols)
    lines = [head, "", f"| {'estimator':<{width}} | mean ± sd |", f"|{'-' * (width + 2)}|-----------|"]
    for col in value_cols:
        lines.append(f"| {col:<{width}} | {summary.get(col, 'missing')} |")
    if result.diverged:
        lines.append("")
        lines.append(f"diverged replications: {result.diverged}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# selfcheck

@dataclass
class CheckOutcome:
    name: str
    passed: bool
    detail: str


@dataclass
class SelfcheckResult:
    checks: list[CheckOutcome] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def format(self) -> str:
        lines = []
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            lines.append(f"[{tag}] {c.name}: {c.detail}")
        verdict = "all checks passed" if self.ok else "CHECK FAILURES PRESENT"
        return "\n".join(lines + [verdict])


def _dense_hat(X: np.ndarray, alpha: float) -> np.ndarray:
    n, p = X.shape
    return X @ np.linalg.solve(X.T @ X / n + alpha * np.eye(p), X.T) / n


def run_selfcheck(config: ExperimentConfig, flip_efv_coefficient: bool = False) -> SelfcheckResult:
    """Execute the derived-oracle suite at small scale.

    ``flip_efv_coefficient`` is a test-only hook that corrupts the analytic
    expectation (the 1.5 coefficient changes sign) to demonstrate that the
    nested Monte-Carlo oracle actually detects a wrong formula.
    """
    seed = config.seed
    result = SelfcheckResult()

    def check(name: str, passed: bool, detail: str) -> None:
        result.checks.append(CheckOutcome(name=name, passed=bool(passed), detail=detail))

    # --- factorization and ridge algebra -----------------------------------
    rng = fork_rng(seed, 2, 0)
    X = rng.standard_normal((5, 8))
    cache = svd_decompose(X)
    err = np.linalg.norm((cache.U * cache.s) @ cache.V.T - X) / np.linalg.norm(X)
    check("svd_reconstruction", err < 1e-10, f"relative error {err:.2e} < 1e-10")

    rng = fork_rng(seed, 2, 1)
    X = rng.standard_normal((10, 20))
    y = rng.standard_normal(10)
    data = Dataset(X=X, y=y, sigma0_sq=1.0)
    post = ridge_fit(data, RidgeSpec(alpha=0.3, sigma0_sq=1.0))
    dense = np.linalg.solve(X.T @ X / 10 + 0.3 * np.eye(20), X.T @ y / 10)
    err = np.linalg.norm(post.beta_hat - dense) / np.linalg.norm(dense)
    check("ridge_dense_solve", err < 1e-8, f"relative error {err:.2e} < 1e-8")

    rng = fork_rng(seed, 2, 2)
    X = rng.standard_normal((8, 12))
    cache = svd_decompose(X)
    r = hat_spectrum(cache, 0.25, 8)
    err = abs(r.sum() - np.trace(_dense_hat(X, 0.25)))
    check("hat_trace_dense", err < 1e-8, f"abs error {err:.2e} < 1e-8")

    y = fork_rng(seed, 2, 3).standard_normal(8)
    data = Dataset(X=X, y=y, sigma0_sq=1.0)
    post = ridge_fit(data, RidgeSpec(alpha=0.25, sigma0_sq=1.0), svd=cache)
    err = np.max(np.abs((np.eye(8) - _dense_hat(X, 0.25)) @ y - (y - X @ post.beta_hat)))
    check("residual_identity", err < 1e-8, f"max abs error {err:.2e} < 1e-8")

    # --- posterior sampler moments vs dense covariance ---------------------
    rng = fork_rng(seed, 2, 4)
    X = rng.standard_normal((4, 6))
    y = rng.standard_normal(4)
    data = Dataset(X=X, y=y, sigma0_sq=1.5)
    post = ridge_fit(data, RidgeSpec(alpha=0.5, sigma0_sq=1.5))
    draws = posterior_sample(post, 100_000, rng)
    q_dense = 1.5 / 4 * np.linalg.inv(X.T @ X / 4 + 0.5 * np.eye(6))
    cov_oracle = X @ q_dense @ X.T
    mean_err = np.abs(draws.mean(axis=0) - X @ post.beta_hat)
    mean_se = draws.std(axis=0, ddof=1) / math.sqrt(draws.shape[0])
    emp_cov = np.cov(draws.T, ddof=1)
    cov_se = np.sqrt(
        (np.outer(np.diag(cov_oracle), np.diag(cov_oracle)) + cov_oracle**2) / draws.shape[0]
    )
    worst = max(np.max(mean_err / mean_se), np.max(np.abs(emp_cov - cov_oracle) / cov_se))
    check("posterior_moments", worst < 3.0, f"worst deviation {worst:.2f} standard errors < 3")

    # --- analytic expectations vs dense evaluation -------------------------
    rng = fork_rng(seed, 2, 5)
    X = rng.standard_normal((8, 12))
    beta0 = rng.standard_normal(12) / math.sqrt(12)
    cache = svd_decompose(X)
    alpha, s0sq = 0.2, 1.0
    r = hat_spectrum(cache, alpha, 8)
    H = cache.U @ np.diag(r) @ cache.U.T
    w = (np.eye(8) - H) @ X @ beta0
    d1 = float(np.sum(np.diag(H) ** 2))
    d2 = float(np.diag(H) @ np.diag(H @ H))
    d3 = float(np.diag(H) @ (w * w)) / s0sq
    dense_val = r.sum() - 1.5 * d1 + d2 + d3
    spectral_val, _ = efv_analytic(cache, beta0, alpha, s0sq, 8)
    err = abs(dense_val - spectral_val)
    check("efv_dense", err < 1e-8, f"abs error {err:.2e} < 1e-8")

    dense_j = r.sum() - 1.5 * np.trace(H @ H) + np.trace(H @ H @ H) + (w @ H @ w) / s0sq
    err = abs(dense_j - jfv_analytic(cache, beta0, alpha, s0sq, 8))
    check("jfv_dense", err < 1e-8, f"abs error {err:.2e} < 1e-8")

    # --- nested Monte-Carlo oracle for the analytic expectation ------------
    rng = fork_rng(seed, 2, 6)
    n_small, p_small = 3, 5
    X = rng.standard_normal((n_small, p_small))
    beta0 = rng.standard_normal(p_small) / math.sqrt(p_small)
    cache = svd_decompose(X)
    alpha, s0sq = 0.3, 1.0
    closed, (d1, d2, d3) = efv_analytic(cache, beta0, alpha, s0sq, n_small)
    if flip_efv_coefficient:
        closed = closed + 3.0 * d1  # sign of the 1.5 coefficient flipped
    mu_true = X @ beta0
    spec = RidgeSpec(alpha=alpha, sigma0_sq=s0sq)
    outer, inner = 400, 4000
    fv_draws = np.empty(outer)
    for j in range(outer):
        yj = mu_true + math.sqrt(s0sq) * rng.standard_normal(n_small)
        post = ridge_fit(Dataset(X=X, y=yj, sigma0_sq=s0sq), spec, svd=cache)
        fv_draws[j] = fv_mc(posterior_sample(post, inner, rng), yj, s0sq)
    se = fv_draws.std(ddof=1) / math.sqrt(outer)
    dev = abs(fv_draws.mean() - closed) / se
    check("efv_nested_mc", dev < 3.0, f"deviation {dev:.2f} standard errors < 3")

    # --- information criteria ----------------------------------------------
    rng = fork_rng(seed, 2, 7)
    data, cache = make_linear_dataset(12, "intrinsic10", 1.0, rng)
    bhat = np.zeros(data.p)
    forced = Dataset(X=data.X, y=data.X @ bhat + np.ones(12), sigma0_sq=1.0, beta0=data.beta0)
    val = tic(forced, bhat, 0.0, svd=cache)
    err = abs(val - 10.0)  # residual variance forced to sigma0^2 -> rank
    check("tic_rank_recovery", err < 1e-6, f"TIC(0) {val:.8f} vs nonzero count 10, error {err:.2e}")

    res0 = 0.7
    scalar = Dataset(X=np.array([[1.0]]), y=np.array([0.5 + res0]), sigma0_sq=1.0)
    val = ric(scalar, np.array([0.5]), 1.0)
    err = abs(val - res0**2 * 0.5)
    check("ric_scalar", err < 1e-12, f"abs error {err:.2e} < 1e-12")

    # --- Langevin trace vs exact posterior sampling ------------------------
    rng = fork_rng(seed, 2, 8)
    diffs = np.empty(8)
    for j in range(8):
        data, cache = make_linear_dataset(20, "intrinsic10", 1.0, rng)
        spec = RidgeSpec(alpha=0.1, sigma0_sq=1.0)
        post = ridge_fit(data, spec, svd=cache)
        fv_val = fv_mc(posterior_sample(post, 300, rng), data.y, 1.0)
        chain_cfg = LangevinConfig(step=1.0 / 200, kappa_n=20.0, steps_total=300)
        Xj, yj = data.X, data.y

        def grad(g: np.ndarray) -> np.ndarray:
            return (2.0 / 20) * (Xj.T @ (Xj @ g - yj)) + 0.2 * g

        trace = run_chain(grad, lambda g: Xj @ g, post.beta_hat, chain_cfg, y=yj, sigma0_sq=1.0, rng=rng)
        diffs[j] = lfv(trace) - fv_val
    # discretization bias is real but small; the contract is agreement
    # within 3 replication standard deviations, not standard errors
    dev = abs(diffs.mean()) / diffs.std(ddof=1)
    check("lfv_vs_fv_small", dev < 3.0, f"paired deviation {dev:.2f} replication SDs < 3")

    # --- network pieces -----------------------------------------------------
    rng = fork_rng(seed, 2, 9)
    worst = 0.0
    for _ in range(3):
        d_, m_ = int(rng.integers(2, 5)), int(rng.integers(2, 6))
        data = make_nn_dataset(15, d_, 1.0, rng)
        params = MlpParams(
            theta0=0.5 * rng.standard_normal(m_),
            theta1=0.5 * rng.standard_normal((m_, d_)),
            theta2=0.5 * rng.standard_normal(m_),
        )
        flat = params.flatten()
        grad_flat = rho_grad(params, data, 1e-3).flatten()
        h = 1e-5
        for k in range(flat.size):
            up, down = flat.copy(), flat.copy()
            up[k] += h
            down[k] -= h
            num = (rho(MlpParams.unflatten(up, d_, m_), data, 1e-3)
                   - rho(MlpParams.unflatten(down, d_, m_), data, 1e-3)) / (2 * h)
            denom = max(abs(num), abs(grad_flat[k]), 1e-8)
            worst = max(worst, abs(num - grad_flat[k]) / denom)
    check("nn_grad_fd", worst < 1e-5, f"max relative error {worst:.2e} < 1e-5")

    rng = fork_rng(seed, 2, 10)
    params = theta0_construct(10, 50)
    Zs = rng.standard_normal((100, 10))
    err = max(
        abs(mlp_forward(params, z) - 3.0 * math.tanh(z.sum() / 2.0)) for z in Zs
    )
    check("theta0_exact", err < 1e-12, f"max abs error {err:.2e} < 1e-12")

    rng = fork_rng(seed, 2, 11)
    data = make_nn_dataset(50, 3, 1.0, rng)
    params = theta0_construct(3, 8)
    closed = tilde_gap(params, data)
    g = mlp_predict(params, data.Z)
    train_term = float(((data.y - g) ** 2).mean())
    fresh = data.mu_truth + rng.standard_normal((100_000, 50))
    test_draws = ((fresh - g) ** 2).mean(axis=1)
    se = test_draws.std(ddof=1) / math.sqrt(test_draws.shape[0])
    dev = abs((test_draws.mean() - train_term) - closed) / se
    check("tilde_gap_mc", dev < 3.0, f"deviation {dev:.2f} standard errors < 3")

    # --- sphere moment and Haar sampler ------------------------------------
    rng = fork_rng(seed, 2, 12)
    worst = 0.0
    cases = [np.ones(7), np.array([1.0, 0.0]), np.array([1.0, -1.0, 0.0])]
    cases += [rng.standard_normal(int(rng.integers(2, 9))) for _ in range(5)]
    for a in cases:
        emp, ana = sphere_moment_selftest(a, 20_000, rng)
        v = rng.standard_normal((20_000, a.size))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        q = ((v * v) @ a) ** 2
        se = q.std(ddof=1) / math.sqrt(q.shape[0])
        if se > 0:
            worst = max(worst, abs(emp - ana) / se)
    check("sphere_moment", worst < 3.0, f"worst deviation {worst:.2f} standard errors < 3")

    rng = fork_rng(seed, 2, 13)
    signs = np.array([haar_orthonormal(1, 1, rng)[0, 0] for _ in range(10_000)])
    dev = abs(signs.mean()) / (1.0 / math.sqrt(10_000))
    frame = haar_orthonormal(6, 3, rng)
    ortho = np.max(np.abs(frame.T @ frame - np.eye(3)))
    check(
        "haar_sampler",
        dev < 3.0 and ortho < 1e-12,
        f"sign bias {dev:.2f} standard errors < 3, orthonormality {ortho:.2e} < 1e-12",
    )
    return result
